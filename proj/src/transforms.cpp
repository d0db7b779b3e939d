#include "bsdelab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsdelab/errors.hpp"
#include "bsdelab/quadrature.hpp"

namespace bsde::xform {
namespace {

void require_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be finite and positive");
}

}  // namespace

Pair exp_transform_solution(double y, double z, double gamma) {
    require_gamma(gamma);
    const double Y = std::exp(gamma * y);
    return {Y, gamma * Y * z};
}

Pair inverse_exp_transform(double Y, double Z, double gamma) {
    require_gamma(gamma);
    if (!(Y > 0.0)) throw InvalidArgument("inverse transform needs Y > 0");
    return {std::log(Y) / gamma, Z / (gamma * Y)};
}

ExpTransformedGenerator::ExpTransformedGenerator(Generator g, double gamma) : g_(std::move(g)), gamma_(gamma) {
    require_gamma(gamma);
}

double ExpTransformedGenerator::operator()(double t, double Y, double Z) const {
    if (!(Y > 0.0)) return 0.0;
    const double gy = gamma_ * Y;
    return gy * g_(t, std::log(Y) / gamma_, Z / gy) - Z * Z / (2.0 * Y);
}

double ExpTransformedGenerator::scaled(double t, double y, double z) const {
    return g_(t, y, z) - 0.5 * gamma_ * z * z;
}

ExpTransformedGenerator exp_transform_generator(const Generator& g, double gamma) {
    return ExpTransformedGenerator(g, gamma);
}

QSBounds qs_bounds(double alpha, double beta, const WeightFn& u, const TimeGrid& grid) {
    if (!(alpha > 0.0 && alpha <= 1.0 && beta >= 1.0) || !std::isfinite(beta)) {
        throw InvalidArgument("qs_bounds needs 0 < alpha <= 1 <= beta");
    }
    const auto tails = quad::tail_integrals([&](double s) { return u(s); }, grid.nodes(), 8);
    QSBounds out;
    out.Q.reserve(tails.size());
    out.S.reserve(tails.size());
    for (double I : tails) {
        out.Q.push_back(alpha * std::exp(-I));
        out.S.push_back(beta * std::exp(I));
    }
    return out;
}

double gamma_for_band(const Univariate& h, double K, int samples) {
    if (!(K > 0.0)) throw InvalidArgument("band half-width must be positive");
    if (samples < 2) throw InvalidArgument("need at least two samples");
    double hmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) hmax = std::max(hmax, h(-K + 2.0 * K * i / (samples - 1)));
    return 2.0 * (hmax + 1.0);
}

}  // namespace bsde::xform
