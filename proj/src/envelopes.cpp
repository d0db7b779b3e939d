#include "bsdelab/envelopes.hpp"

#include <cmath>
#include <string>

#include "bsdelab/certificate.hpp"
#include "bsdelab/errors.hpp"

namespace bsde::env {
namespace {

constexpr double kBoxMargin = 1.0;

std::string at_time(double t) { return " at t=" + std::to_string(t); }

}  // namespace

void EnvelopeGrid::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("envelope radius must be finite and positive");
    if (nodes < 3 || nodes % 2 == 0) throw InvalidArgument("envelope node count must be odd and >= 3");
    if (passes < 0) throw InvalidArgument("envelope refinement passes must be >= 0");
}

double linearize_phi(const Univariate& phi, double a, double b, int n, double x) {
    if (x < 0.0) throw InvalidArgument("linearize_phi needs x >= 0");
    if (n < 1) throw InvalidArgument("linearize_phi needs n >= 1");
    if (a < 0.0 || b < 0.0) throw InvalidArgument("linearize_phi needs a, b >= 0");
    const double c = a + b;
    const double slope = n + 2.0 * c;
    const double offset = b != 0.0 ? phi(2.0 * c / slope) : 0.0;
    return slope * x + offset;
}

// --- LipschitzEnvelope -------------------------------------------------------

LipschitzEnvelope::LipschitzEnvelope(Univariate psi, double K, double growth_slope, EnvelopeGrid grid)
    : psi_(std::move(psi)), K_(K), k_(growth_slope), grid_(grid) {
    grid_.validate();
    if (psi_.arity() != 1) throw InvalidArgument("envelope base must be a function of one variable");
    if (!(growth_slope >= 0.0)) throw InvalidArgument("growth slope must be nonnegative");
    if (!(K > growth_slope)) {
        throw InvalidArgument("envelope slope K = " + std::to_string(K) +
                              " must exceed the growth slope k = " + std::to_string(growth_slope) +
                              " (otherwise the envelope is infinite)");
    }
}

double LipschitzEnvelope::operator()(double x) const {
    // For y beyond this point psi(y) - K (y - x) <= k (1 + y) - K (y - x) < 0 <= psi(x).
    const double reach = std::max(x, (k_ + K_ * x) / (K_ - k_)) + kBoxMargin;
    auto objective = [&](double y) { return psi_(y) - K_ * std::fabs(x - y); };
    const double anchors[] = {x, 0.0};
    const Maximum m = maximize_1d(objective, 0.0, reach, grid_, anchors);
    return m.value;
}

// --- LinearUpperBound --------------------------------------------------------

double LinearUpperBound::operator()(double t, double y, double z) const {
    const double az = std::fabs(z);
    double zpart = cz(t) * az;
    if (clambda) zpart = std::min(zpart, (*clambda)(t) * std::pow(az, alpha));
    return f(t) + cy(t) * std::fabs(y) + zpart;
}

LinearUpperBound upper_bound_from_certificate(const Generator& g) {
    const AssumptionCertificate* cert = g.certificate();
    if (cert == nullptr) throw InvalidArgument("sup-convolution needs a growth certificate on the generator");
    if (const auto* c = std::get_if<OneSidedLinear>(&cert->condition); c && (c->side == Side::absolute || c->side == Side::upper)) {
        return LinearUpperBound{c->f, c->u, c->v, std::nullopt, 0.5};
    }
    if (const auto* c = std::get_if<MixedSubLinear>(&cert->condition); c && (c->side == Side::absolute || c->side == Side::upper)) {
        return LinearUpperBound{c->f, c->u, c->v, c->lambda, c->alpha};
    }
    throw InvalidArgument("sup-convolution needs a global linear growth certificate, got '" + cert->kind() + "'");
}

// --- SupConvolution ----------------------------------------------------------

SupConvolution::SupConvolution(Generator g, int n, WeightFn u_w, WeightFn v_w, LinearUpperBound bound,
                               EnvelopeGrid grid)
    : g_(std::move(g)),
      n_(n),
      u_w_(std::move(u_w)),
      v_w_(std::move(v_w)),
      bound_(std::move(bound)),
      grid_(grid),
      uses_y_(g_.expression().depends_on(1)),
      uses_z_(g_.expression().depends_on(2)) {
    grid_.validate();
    if (n < 1) throw InvalidArgument("envelope order n must be >= 1");
}

SupConvolution SupConvolution::wedge(Generator g, int n, WeightFn u_w, WeightFn v_w, WeightFn lambda_w,
                                     double alpha, LinearUpperBound bound, EnvelopeGrid grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("wedge exponent alpha must lie in (0, 1)");
    SupConvolution s(std::move(g), n, std::move(u_w), std::move(v_w), std::move(bound), grid);
    s.lambda_w_ = std::move(lambda_w);
    s.alpha_ = alpha;
    return s;
}

SupConvolution SupConvolution::with_order(int n) const {
    SupConvolution s = *this;
    if (n < 1) throw InvalidArgument("envelope order n must be >= 1");
    s.n_ = n;
    return s;
}

double SupConvolution::penalty(double t, double dy, double dz) const {
    double zpen = v_w_(t) * dz;
    if (lambda_w_) zpen = std::min(zpen, (*lambda_w_)(t) * std::pow(dz, alpha_));
    return n_ * (u_w_(t) * dy + zpen);
}

double SupConvolution::operator()(double t, double y, double z) const {
    const double g0 = g_(t, y, z);
    if (!uses_y_ && !uses_z_) return g0;

    // Penalized objective is below g0 outside the box (see class comment).
    const double excess = std::max(bound_(t, y, z) - g0, 0.0) + kBoxMargin;
    double ry = 0.0, rz = 0.0;
    if (uses_y_) {
        const double gap = n_ * u_w_(t) - bound_.cy(t);
        if (!(gap > 0.0)) {
            throw InvalidArgument("n u_w(t) does not exceed the certified y-slope" + at_time(t) +
                                  " (envelope infinite)");
        }
        ry = std::min(grid_.radius, excess / gap);
    }
    if (uses_z_) {
        const double gap = n_ * v_w_(t) - bound_.cz(t);
        if (!(gap > 0.0)) {
            throw InvalidArgument("n v_w(t) does not exceed the certified z-slope" + at_time(t) +
                                  " (envelope infinite)");
        }
        rz = excess / gap;
        if (lambda_w_) {
            if (!bound_.clambda) {
                throw InvalidArgument("wedge penalty needs a wedge (sub-linear) growth bound");
            }
            const double lgap = n_ * (*lambda_w_)(t) - (*bound_.clambda)(t);
            if (!(lgap > 0.0)) {
                throw InvalidArgument("n lambda_w(t) does not exceed the certified lambda" + at_time(t) +
                                      " (envelope infinite)");
            }
            rz = std::max(rz, std::pow(excess / lgap, 1.0 / alpha_));
        }
        rz = std::min(grid_.radius, rz);
    }

    auto objective = [&](double u, double v) {
        return g_(t, u, v) - penalty(t, std::fabs(y - u), std::fabs(z - v));
    };

    if (!uses_z_) {
        const double anchors[] = {y, 0.0};
        const auto m = maximize_1d([&](double u) { return objective(u, z); }, y - ry, y + ry, grid_, anchors);
        return std::max(m.value, g0);
    }
    if (!uses_y_) {
        const double anchors[] = {z, 0.0};
        const auto m = maximize_1d([&](double v) { return objective(y, v); }, z - rz, z + rz, grid_, anchors);
        return std::max(m.value, g0);
    }

    // Joint coarse scan, then alternating coordinate maximization.
    const int coarse = std::min(grid_.nodes, 201);
    double bu = y, bv = z, best = g0;
    for (int i = 0; i < coarse; ++i) {
        const double u = y - ry + 2.0 * ry * i / (coarse - 1);
        for (int j = 0; j < coarse; ++j) {
            const double v = z - rz + 2.0 * rz * j / (coarse - 1);
            const double val = objective(u, v);
            if (val > best) {
                best = val;
                bu = u;
                bv = v;
            }
        }
    }
    for (int pass = 0; pass < std::max(1, grid_.passes); ++pass) {
        const double ua[] = {y, bu, 0.0};
        const auto mu = maximize_1d([&](double u) { return objective(u, bv); }, y - ry, y + ry, grid_, ua);
        if (mu.value > best) {
            best = mu.value;
            bu = mu.arg;
        }
        const double va[] = {z, bv, 0.0};
        const auto mv = maximize_1d([&](double v) { return objective(bu, v); }, z - rz, z + rz, grid_, va);
        if (mv.value > best) {
            best = mv.value;
            bv = mv.arg;
        }
    }
    return best;
}

SupConvolution sup_convolution_generator(const Generator& g, int n, const WeightFn& u_w, const WeightFn& v_w,
                                         EnvelopeGrid grid) {
    return SupConvolution(g, n, u_w, v_w, upper_bound_from_certificate(g), grid);
}

SupConvolution sup_convolution_generator_alpha(const Generator& g, int n, const WeightFn& u_w,
                                               const WeightFn& v_w, const WeightFn& lambda_w, double alpha,
                                               EnvelopeGrid grid) {
    return SupConvolution::wedge(g, n, u_w, v_w, lambda_w, alpha, upper_bound_from_certificate(g), grid);
}

}  // namespace bsde::env
