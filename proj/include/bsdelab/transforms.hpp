#pragma once

#include <vector>

#include "bsdelab/functions.hpp"
#include "bsdelab/time_grid.hpp"

namespace bsde::xform {

struct Pair {
    double first = 0.0;
    double second = 0.0;
};

/// (y, z) -> (Y, Z) = (e^{gamma y}, gamma Y z).
Pair exp_transform_solution(double y, double z, double gamma);

/// (Y, Z) -> (ln Y / gamma, Z / (gamma Y)); Y must be positive.
Pair inverse_exp_transform(double Y, double Z, double gamma);

/// G(t, Y, Z) = 1_{Y>0} (gamma Y g(t, ln Y / gamma, Z / (gamma Y)) - Z^2 / (2Y)).
class ExpTransformedGenerator {
public:
    ExpTransformedGenerator(Generator g, double gamma);

    double operator()(double t, double Y, double Z) const;

    /// G(t, Y, Z) / (gamma Y) written in the original variables:
    /// g(t, y, z) - gamma z^2 / 2. Stable as gamma -> 0.
    double scaled(double t, double y, double z) const;

    double gamma() const noexcept { return gamma_; }
    const Generator& base() const noexcept { return g_; }

private:
    Generator g_;
    double gamma_;
};

ExpTransformedGenerator exp_transform_generator(const Generator& g, double gamma);

/// Q_t = alpha exp(-int_t^T u), S_t = beta exp(int_t^T u) at the grid nodes.
struct QSBounds {
    std::vector<double> Q;
    std::vector<double> S;
};

QSBounds qs_bounds(double alpha, double beta, const WeightFn& u, const TimeGrid& grid);

/// gamma = 2 (max_{|y| <= K} h(y) + 1), h sampled on `samples` points.
double gamma_for_band(const Univariate& h, double K, int samples = 2001);

}  // namespace bsde::xform
