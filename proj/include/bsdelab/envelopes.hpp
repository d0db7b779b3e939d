#pragma once

#include <optional>
#include <span>

#include "bsdelab/functions.hpp"

namespace bsde::env {

/// Search settings for the envelope maximizers.
struct EnvelopeGrid {
    double radius = 100.0;  // cap on the search-box half-width
    int nodes = 2001;       // scan nodes per pass, odd so the centre is a node
    int passes = 3;         // zoom passes before golden-section polishing

    void validate() const;
};

struct Maximum {
    double arg = 0.0;
    double value = 0.0;
};

/// Maximizes f over [lo, hi]: a uniform scan, `passes - 1` zoomed rescans
/// around the incumbent, then golden-section polishing. Anchor points are
/// always evaluated, so kinks placed there are hit exactly.
template <typename F>
Maximum maximize_1d(F&& f, double lo, double hi, const EnvelopeGrid& grid,
                    std::span<const double> anchors = {});

/// (n + 2c) x + 1_{b != 0} phi(2c / (n + 2c)) with c = a + b: a linear
/// majorant of phi valid whenever phi is nondecreasing with phi <= a x + b.
double linearize_phi(const Univariate& phi, double a, double b, int n, double x);

/// psi_K(x) = sup_{y >= 0} { psi(y) - K |x - y| }.
///
/// psi must be nonnegative, nondecreasing and satisfy psi(x) <= k (1 + x);
/// K > k keeps the supremum finite and lets the search stop at
/// (k + K x) / (K - k), beyond which the objective is provably negative.
class LipschitzEnvelope {
public:
    LipschitzEnvelope(Univariate psi, double K, double growth_slope, EnvelopeGrid grid = {});

    double operator()(double x) const;
    double slope() const noexcept { return K_; }
    const Univariate& base() const noexcept { return psi_; }

private:
    Univariate psi_;
    double K_;
    double k_;
    EnvelopeGrid grid_;
};

/// g(t,y,z) <= f(t) + cy(t)|y| + cz(t)|z|, or with a wedge z-part
/// min(cz(t)|z|, clambda(t)|z|^alpha) when `clambda` is set.
struct LinearUpperBound {
    WeightFn f = WeightFn::constant(0.0);
    WeightFn cy = WeightFn::constant(0.0);
    WeightFn cz = WeightFn::constant(0.0);
    std::optional<WeightFn> clambda;
    double alpha = 0.5;

    double operator()(double t, double y, double z) const;
};

/// Upper bound read off the generator's certificate; only global
/// (side = absolute or upper) linear or mixed growth certificates qualify.
LinearUpperBound upper_bound_from_certificate(const Generator& g);

/// g_n(t,y,z) = sup_{u,v} { g(t,u,v) - n u_w(t)|y-u| - n P_t(|z-v|) }
/// with P_t(d) = v_w(t) d, or the wedge min(v_w(t) d, lambda_w(t) d^alpha).
///
/// The search box around (y, z) comes from the upper bound: outside it the
/// penalized objective is below g(t,y,z), so truncation never cuts the argmax
/// (as long as the box stays under the grid radius cap).
class SupConvolution {
public:
    /// Linear penalty.
    SupConvolution(Generator g, int n, WeightFn u_w, WeightFn v_w, LinearUpperBound bound,
                   EnvelopeGrid grid = {});

    /// Wedge penalty n min(v_w |z-v|, lambda_w |z-v|^alpha).
    static SupConvolution wedge(Generator g, int n, WeightFn u_w, WeightFn v_w, WeightFn lambda_w,
                                double alpha, LinearUpperBound bound, EnvelopeGrid grid = {});

    double operator()(double t, double y, double z) const;

    /// n u_w(t) dy + n P_t(dz) for dy, dz >= 0.
    double penalty(double t, double dy, double dz) const;

    int order() const noexcept { return n_; }
    const Generator& base() const noexcept { return g_; }

    /// Same construction at another order n.
    SupConvolution with_order(int n) const;

private:
    Generator g_;
    int n_;
    WeightFn u_w_;
    WeightFn v_w_;
    std::optional<WeightFn> lambda_w_;
    double alpha_ = 0.5;
    LinearUpperBound bound_;
    EnvelopeGrid grid_;
    bool uses_y_;
    bool uses_z_;
};

/// Spec-shaped entry points; the growth bound comes from the certificate.
SupConvolution sup_convolution_generator(const Generator& g, int n, const WeightFn& u_w,
                                         const WeightFn& v_w, EnvelopeGrid grid = {});
SupConvolution sup_convolution_generator_alpha(const Generator& g, int n, const WeightFn& u_w,
                                               const WeightFn& v_w, const WeightFn& lambda_w,
                                               double alpha, EnvelopeGrid grid = {});

}  // namespace bsde::env

#include "bsdelab/detail/maximize.ipp"
