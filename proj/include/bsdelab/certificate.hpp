#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "bsdelab/functions.hpp"
#include "bsdelab/report.hpp"

namespace bsde {

/// Which part of the (y, z) plane a one-sided linear bound covers.
enum class Side {
    sign,           // g(t,y,z) sgn(y) <= bound for all y
    nonpositive_y,  // g <= bound for y <= 0
    nonnegative_y,  // -g <= bound for y >= 0
    absolute,       // |g| <= bound for all y
    upper,          // g <= bound for all y
};

std::string_view to_string(Side s) noexcept;
Side side_from_string(std::string_view s);

/// (g(y1,z) - g(y2,z)) sgn(y1-y2) <= u(t) rho(|y1-y2|).
struct OneSidedOsgoodY {
    WeightFn u;
    Univariate rho;
    double rho_growth_k = 1.0;
};

/// |g(y,z1) - g(y,z2)| <= v(t) phi(|z1-z2|), with 0 <= phi(x) <= a x + b.
struct ContinuityZ {
    WeightFn v;
    Univariate phi;
    double a = 0.0;
    double b = 0.0;
};

/// |g(y,z) - g(y,0)| <= lambda(t) |z|^alpha, or
/// lambda(t) (f(t) + |y| + |z|)^alpha when f is given.
struct SubLinearDiffZ {
    WeightFn lambda;
    double alpha = 0.5;
    std::optional<WeightFn> f;
};

/// g sgn(y) <= u(t) l(y) + h(y) |z|^2 with l strictly positive.
struct OneSidedSuperLinear {
    WeightFn u;
    Univariate l;
    Univariate h;
};

/// |g| <= u_bar(t) phi_bar(y) + h_bar(y) |z|^2.
struct QuadGrowth {
    WeightFn u_bar;
    Univariate phi_bar;
    Univariate h_bar;
};

/// |g(y,z1) - g(y,z2)| <= (v(t) + |z1| + |z2|) |z1 - z2|.
struct LocalLipschitzZ {
    WeightFn v;
};

/// z -> g(t,y,z) convex (or concave) for every t, y.
struct ConvexityZ {
    bool convex = true;
};

/// Linear growth f(t) + u(t)|y| + v(t)|z| on the given side.
struct OneSidedLinear {
    WeightFn f;
    WeightFn u;
    WeightFn v;
    Side side = Side::sign;
};

/// f(t) + u(t)|y| + min(v(t)|z|, lambda(t)|z|^alpha) on the given side.
struct MixedSubLinear {
    WeightFn f;
    WeightFn u;
    WeightFn v;
    WeightFn lambda;
    double alpha = 0.5;
    Side side = Side::sign;
};

struct AssumptionCertificate {
    using Condition = std::variant<OneSidedOsgoodY, ContinuityZ, SubLinearDiffZ, OneSidedSuperLinear,
                                   QuadGrowth, LocalLipschitzZ, ConvexityZ, OneSidedLinear,
                                   MixedSubLinear>;
    Condition condition;

    std::string kind() const;
};

/// Sampling ranges for certificate checks. Pairwise conditions use every
/// ordered pair of y (or z) nodes; the total is capped at `max_evaluations`
/// by shrinking every axis by the same factor.
struct SampleGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    int t_count = 21;
    double y_min = -5.0;
    double y_max = 5.0;
    int y_count = 51;
    double z_min = -5.0;
    double z_max = 5.0;
    int z_count = 51;
    std::size_t max_evaluations = 1'000'000;
};

/// Evaluates the certificate's defining inequality on the sample grid.
/// Witness invariants (rho, phi monotone with value 0 at 0, l > 0, ...) are
/// checked first; a broken witness fails the report.
VerificationReport check_certificate(const Generator& g, const AssumptionCertificate& cert,
                                     const SampleGrid& grid = {});

}  // namespace bsde
