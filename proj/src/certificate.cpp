#include "bsdelab/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "bsdelab/errors.hpp"

namespace bsde {

std::string_view to_string(Side s) noexcept {
    switch (s) {
        case Side::sign: return "sign";
        case Side::nonpositive_y: return "nonpositive_y";
        case Side::nonnegative_y: return "nonnegative_y";
        case Side::absolute: return "absolute";
        case Side::upper: return "upper";
    }
    return "sign";
}

Side side_from_string(std::string_view s) {
    if (s == "sign") return Side::sign;
    if (s == "nonpositive_y") return Side::nonpositive_y;
    if (s == "nonnegative_y") return Side::nonnegative_y;
    if (s == "absolute") return Side::absolute;
    if (s == "upper") return Side::upper;
    throw InvalidArgument("unknown side '" + std::string(s) + "'");
}

std::string AssumptionCertificate::kind() const {
    struct Visitor {
        std::string operator()(const OneSidedOsgoodY&) const { return "one_sided_osgood_y"; }
        std::string operator()(const ContinuityZ&) const { return "continuity_z"; }
        std::string operator()(const SubLinearDiffZ&) const { return "sub_linear_diff_z"; }
        std::string operator()(const OneSidedSuperLinear&) const { return "one_sided_super_linear"; }
        std::string operator()(const QuadGrowth&) const { return "quad_growth"; }
        std::string operator()(const LocalLipschitzZ&) const { return "local_lipschitz_z"; }
        std::string operator()(const ConvexityZ&) const { return "convexity_z"; }
        std::string operator()(const OneSidedLinear&) const { return "one_sided_linear"; }
        std::string operator()(const MixedSubLinear&) const { return "mixed_sub_linear"; }
    };
    return std::visit(Visitor{}, condition);
}

namespace {

constexpr double kCertificateTolerance = 1e-9;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

// Shrinks the axis counts by a common factor until the product of the
// `weights`-th powers fits the evaluation cap. Pairwise axes enter squared.
std::vector<int> thin(std::vector<int> counts, const std::vector<int>& powers, std::size_t cap) {
    auto total = [&] {
        double p = 1.0;
        for (std::size_t i = 0; i < counts.size(); ++i) p *= std::pow(counts[i], powers[i]);
        return p;
    };
    const double t0 = total();
    if (t0 <= static_cast<double>(cap)) return counts;
    const int dims = std::accumulate(powers.begin(), powers.end(), 0);
    const double f = std::pow(static_cast<double>(cap) / t0, 1.0 / dims);
    for (auto& c : counts) c = std::max(2, static_cast<int>(std::floor(c * f)));
    while (total() > static_cast<double>(cap)) {
        auto it = std::max_element(counts.begin(), counts.end());
        if (*it <= 2) break;
        --*it;
    }
    return counts;
}

std::string at(std::initializer_list<std::pair<const char*, double>> coords) {
    std::string s;
    char buf[64];
    for (const auto& [name, v] : coords) {
        if (!s.empty()) s += ", ";
        std::snprintf(buf, sizeof buf, "%s=%.6g", name, v);
        s += buf;
    }
    return s;
}

// Witness helpers ------------------------------------------------------------

// rho/phi style modulus: value 0 at 0, nondecreasing, bounded by slope*x + offset.
void check_modulus(VerificationReport& rep, const Univariate& m, const char* label, double span,
                   double slope, double offset, bool strictly_positive) {
    const auto xs = linspace(0.0, span, 401);
    const double m0 = m(0.0);
    rep.observe_with(std::fabs(m0), [&] { return std::string(label) + "(0) != 0"; });
    double prev = m0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double v = m(xs[i]);
        rep.observe_with(prev - v, [&] { return std::string(label) + " decreases at x=" + std::to_string(xs[i]); });
        rep.observe_with(v - (slope * xs[i] + offset),
                         [&] { return std::string(label) + " exceeds linear bound at x=" + std::to_string(xs[i]); });
        rep.observe_with(-v, [&] { return std::string(label) + " negative at x=" + std::to_string(xs[i]); });
        if (strictly_positive && v <= 0.0) {
            rep.observe(1.0, std::string(label) + " vanishes at x=" + std::to_string(xs[i]));
        }
        prev = v;
    }
}

void check_positive(VerificationReport& rep, const Univariate& f, const char* label,
                    const std::vector<double>& ys, bool strict) {
    for (double y : ys) {
        const double v = f(y);
        if (strict ? v <= 0.0 : v < 0.0) {
            rep.observe(strict ? 1.0 : -v, std::string(label) + " not positive at y=" + std::to_string(y));
        }
    }
}

void check_weight(VerificationReport& rep, const WeightFn& w, const char* label, const std::vector<double>& ts) {
    for (double t : ts) {
        const double v = w(t);
        if (v < 0.0) rep.observe(-v, std::string(label) + " negative at t=" + std::to_string(t));
    }
}

struct Axes {
    std::vector<double> t, y, z;
};

class Checker {
public:
    Checker(const Generator& g, const SampleGrid& grid, VerificationReport& rep)
        : g_(g), grid_(grid), rep_(rep) {}

    Axes axes(int pair_y, int pair_z) const {
        auto counts = thin({grid_.t_count, grid_.y_count, grid_.z_count}, {1, 1 + pair_y, 1 + pair_z},
                           grid_.max_evaluations);
        return {linspace(grid_.t_min, grid_.t_max, counts[0]), linspace(grid_.y_min, grid_.y_max, counts[1]),
                linspace(grid_.z_min, grid_.z_max, counts[2])};
    }

    // g on the full t x y x z grid.
    std::vector<double> tabulate(const Axes& ax) const {
        std::vector<double> out;
        out.reserve(ax.t.size() * ax.y.size() * ax.z.size());
        for (double t : ax.t)
            for (double y : ax.y)
                for (double z : ax.z) out.push_back(g_(t, y, z));
        return out;
    }

    void run(const OneSidedOsgoodY& c) {
        const auto ax = axes(1, 0);
        check_weight(witness_, c.u, "u", ax.t);
        check_modulus(witness_, c.rho, "rho", grid_.y_max - grid_.y_min, c.rho_growth_k, c.rho_growth_k, true);
        if (witness_failed()) return;
        const auto G = tabulate(ax);
        const std::size_t ny = ax.y.size(), nz = ax.z.size();
        for (std::size_t it = 0; it < ax.t.size(); ++it) {
            const double u = c.u(ax.t[it]);
            for (std::size_t i1 = 0; i1 < ny; ++i1)
                for (std::size_t i2 = 0; i2 < ny; ++i2) {
                    const double d = ax.y[i1] - ax.y[i2];
                    const double rhs = u * c.rho(std::fabs(d));
                    for (std::size_t iz = 0; iz < nz; ++iz) {
                        const double g1 = G[(it * ny + i1) * nz + iz];
                        const double g2 = G[(it * ny + i2) * nz + iz];
                        rep_.observe_with((g1 - g2) * sgn(d) - rhs, [&] {
                            return at({{"t", ax.t[it]}, {"y1", ax.y[i1]}, {"y2", ax.y[i2]}, {"z", ax.z[iz]}});
                        });
                    }
                }
        }
    }

    void run(const ContinuityZ& c) {
        const auto ax = axes(0, 1);
        check_weight(witness_, c.v, "v", ax.t);
        check_modulus(witness_, c.phi, "phi", grid_.z_max - grid_.z_min, c.a, c.b, false);
        if (witness_failed()) return;
        const auto G = tabulate(ax);
        const std::size_t ny = ax.y.size(), nz = ax.z.size();
        for (std::size_t it = 0; it < ax.t.size(); ++it) {
            const double v = c.v(ax.t[it]);
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t i1 = 0; i1 < nz; ++i1)
                    for (std::size_t i2 = 0; i2 < nz; ++i2) {
                        const double g1 = G[(it * ny + iy) * nz + i1];
                        const double g2 = G[(it * ny + iy) * nz + i2];
                        const double rhs = v * c.phi(std::fabs(ax.z[i1] - ax.z[i2]));
                        rep_.observe_with(std::fabs(g1 - g2) - rhs, [&] {
                            return at({{"t", ax.t[it]}, {"y", ax.y[iy]}, {"z1", ax.z[i1]}, {"z2", ax.z[i2]}});
                        });
                    }
        }
    }

    void run(const SubLinearDiffZ& c) {
        if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
        const auto ax = axes(0, 0);
        check_weight(witness_, c.lambda, "lambda", ax.t);
        if (c.f) check_weight(witness_, *c.f, "f", ax.t);
        if (witness_failed()) return;
        for (double t : ax.t) {
            const double lam = c.lambda(t);
            const double f = c.f ? (*c.f)(t) : 0.0;
            for (double y : ax.y)
                for (double z : ax.z) {
                    const double diff = std::fabs(g_(t, y, z) - g_(t, y, 0.0));
                    const double base = c.f ? f + std::fabs(y) + std::fabs(z) : std::fabs(z);
                    rep_.observe_with(diff - lam * std::pow(base, c.alpha),
                                      [&] { return at({{"t", t}, {"y", y}, {"z", z}}); });
                }
        }
    }

    void run(const OneSidedSuperLinear& c) {
        const auto ax = axes(0, 0);
        check_weight(witness_, c.u, "u", ax.t);
        check_positive(witness_, c.l, "l", ax.y, true);
        check_positive(witness_, c.h, "h", ax.y, false);
        if (witness_failed()) return;
        for (double t : ax.t) {
            const double u = c.u(t);
            for (double y : ax.y) {
                const double ly = c.l(y), hy = c.h(y);
                for (double z : ax.z) {
                    rep_.observe_with(g_(t, y, z) * sgn(y) - (u * ly + hy * z * z),
                                      [&] { return at({{"t", t}, {"y", y}, {"z", z}}); });
                }
            }
        }
    }

    void run(const QuadGrowth& c) {
        const auto ax = axes(0, 0);
        check_weight(witness_, c.u_bar, "u_bar", ax.t);
        check_positive(witness_, c.phi_bar, "phi_bar", ax.y, false);
        check_positive(witness_, c.h_bar, "h_bar", ax.y, false);
        if (witness_failed()) return;
        for (double t : ax.t) {
            const double u = c.u_bar(t);
            for (double y : ax.y) {
                const double py = c.phi_bar(y), hy = c.h_bar(y);
                for (double z : ax.z) {
                    rep_.observe_with(std::fabs(g_(t, y, z)) - (u * py + hy * z * z),
                                      [&] { return at({{"t", t}, {"y", y}, {"z", z}}); });
                }
            }
        }
    }

    void run(const LocalLipschitzZ& c) {
        const auto ax = axes(0, 1);
        check_weight(witness_, c.v, "v", ax.t);
        if (witness_failed()) return;
        const auto G = tabulate(ax);
        const std::size_t ny = ax.y.size(), nz = ax.z.size();
        for (std::size_t it = 0; it < ax.t.size(); ++it) {
            const double v = c.v(ax.t[it]);
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t i1 = 0; i1 < nz; ++i1)
                    for (std::size_t i2 = 0; i2 < nz; ++i2) {
                        const double z1 = ax.z[i1], z2 = ax.z[i2];
                        const double lhs = std::fabs(G[(it * ny + iy) * nz + i1] - G[(it * ny + iy) * nz + i2]);
                        const double rhs = (v + std::fabs(z1) + std::fabs(z2)) * std::fabs(z1 - z2);
                        rep_.observe_with(lhs - rhs, [&] {
                            return at({{"t", ax.t[it]}, {"y", ax.y[iy]}, {"z1", z1}, {"z2", z2}});
                        });
                    }
        }
    }

    void run(const ConvexityZ& c) {
        const auto ax = axes(0, 1);
        const auto G = tabulate(ax);
        const std::size_t ny = ax.y.size(), nz = ax.z.size();
        const double s = c.convex ? 1.0 : -1.0;
        for (std::size_t it = 0; it < ax.t.size(); ++it)
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t i1 = 0; i1 < nz; ++i1)
                    for (std::size_t i2 = i1 + 1; i2 < nz; ++i2) {
                        const double zm = 0.5 * (ax.z[i1] + ax.z[i2]);
                        const double mid = g_(ax.t[it], ax.y[iy], zm);
                        const double chord = 0.5 * (G[(it * ny + iy) * nz + i1] + G[(it * ny + iy) * nz + i2]);
                        rep_.observe_with(s * (mid - chord), [&] {
                            return at({{"t", ax.t[it]}, {"y", ax.y[iy]}, {"z1", ax.z[i1]}, {"z2", ax.z[i2]}});
                        });
                    }
    }

    template <typename Bound>
    void run_sided(Side side, const std::vector<double>& ts, const std::vector<double>& ys,
                   const std::vector<double>& zs, Bound&& bound) {
        for (double t : ts)
            for (double y : ys) {
                if (side == Side::nonpositive_y && y > 0.0) continue;
                if (side == Side::nonnegative_y && y < 0.0) continue;
                for (double z : zs) {
                    const double g = g_(t, y, z);
                    double lhs = 0.0;
                    switch (side) {
                        case Side::sign: lhs = g * sgn(y); break;
                        case Side::nonpositive_y: lhs = g; break;
                        case Side::nonnegative_y: lhs = -g; break;
                        case Side::absolute: lhs = std::fabs(g); break;
                        case Side::upper: lhs = g; break;
                    }
                    rep_.observe_with(lhs - bound(t, y, z), [&] { return at({{"t", t}, {"y", y}, {"z", z}}); });
                }
            }
    }

    void run(const OneSidedLinear& c) {
        const auto ax = axes(0, 0);
        check_weight(witness_, c.f, "f", ax.t);
        check_weight(witness_, c.u, "u", ax.t);
        check_weight(witness_, c.v, "v", ax.t);
        if (witness_failed()) return;
        run_sided(c.side, ax.t, ax.y, ax.z, [&](double t, double y, double z) {
            return c.f(t) + c.u(t) * std::fabs(y) + c.v(t) * std::fabs(z);
        });
    }

    void run(const MixedSubLinear& c) {
        if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
        const auto ax = axes(0, 0);
        check_weight(witness_, c.f, "f", ax.t);
        check_weight(witness_, c.u, "u", ax.t);
        check_weight(witness_, c.v, "v", ax.t);
        check_weight(witness_, c.lambda, "lambda", ax.t);
        if (witness_failed()) return;
        run_sided(c.side, ax.t, ax.y, ax.z, [&](double t, double y, double z) {
            const double az = std::fabs(z);
            return c.f(t) + c.u(t) * std::fabs(y) + std::min(c.v(t) * az, c.lambda(t) * std::pow(az, c.alpha));
        });
    }

private:
    bool witness_failed() {
        if (witness_.worst_violation <= kCertificateTolerance) return false;
        rep_.observe(witness_.worst_violation, "witness: " + witness_.location);
        return true;
    }

    const Generator& g_;
    const SampleGrid& grid_;
    VerificationReport& rep_;
    VerificationReport witness_;
};

const char* describe(const AssumptionCertificate& cert) {
    struct Visitor {
        const char* operator()(const OneSidedOsgoodY&) const {
            return "one-sided Osgood condition in y: (g(y1)-g(y2)) sgn(y1-y2) <= u(t) rho(|y1-y2|)";
        }
        const char* operator()(const ContinuityZ&) const {
            return "uniform continuity in z: |g(z1)-g(z2)| <= v(t) phi(|z1-z2|)";
        }
        const char* operator()(const SubLinearDiffZ&) const {
            return "sub-linear growth of z-increments: |g(y,z)-g(y,0)| <= lambda(t) (.)^alpha";
        }
        const char* operator()(const OneSidedSuperLinear&) const {
            return "one-sided super-linear growth: g sgn(y) <= u(t) l(y) + h(y)|z|^2";
        }
        const char* operator()(const QuadGrowth&) const {
            return "quadratic growth: |g| <= u(t) phi(y) + h(y)|z|^2";
        }
        const char* operator()(const LocalLipschitzZ&) const {
            return "local Lipschitz in z: |g(z1)-g(z2)| <= (v(t)+|z1|+|z2|)|z1-z2|";
        }
        const char* operator()(const ConvexityZ&) const { return "convexity or concavity in z"; }
        const char* operator()(const OneSidedLinear&) const {
            return "one-sided linear growth: f(t) + u(t)|y| + v(t)|z|";
        }
        const char* operator()(const MixedSubLinear&) const {
            return "one-sided linear/sub-linear growth: f(t) + u(t)|y| + min(v(t)|z|, lambda(t)|z|^alpha)";
        }
    };
    return std::visit(Visitor{}, cert.condition);
}

}  // namespace

VerificationReport check_certificate(const Generator& g, const AssumptionCertificate& cert,
                                     const SampleGrid& grid) {
    if (grid.t_count < 1 || grid.y_count < 2 || grid.z_count < 2 || !(grid.t_max >= grid.t_min) ||
        !(grid.y_max > grid.y_min) || !(grid.z_max > grid.z_min)) {
        throw InvalidArgument("sample grid needs finite ranges and at least two y and z nodes");
    }
    VerificationReport rep;
    rep.name = "certificate " + cert.kind();
    rep.reference = describe(cert);
    rep.tolerance = kCertificateTolerance;
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    rep.notes.push_back("sampled check on a finite grid: evidence, not proof");
    Checker checker(g, grid, rep);
    try {
        std::visit([&](const auto& c) { checker.run(c); }, cert.condition);
    } catch (const DomainError& e) {
        rep.status = Status::fail;
        rep.worst_violation = std::numeric_limits<double>::infinity();
        rep.location = e.what();
        return rep;
    }
    rep.settle();
    return rep;
}

}  // namespace bsde
