#include "bsdelab/ode_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/quadrature.hpp"

namespace bsde::ode {
namespace {

struct Escape {
    double time;
    double value;
};

struct Attempt {
    std::vector<double> values;
    std::optional<Escape> escape;
};

// One backward sweep with `m` RK4 substeps per grid interval.
Attempt sweep(double sign, double terminal, const WeightFn& u, const Univariate& l, const TimeGrid& grid,
              int m, double blowup) {
    const double T = grid.horizon();
    const std::size_t N = static_cast<std::size_t>(grid.steps());
    Attempt out;
    out.values.assign(N + 1, 0.0);
    out.values[N] = terminal;

    auto rhs = [&](double s, double x) { return sign * u(T - s) * l(x); };

    double x = terminal;
    for (std::size_t i = N; i-- > 0;) {
        const double s0 = T - grid[i + 1];
        const double h = grid.dt(i) / m;
        for (int k = 0; k < m; ++k) {
            const double s = s0 + k * h;
            try {
                const double k1 = rhs(s, x);
                const double k2 = rhs(s + 0.5 * h, x + 0.5 * h * k1);
                const double k3 = rhs(s + 0.5 * h, x + 0.5 * h * k2);
                const double k4 = rhs(s + h, x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            } catch (const DomainError&) {
                x = std::numeric_limits<double>::infinity();
            }
            if (!std::isfinite(x) || std::fabs(x) > blowup) {
                out.escape = Escape{T - (s + h), x};
                return out;
            }
        }
        out.values[i] = x;
    }
    return out;
}

void trapezoid_tail(std::span<const double> f, const TimeGrid& grid, std::vector<double>& out) {
    const std::size_t N = f.size() - 1;
    out.assign(N + 1, 0.0);
    for (std::size_t i = N; i-- > 0;) out[i] = out[i + 1] + 0.5 * grid.dt(i) * (f[i] + f[i + 1]);
}

}  // namespace

std::vector<double> solve_growth_ode(BoundSide side, double terminal, const WeightFn& u, const Univariate& l,
                                     const TimeGrid& grid, const OdeOptions& opts) {
    if (l.arity() != 1) throw InvalidArgument("growth function l must be univariate");
    if (side == BoundSide::upper && terminal < 0.0) throw InvalidArgument("upper bound needs terminal >= 0");
    if (side == BoundSide::lower && terminal > 0.0) throw InvalidArgument("lower bound needs terminal <= 0");
    const double sign = side == BoundSide::upper ? 1.0 : -1.0;

    Attempt prev = sweep(sign, terminal, u, l, grid, 1, opts.blowup);
    for (int level = 1, m = 2; level <= opts.max_refinements; ++level, m *= 2) {
        Attempt cur = sweep(sign, terminal, u, l, grid, m, opts.blowup);
        if (prev.escape && cur.escape) throw BlowUpError(cur.escape->time, cur.escape->value);
        if (!prev.escape && !cur.escape) {
            double gap = 0.0;
            for (std::size_t i = 0; i < cur.values.size(); ++i) {
                gap = std::max(gap, std::fabs(cur.values[i] - prev.values[i]) / std::max(1.0, std::fabs(cur.values[i])));
            }
            if (gap < opts.tolerance) return cur.values;
        }
        prev = std::move(cur);
    }
    if (prev.escape) throw BlowUpError(prev.escape->time, prev.escape->value);
    throw SolverError("growth ODE did not settle within " + std::to_string(opts.max_refinements) +
                      " step doublings");
}

BoundEnvelope sandwich_envelope(double xi_bound, const WeightFn& u, const Univariate& l, const TimeGrid& grid,
                                const OdeOptions& opts) {
    if (!(xi_bound >= 0.0) || !std::isfinite(xi_bound)) {
        throw InvalidArgument("terminal bound must be finite and nonnegative");
    }
    BoundEnvelope env{grid, {}, {}, -xi_bound, xi_bound};
    env.L = solve_growth_ode(BoundSide::lower, env.a, u, l, grid, opts);
    env.U = solve_growth_ode(BoundSide::upper, env.b, u, l, grid, opts);

    const double slack = opts.tolerance * (1.0 + std::max(std::fabs(env.L[0]), env.U[0]));
    for (std::size_t i = 0; i < env.L.size(); ++i) {
        const bool ok = env.L[0] <= env.L[i] + slack && env.L[i] <= env.a + slack && env.b <= env.U[i] + slack &&
                        env.U[i] <= env.U[0] + slack;
        if (!ok) {
            throw SolverError("bound ordering broken at t=" + std::to_string(grid[i]) +
                              " (a negative u or l upsets the monotone sweep)");
        }
    }
    return env;
}

double gronwall_cap(double b1, double k, const WeightFn& beta, const TimeGrid& grid) {
    if (b1 < 0.0 || k < 0.0) throw InvalidArgument("gronwall_cap needs b1, k >= 0");
    const double I = quad::integrate([&](double s) { return beta(s); }, 0.0, grid.horizon(),
                                     std::max(64, grid.steps()));
    return (b1 + k * I) * std::exp(k * I);
}

BihariResult bihari_sequence(const Univariate& psi, double k, const WeightFn& beta, std::span<const int> orders,
                             std::span<const double> b_values, const TimeGrid& grid, int j_max,
                             const env::EnvelopeGrid& egrid) {
    if (orders.empty() || orders.size() != b_values.size()) {
        throw InvalidArgument("bihari_sequence needs one b value per order");
    }
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (orders[i] < 1) throw InvalidArgument("orders must be >= 1");
        if (b_values[i] < 0.0) throw InvalidArgument("b values must be nonnegative");
        if (i > 0 && orders[i] <= orders[i - 1]) throw InvalidArgument("orders must be increasing");
        if (i > 0 && b_values[i] > b_values[i - 1]) throw InvalidArgument("b values must be non-increasing");
    }
    if (j_max < 1) throw InvalidArgument("j_max must be >= 1");

    constexpr double kStop = 1e-9;
    const std::size_t N = static_cast<std::size_t>(grid.steps());
    BihariResult res;
    res.cap = gronwall_cap(b_values[0], k, beta, grid);

    std::vector<double> betas(N + 1);
    for (std::size_t i = 0; i <= N; ++i) betas[i] = beta(grid[i]);
    const double I = quad::integrate([&](double s) { return beta(s); }, 0.0, grid.horizon(),
                                     std::max(64, grid.steps()));
    const auto tails = quad::tail_integrals([&](double s) { return beta(s); }, grid.nodes());
    std::vector<double> start(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        start[i] = std::min(res.cap, (b_values[0] + k * I) * std::exp(k * tails[i]));
    }

    // Fixed point of v = b + int_t^T beta psi_K(v) by Picard from `start`.
    auto iterate = [&](const env::LipschitzEnvelope& pk, double b, std::vector<double>& v, double& change,
                       int& used, bool track_cap) {
        v = start;
        std::vector<double> f(N + 1), tail;
        for (used = 1; used <= j_max; ++used) {
            for (std::size_t i = 0; i <= N; ++i) f[i] = betas[i] * pk(v[i]);
            trapezoid_tail(f, grid, tail);
            change = 0.0;
            for (std::size_t i = 0; i <= N; ++i) {
                const double next = b + tail[i];
                change = std::max(change, std::fabs(next - v[i]));
                v[i] = next;
                if (track_cap) res.worst_cap_excess = std::max(res.worst_cap_excess, next - res.cap);
            }
            if (change < kStop) return true;
        }
        return false;
    };

    res.worst_cap_excess = *std::max_element(start.begin(), start.end()) - res.cap;
    for (std::size_t idx = 0; idx < orders.size(); ++idx) {
        const double K = orders[idx] + 2.0 * k;
        const env::LipschitzEnvelope pk(psi, K, k, egrid);
        std::vector<double> v;
        double change = 0.0;
        int used = 0;
        if (!iterate(pk, b_values[idx], v, change, used, true)) {
            throw SolverError("Picard iteration for n=" + std::to_string(orders[idx]) + " not converged after " +
                              std::to_string(j_max) + " steps (last change " + std::to_string(change) + ")");
        }
        if (idx > 0) {
            for (std::size_t i = 0; i <= N; ++i) {
                res.worst_monotonicity = std::max(res.worst_monotonicity, v[i] - res.v.back()[i]);
            }
        }
        res.orders.push_back(orders[idx]);
        res.b_values.push_back(b_values[idx]);
        res.slopes.push_back(K);
        res.v.push_back(std::move(v));
        res.iterations.push_back(used);
        res.last_change.push_back(change);
    }

    const env::LipschitzEnvelope last(psi, res.slopes.back(), k, egrid);
    double change = 0.0;
    if (!iterate(last, 0.0, res.limit, change, res.limit_iterations, false)) {
        throw SolverError("limit iteration not converged (last change " + std::to_string(change) + ")");
    }
    return res;
}

OsgoodTable osgood_diagnostic(const Univariate& l, double upper, std::span<const double> eps_seq) {
    if (l.arity() != 1) throw InvalidArgument("growth function l must be univariate");
    if (!(upper > 0.0)) throw InvalidArgument("osgood_diagnostic needs upper > 0");

    auto inv = [&](double x) {
        const double v = l(x);
        if (!(v > 0.0)) throw InvalidArgument("l is not strictly positive at x=" + std::to_string(x));
        return 1.0 / v;
    };
    // int_a^b dx / l(sign x) with x = e^s.
    auto log_integral = [&](double a, double b, double sign) {
        return quad::integrate([&](double s) {
            const double x = std::exp(s);
            return x * inv(sign * x);
        }, std::log(a), std::log(b), 256);
    };

    OsgoodTable tab;
    for (double e : eps_seq) {
        if (!(e > 0.0 && e < upper)) throw InvalidArgument("eps values must lie in (0, upper)");
        tab.eps.push_back(e);
        tab.inner.push_back(log_integral(e, upper, 1.0));
    }
    for (double M : {10.0, 1e2, 1e3, 1e4}) {
        if (M > upper) tab.outer_limits.push_back(M);
    }
    if (tab.outer_limits.empty()) tab.outer_limits.push_back(upper * 10.0);
    while (tab.outer_limits.size() < 4) tab.outer_limits.push_back(tab.outer_limits.back() * 10.0);
    for (double M : tab.outer_limits) {
        tab.outer.push_back(log_integral(upper, M, 1.0));
        tab.outer_negative.push_back(log_integral(upper, M, -1.0));
    }

    auto keeps_growing = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        const double last = v[n - 1] - v[n - 2];
        const double prev = v[n - 2] - v[n - 3];
        return last >= 0.5 * prev;
    };
    tab.likely_osgood = keeps_growing(tab.outer) && keeps_growing(tab.outer_negative);
    tab.verdict = std::string(tab.likely_osgood ? "likely-Osgood" : "not-Osgood") +
                  " (heuristic: tail increments of int dx/l over a decade ladder)";
    return tab;
}

}  // namespace bsde::ode
