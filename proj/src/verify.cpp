#include "bsdelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/transforms.hpp"

namespace bsde::verify {
namespace {

using solver::Backend;
using solver::DiscreteSolution;

std::string where(const DiscreteSolution& sol, std::size_t i, std::size_t k) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "t=%.6g %s=%zu", sol.grid[i], sol.backend == Backend::tree ? "node" : "path", k);
    return buf;
}

void require_same(const DiscreteSolution& a, const DiscreteSolution& b) {
    if (!a.same_substrate(b)) throw InvalidArgument("solutions live on different substrates");
}

constexpr const char* kSolutionCaveat =
    "checked against the solution the scheme converges to; maximal/minimal solutions are not isolated";

}  // namespace

VerificationReport comparison_check(const DiscreteSolution& sol, const DiscreteSolution& sol_prime, double tol) {
    require_same(sol, sol_prime);
    VerificationReport rep;
    rep.name = "comparison";
    rep.reference = "ordered terminal data and generators give y <= y'";
    rep.tolerance = tol;
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        for (std::size_t k = 0; k < sol.y[i].size(); ++k) {
            rep.observe_with(sol.y[i][k] - sol_prime.y[i][k], [&] { return where(sol, i, k); });
        }
    }
    rep.notes.push_back(kSolutionCaveat);
    rep.settle();
    return rep;
}

VerificationReport bilateral_check(const DiscreteSolution& sol, const DiscreteSolution& sol_prime, double tol) {
    require_same(sol, sol_prime);
    VerificationReport rep;
    rep.name = "bilateral-comparison";
    rep.reference = "y <= y' and y' <= y on identical data (uniqueness smoke test)";
    rep.tolerance = tol;
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        for (std::size_t k = 0; k < sol.y[i].size(); ++k) {
            rep.observe_with(std::fabs(sol.y[i][k] - sol_prime.y[i][k]), [&] { return where(sol, i, k); });
        }
    }
    rep.settle();
    return rep;
}

VerificationReport indicator_premise_check(const DiscreteSolution& sol, const DiscreteSolution& sol_prime,
                                           const Generator& g, const Generator& g_prime, Premise which,
                                           double tol) {
    require_same(sol, sol_prime);
    VerificationReport rep;
    rep.name = which == Premise::at_primed ? "premise-at-primed" : "premise-at-own";
    rep.reference = which == Premise::at_primed ? "1{y > y'} (g - g')(t, y', z') <= 0"
                                          : "1{y > y'} (g - g')(t, y, z) <= 0";
    rep.tolerance = tol;
    bool active = false;
    for (std::size_t i = 0; i < sol.z.size(); ++i) {
        const double t = sol.grid[i];
        for (std::size_t k = 0; k < sol.y[i].size(); ++k) {
            double v = 0.0;
            if (sol.y[i][k] > sol_prime.y[i][k]) {
                active = true;
                const double y = which == Premise::at_primed ? sol_prime.y[i][k] : sol.y[i][k];
                const double z = which == Premise::at_primed ? sol_prime.z[i][k] : sol.z[i][k];
                v = g(t, y, z) - g_prime(t, y, z);
            }
            rep.observe_with(v, [&] { return where(sol, i, k); });
        }
    }
    if (!active) rep.notes.push_back("indicator never active: premise holds vacuously");
    rep.settle();
    return rep;
}

VerificationReport half_line_premise_check(const DiscreteSolution& sol, const Generator& g,
                                           const Generator& g_prime, double c, Premise which,
                                           const SampleGrid& grid, double tol) {
    VerificationReport rep;
    rep.name = which == Premise::at_primed ? "half-line-at-primed" : "half-line-at-own";
    rep.reference = which == Premise::at_primed ? "y <= c and g <= g' on {y < c} imply the premise at (y', z')"
                                          : "y' >= c and g <= g' on {y > c} imply the premise at (y, z)";
    rep.tolerance = tol;

    const double sign = which == Premise::at_primed ? 1.0 : -1.0;
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        for (std::size_t k = 0; k < sol.y[i].size(); ++k) {
            rep.observe_with(sign * (sol.y[i][k] - c), [&] { return "level " + where(sol, i, k); });
        }
    }

    const double lo = which == Premise::at_primed ? std::min(grid.y_min, c - 1.0) : c;
    const double hi = which == Premise::at_primed ? c : std::max(grid.y_max, c + 1.0);
    for (int a = 0; a < grid.t_count; ++a) {
        const double t = grid.t_min + (grid.t_max - grid.t_min) * a / std::max(1, grid.t_count - 1);
        for (int b = 0; b < grid.y_count; ++b) {
            // Open half-line: drop the endpoint c itself.
            const double y = which == Premise::at_primed ? lo + (hi - lo) * b / grid.y_count
                                                   : hi - (hi - lo) * b / grid.y_count;
            for (int d = 0; d < grid.z_count; ++d) {
                const double z = grid.z_min + (grid.z_max - grid.z_min) * d / std::max(1, grid.z_count - 1);
                rep.observe_with(g(t, y, z) - g_prime(t, y, z), [&] {
                    char buf[96];
                    std::snprintf(buf, sizeof buf, "dominance t=%.6g y=%.6g z=%.6g", t, y, z);
                    return std::string(buf);
                });
            }
        }
    }
    rep.notes.push_back("generator dominance sampled on a finite grid: evidence, not proof");
    rep.settle();
    return rep;
}

VerificationReport sandwich_check(const DiscreteSolution& sol, const ode::BoundEnvelope& env, double tol) {
    if (env.L.size() != sol.y.size()) throw InvalidArgument("envelope and solution grids differ");
    VerificationReport rep;
    rep.name = "sandwich";
    rep.reference = "L_t <= y_t <= U_t for bounded terminal data";
    rep.tolerance = tol;
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        for (std::size_t k = 0; k < sol.y[i].size(); ++k) {
            const double y = sol.y[i][k];
            rep.observe_with(std::max(env.L[i] - y, y - env.U[i]), [&] { return where(sol, i, k); });
        }
    }
    rep.settle();
    return rep;
}

ode::BoundEnvelope envelope_from_certificate(const Generator& g, const TerminalCondition& xi,
                                             const TimeGrid& grid) {
    const AssumptionCertificate* cert = g.certificate();
    const auto* c = cert ? std::get_if<OneSidedSuperLinear>(&cert->condition) : nullptr;
    if (c == nullptr) throw InvalidArgument("sandwich bounds need a one-sided super-linear growth certificate");
    if (!xi.bound()) throw InvalidArgument("sandwich bounds need a declared terminal bound");
    return ode::sandwich_envelope(*xi.bound(), c->u, c->l, grid);
}

solver::DiscreteSolution solve(const Generator& g, const TerminalCondition& xi, const BackendConfig& cfg) {
    if (cfg.backend == Backend::tree) return solver::solve_tree(g, xi, cfg.horizon, cfg.steps, cfg.options);
    return solver::solve_mc_regression(g, xi, cfg.horizon, cfg.steps, cfg.mc, cfg.options);
}

MonotoneFamily monotone_family_check(const Generator& g, const TerminalCondition& xi,
                                     std::span<const double> orders, const BackendConfig& cfg, double tol) {
    if (orders.empty()) throw InvalidArgument("monotone family needs at least one order");
    MonotoneFamily out;
    out.report.name = "monotone-family";
    out.report.reference = "y for min(xi, n) is nondecreasing in n";
    out.report.tolerance = tol;

    std::optional<DiscreteSolution> prev;
    for (std::size_t idx = 0; idx < orders.size(); ++idx) {
        if (idx > 0 && !(orders[idx] > orders[idx - 1])) throw InvalidArgument("orders must be increasing");
        DiscreteSolution cur = solve(g, xi.capped_above(orders[idx]), cfg);
        if (prev) {
            for (std::size_t i = 0; i < cur.y.size(); ++i) {
                for (std::size_t k = 0; k < cur.y[i].size(); ++k) {
                    out.report.observe_with(prev->y[i][k] - cur.y[i][k], [&] {
                        return "n=" + std::to_string(orders[idx]) + " " + where(cur, i, k);
                    });
                }
            }
        }
        out.orders.push_back(orders[idx]);
        out.y0.push_back(cur.y0());
        prev = std::move(cur);
    }
    if (orders.size() == 1) out.report.observe(0.0, "single order");
    out.report.settle();
    return out;
}

TransformResiduals transform_residuals(const DiscreteSolution& sol, const Generator& g, double gamma) {
    if (sol.backend != Backend::tree) throw InvalidArgument("transform residuals need a tree solution");
    const xform::ExpTransformedGenerator G(g, gamma);
    TransformResiduals res;
    for (std::size_t i = 0; i < sol.z.size(); ++i) {
        const double t = sol.grid[i];
        const double dt = sol.grid.dt(i);
        for (std::size_t j = 0; j < sol.y[i].size(); ++j) {
            const double y = sol.y[i][j];
            const double z = sol.z[i][j];
            const double up = sol.y[i + 1][j + 1];
            const double dn = sol.y[i + 1][j];
            const auto [Y, Z] = xform::exp_transform_solution(y, z, gamma);
            if (!(Y > 0.0)) throw SolverError("transformed Y <= 0 at " + where(sol, i, j));
            // Y - E[Y'] = -Y E[expm1(gamma (y' - y))], exact for tiny gamma.
            const double drift = -0.5 * (std::expm1(gamma * (up - y)) + std::expm1(gamma * (dn - y))) / gamma;
            const double scaled = drift - G(t, Y, Z) / (gamma * Y) * dt;
            res.worst_scaled = std::max(res.worst_scaled, std::fabs(scaled));
            res.worst_transformed = std::max(res.worst_transformed, std::fabs(gamma * Y * scaled));
            res.worst_plain = std::max(res.worst_plain, std::fabs(y - 0.5 * (up + dn) - g(t, y, z) * dt));
        }
    }
    return res;
}

double transform_tolerance(const DiscreteSolution& sol) {
    const double dt = sol.grid.horizon() / sol.steps();
    return std::pow(dt, 1.5);
}

VerificationReport transform_residual_check(const DiscreteSolution& sol, const Generator& g, double gamma,
                                            double tol) {
    VerificationReport rep;
    rep.name = "transform-residual";
    rep.reference = "exponential transform maps the scheme for (xi, g) to the scheme for (e^{gamma xi}, G)";
    rep.tolerance = tol;
    const TransformResiduals r = transform_residuals(sol, g, gamma);
    rep.observe(r.worst_transformed, "max over tree nodes");
    rep.notes.push_back("scaled residual " + std::to_string(r.worst_scaled) + ", untransformed residual " +
                        std::to_string(r.worst_plain));
    rep.settle();
    return rep;
}

SweepResult comparison_sweep(int pairs, int steps, std::uint64_t seed, double tol, int threads) {
    if (pairs < 1) throw InvalidArgument("sweep needs at least one pair");
    const rng::CounterRng gen(seed);
    auto draw = [&](int pair, int slot, double lo, double hi) {
        return lo + (hi - lo) * gen.uniform(static_cast<std::uint64_t>(pair), static_cast<std::uint64_t>(slot));
    };
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "(%.17g)", v);
        return std::string(buf);
    };

    SweepResult out;
    solver::SolverOptions opts;
    opts.scheme = solver::Scheme::implicit_step;
    opts.threads = threads;
    for (int p = 0; p < pairs; ++p) {
        const std::string g_src = num(draw(p, 0, -2, 2)) + "*sin(y+" + num(draw(p, 1, 0, 3.14)) + ")+" +
                                  num(draw(p, 2, -2, 2)) + "*cos(z)+" + num(draw(p, 3, -1, 1));
        const std::string gp_src =
            g_src + "+" + num(draw(p, 4, 0, 0.5)) + "+" + num(draw(p, 5, 0, 0.5)) + "*(1+sin(y+z))";
        const std::string xi_src =
            num(draw(p, 6, -1, 1)) + "*sin(w)+" + num(draw(p, 7, -1, 1)) + "*cos(2*w)+" + num(draw(p, 8, -1, 1));
        const std::string xip_src =
            xi_src + "+" + num(draw(p, 9, 0, 0.5)) + "+" + num(draw(p, 10, 0, 0.5)) + "*(1+cos(w))";

        const auto a = solver::solve_tree(Generator::parse(g_src), TerminalCondition::parse(xi_src), 1.0, steps, opts);
        const auto b =
            solver::solve_tree(Generator::parse(gp_src), TerminalCondition::parse(xip_src), 1.0, steps, opts);
        VerificationReport rep = comparison_check(a, b, tol);
        rep.name = "comparison-sweep-" + std::to_string(p);
        rep.notes.push_back("g = " + g_src + ", g' = " + gp_src);
        if (rep.passed()) ++out.passed;
        out.reports.push_back(std::move(rep));
    }
    return out;
}

}  // namespace bsde::verify
