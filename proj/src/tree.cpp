#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/solver.hpp"
#include "solver_common.hpp"

namespace bsde::solver {

std::string_view to_string(Backend b) noexcept {
    return b == Backend::tree ? "tree" : "mc-regression";
}

std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::explicit_step ? "explicit" : "implicit";
}

Backend backend_from_string(std::string_view s) {
    if (s == "tree") return Backend::tree;
    if (s == "mc-regression" || s == "mc") return Backend::mc_regression;
    throw InvalidArgument("unknown backend '" + std::string(s) + "' (expected tree or mc-regression)");
}

Scheme scheme_from_string(std::string_view s) {
    if (s == "explicit") return Scheme::explicit_step;
    if (s == "implicit") return Scheme::implicit_step;
    throw InvalidArgument("unknown scheme '" + std::string(s) + "' (expected explicit or implicit)");
}

double DiscreteSolution::weight_of(std::size_t i, std::size_t k) const {
    return weight.empty() ? 1.0 / static_cast<double>(y[i].size()) : weight[i][k];
}

double DiscreteSolution::mean_y(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = 0; k < y[i].size(); ++k) s += weight_of(i, k) * y[i][k];
    return s;
}

double DiscreteSolution::mean_z(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = 0; k < z[i].size(); ++k) s += weight_of(i, k) * z[i][k];
    return s;
}

bool DiscreteSolution::same_substrate(const DiscreteSolution& other) const noexcept {
    if (backend != other.backend || steps() != other.steps()) return false;
    const auto a = grid.nodes();
    const auto b = other.grid.nodes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    if (backend == Backend::mc_regression) return seed == other.seed && paths == other.paths;
    return true;
}

DiscreteSolution solve_tree(const Generator& g, const TerminalCondition& xi, double horizon, int steps,
                            const SolverOptions& opts) {
    if (steps < 1) throw InvalidArgument("tree needs N >= 1");
    if (opts.picard_cap < 1) throw InvalidArgument("Picard cap must be >= 1");

    DiscreteSolution sol;
    sol.backend = Backend::tree;
    sol.scheme = opts.scheme;
    sol.grid = TimeGrid(horizon, steps);
    sol.diag.z_cap = opts.z_cap;
    if (opts.z_cap) sol.diag.notes.push_back("z clamped: non-conforming run");

    const std::size_t N = static_cast<std::size_t>(steps);
    const double dt = horizon / steps;
    const double sq = std::sqrt(dt);

    sol.y.resize(N + 1);
    sol.z.resize(N);
    sol.w.resize(N + 1);
    sol.weight.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        sol.w[i].resize(i + 1);
        sol.weight[i].resize(i + 1);
        const double logscale = -static_cast<double>(i) * std::log(2.0) + std::lgamma(i + 1.0);
        for (std::size_t j = 0; j <= i; ++j) {
            sol.w[i][j] = (2.0 * static_cast<double>(j) - static_cast<double>(i)) * sq;
            sol.weight[i][j] = std::exp(logscale - std::lgamma(j + 1.0) - std::lgamma(i - j + 1.0));
        }
    }

    sol.y[N].resize(N + 1);
    for (std::size_t j = 0; j <= N; ++j) sol.y[N][j] = xi(sol.w[N][j]);

    std::vector<int> iters(N + 1, 0);
    for (std::size_t i = N; i-- > 0;) {
        const double t = sol.grid[i];
        const auto& next = sol.y[i + 1];
        auto& yi = sol.y[i];
        auto& zi = sol.z[i];
        yi.resize(i + 1);
        zi.resize(i + 1);
        parallel_for(i + 1, opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
                const double up = next[j + 1];
                const double dn = next[j];
                const double E = 0.5 * (up + dn);
                const double z = detail::clamp_z(opts, (up - dn) / (2.0 * sq));
                zi[j] = z;
                iters[j] = detail::backward_step(g, opts, t, E, z, dt, yi[j]);
            }
        });
        for (std::size_t j = 0; j <= i; ++j) {
            sol.diag.max_picard_iterations = std::max(sol.diag.max_picard_iterations, iters[j]);
            sol.diag.picard_total += iters[j];
        }
    }
    return sol;
}

}  // namespace bsde::solver
