#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bsdelab/functions.hpp"
#include "bsdelab/time_grid.hpp"

namespace bsde::solver {

enum class Backend { tree, mc_regression };
enum class Scheme { explicit_step, implicit_step };

std::string_view to_string(Backend b) noexcept;
std::string_view to_string(Scheme s) noexcept;
Backend backend_from_string(std::string_view s);
Scheme scheme_from_string(std::string_view s);

struct Diagnostics {
    int max_picard_iterations = 0;
    std::int64_t picard_total = 0;
    std::vector<double> condition_numbers;  // Gram matrix, per MC step
    std::optional<double> z_cap;            // set when z was clamped
    double y0_stderr = 0.0;                 // MC only
    std::vector<std::string> notes;

    bool conforming() const noexcept { return !z_cap.has_value(); }
};

/// Backward solution on a discrete Brownian substrate.
///
/// Slice i holds one entry per tree node (i + 1 of them) or per path. `z`
/// has N slices: z[i] drives the step from t_i to t_{i+1}. `w` holds the
/// Brownian value of each entry. `weight` holds tree node probabilities; it
/// is empty for Monte Carlo, where every path weighs 1/P.
struct DiscreteSolution {
    Backend backend = Backend::tree;
    Scheme scheme = Scheme::explicit_step;
    TimeGrid grid{1.0, 1};
    std::vector<std::vector<double>> y;
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> weight;
    std::uint64_t seed = 0;  // MC only
    std::size_t paths = 0;   // MC only
    Diagnostics diag;

    int steps() const noexcept { return grid.steps(); }

    /// Probability-weighted mean of slice i.
    double mean_y(std::size_t i) const;
    double mean_z(std::size_t i) const;
    double y0() const { return mean_y(0); }

    /// Probability of entry k of slice i.
    double weight_of(std::size_t i, std::size_t k) const;

    /// Same backend, grid and random substrate.
    bool same_substrate(const DiscreteSolution& other) const noexcept;
};

struct SolverOptions {
    Scheme scheme = Scheme::explicit_step;
    double picard_tol = 1e-12;
    int picard_cap = 50;
    std::optional<double> z_cap;  // exploratory only; marks the run non-conforming
    int threads = 1;
};

/// Recombining binomial tree with increments +-sqrt(dt), w_{i,j} = (2j - i) sqrt(dt).
DiscreteSolution solve_tree(const Generator& g, const TerminalCondition& xi, double horizon, int steps,
                            const SolverOptions& opts = {});

struct McOptions {
    std::size_t paths = 100000;
    int basis_degree = 2;
    std::uint64_t seed = 1;
};

/// Least-squares regression on Hermite polynomials of B_{t_i} / sqrt(t_i).
/// Gram sums are accumulated in fixed-size chunks in a fixed order, so the
/// result is bit-identical for every thread count.
DiscreteSolution solve_mc_regression(const Generator& g, const TerminalCondition& xi, double horizon,
                                     int steps, const McOptions& mc, const SolverOptions& opts = {});

/// Brownian value of path `p` at every grid node (w[0] = 0).
std::vector<double> brownian_path(std::uint64_t seed, std::size_t path, const TimeGrid& grid);

}  // namespace bsde::solver
