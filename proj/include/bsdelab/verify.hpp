#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bsdelab/certificate.hpp"
#include "bsdelab/ode_bounds.hpp"
#include "bsdelab/report.hpp"
#include "bsdelab/solver.hpp"

namespace bsde::verify {

/// y <= y' + tol at every node or path. Throws InvalidArgument when the two
/// solutions live on different substrates.
VerificationReport comparison_check(const solver::DiscreteSolution& sol,
                                    const solver::DiscreteSolution& sol_prime, double tol);

/// Both orders at once; worst violation is max |y - y'|.
VerificationReport bilateral_check(const solver::DiscreteSolution& sol,
                                   const solver::DiscreteSolution& sol_prime, double tol);

enum class Premise {
    at_primed,  // 1_{y > y'} (g(t, y', z') - g'(t, y', z')) <= tol
    at_own,     // 1_{y > y'} (g(t, y, z) - g'(t, y, z)) <= tol
};

/// Samples the indicator premise at every node or path before T.
VerificationReport indicator_premise_check(const solver::DiscreteSolution& sol,
                                           const solver::DiscreteSolution& sol_prime, const Generator& g,
                                           const Generator& g_prime, Premise which, double tol);

/// Sufficient condition for a premise through a level c:
///   at_primed: y <= c everywhere on `sol` and g <= g' for y < c,
///   at_own: y' >= c everywhere on `sol` (the primed solution) and g <= g' for y > c.
/// Generator dominance is sampled on `grid` restricted to the half-line.
VerificationReport half_line_premise_check(const solver::DiscreteSolution& sol, const Generator& g,
                                           const Generator& g_prime, double c, Premise which,
                                           const SampleGrid& grid, double tol);

/// L_t - tol <= y <= U_t + tol on every node or path.
VerificationReport sandwich_check(const solver::DiscreteSolution& sol, const ode::BoundEnvelope& env,
                                  double tol);

/// Bound envelope built from the generator's super-linear growth
/// certificate (u, l) and the terminal condition's declared bound.
ode::BoundEnvelope envelope_from_certificate(const Generator& g, const TerminalCondition& xi,
                                             const TimeGrid& grid);

struct BackendConfig {
    solver::Backend backend = solver::Backend::tree;
    double horizon = 1.0;
    int steps = 200;
    solver::SolverOptions options;
    solver::McOptions mc;
};

solver::DiscreteSolution solve(const Generator& g, const TerminalCondition& xi, const BackendConfig& cfg);

struct MonotoneFamily {
    VerificationReport report;
    std::vector<double> orders;
    std::vector<double> y0;
};

/// Solves BSDE(min(xi, n), g) for each n and checks y^n nondecreasing in n.
MonotoneFamily monotone_family_check(const Generator& g, const TerminalCondition& xi,
                                     std::span<const double> orders, const BackendConfig& cfg,
                                     double tol = 1e-9);

/// Per-node residuals of the exponentially transformed pair, divided by
/// gamma Y so that the gamma -> 0 limit is the plain residual.
struct TransformResiduals {
    double worst_transformed = 0.0;   // max |Y - E[Y'] - G dt|
    double worst_scaled = 0.0;        // max |(Y - E[Y'] - G dt) / (gamma Y)|
    double worst_plain = 0.0;         // max |y - E[y'] - g(t, y, z) dt|
};

TransformResiduals transform_residuals(const solver::DiscreteSolution& sol, const Generator& g, double gamma);

/// Default tolerance C dt^{3/2} with C = 1.
double transform_tolerance(const solver::DiscreteSolution& sol);

/// Checks the transformed one-step residual against `tol` (tree only).
VerificationReport transform_residual_check(const solver::DiscreteSolution& sol, const Generator& g,
                                            double gamma, double tol);

struct SweepResult {
    std::vector<VerificationReport> reports;
    int passed = 0;
};

/// Randomized ordered pairs g <= g', xi <= xi' from bounded templates,
/// solved on the tree with the implicit scheme.
SweepResult comparison_sweep(int pairs, int steps, std::uint64_t seed, double tol = 1e-6, int threads = 1);

}  // namespace bsde::verify
