#pragma once

#include <span>
#include <string>
#include <vector>

#include "bsdelab/envelopes.hpp"
#include "bsdelab/functions.hpp"
#include "bsdelab/time_grid.hpp"

namespace bsde::ode {

enum class BoundSide { lower, upper };

/// Step control for the backward growth ODEs.
struct OdeOptions {
    double tolerance = 1e-8;     // sup-norm gap between successive refinements
    double blowup = 1e12;        // |value| above this counts as blow-up
    int max_refinements = 14;    // substep doublings per grid interval
};

/// Deterministic bounds L_t <= y_t <= U_t on a time grid.
struct BoundEnvelope {
    TimeGrid grid;
    std::vector<double> L;
    std::vector<double> U;
    double a = 0.0;
    double b = 0.0;
};

/// Backward RK4 for the growth equations, in s = T - t:
///   upper: dU/ds = +u(T-s) l(U),  U(s=0) = terminal >= 0
///   lower: dL/ds = -u(T-s) l(L),  L(s=0) = terminal <= 0
/// Substeps per grid interval double until two successive levels agree to
/// `tolerance`. Throws BlowUpError when the solution leaves [-blowup, blowup]
/// at two successive levels.
std::vector<double> solve_growth_ode(BoundSide side, double terminal, const WeightFn& u,
                                     const Univariate& l, const TimeGrid& grid,
                                     const OdeOptions& opts = {});

/// Both sides with a = -xi_bound, b = xi_bound; checks
/// L_0 <= L_t <= a <= 0 <= b <= U_t <= U_0 at every node.
BoundEnvelope sandwich_envelope(double xi_bound, const WeightFn& u, const Univariate& l,
                                const TimeGrid& grid, const OdeOptions& opts = {});

/// (b1 + k I) exp(k I) with I = int_0^T beta.
double gronwall_cap(double b1, double k, const WeightFn& beta, const TimeGrid& grid);

/// Output of the Picard iteration for v_n = b_n + int_t^T beta psi_n(v_n).
struct BihariResult {
    std::vector<int> orders;                 // n
    std::vector<double> b_values;            // b_n
    std::vector<double> slopes;              // n + 2k
    std::vector<std::vector<double>> v;      // v_n at the grid nodes
    std::vector<int> iterations;             // Picard steps used per n
    std::vector<double> last_change;         // final sup-change per n
    double cap = 0.0;                        // Gronwall cap C
    double worst_cap_excess = 0.0;           // max over n, j, t of v_n^j(t) - C
    double worst_monotonicity = 0.0;         // max over n, t of v_{n+1}(t) - v_n(t)
    std::vector<double> limit;               // fixed point of v = int beta psi_{n_max}(v)
    int limit_iterations = 0;

    bool monotone(double tol = 1e-9) const { return worst_monotonicity <= tol; }
    bool within_cap(double tol = 1e-9) const { return worst_cap_excess <= tol; }
};

/// Picard iteration per order n: psi_n is the (n + 2k)-Lipschitz envelope of psi,
/// iterates start from the Gronwall profile (b_1 + k I) exp(k int_t^T beta)
/// whose maximum is C, and integrals use the trapezoid rule on the grid.
/// Throws SolverError when an order fails to converge within j_max.
BihariResult bihari_sequence(const Univariate& psi, double k, const WeightFn& beta,
                             std::span<const int> orders, std::span<const double> b_values,
                             const TimeGrid& grid, int j_max = 2000,
                             const env::EnvelopeGrid& egrid = {100.0, 401, 3});

/// Heuristic divergence table for int dx / l(x).
struct OsgoodTable {
    std::vector<double> eps;
    std::vector<double> inner;          // int_eps^upper dx / l
    std::vector<double> outer_limits;   // M
    std::vector<double> outer;          // int_upper^M dx / l
    std::vector<double> outer_negative; // int_{-M}^{-upper} dx / l
    bool likely_osgood = false;
    std::string verdict;
};

OsgoodTable osgood_diagnostic(const Univariate& l, double upper, std::span<const double> eps_seq);

}  // namespace bsde::ode
