#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/solver.hpp"

namespace bsde::solver::detail {

/// One backward step y = E + g(t, ., z) dt. Returns the Picard count used
/// (1 for the explicit scheme).
inline int backward_step(const Generator& g, const SolverOptions& opts, double t, double E, double z, double dt,
                         double& y) {
    if (opts.scheme == Scheme::explicit_step) {
        y = E + g(t, E, z) * dt;
    } else {
        double cur = E;
        int k = 1;
        for (;; ++k) {
            const double next = E + g(t, cur, z) * dt;
            if (std::fabs(next - cur) <= opts.picard_tol * std::max(1.0, std::fabs(next))) {
                cur = next;
                break;
            }
            if (k >= opts.picard_cap) {
                throw SolverError("implicit step not converged after " + std::to_string(opts.picard_cap) +
                                  " iterations at t=" + std::to_string(t) + " (last change " +
                                  std::to_string(std::fabs(next - cur)) + ")");
            }
            cur = next;
        }
        y = cur;
        if (!std::isfinite(y)) throw SolverError("non-finite value at t=" + std::to_string(t));
        return k;
    }
    if (!std::isfinite(y)) throw SolverError("non-finite value at t=" + std::to_string(t));
    return 1;
}

inline double clamp_z(const SolverOptions& opts, double z) {
    return opts.z_cap ? std::clamp(z, -*opts.z_cap, *opts.z_cap) : z;
}

}  // namespace bsde::solver::detail
