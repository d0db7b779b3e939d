#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/solver.hpp"

namespace bsde::solver {

/// Integrability diagnostics of a discrete solution. Tree expectations over
/// path functionals use `sample_paths` tree paths drawn with a fixed seed;
/// Monte Carlo solutions use their own paths.
struct NormReport {
    double sup_estimate = 0.0;            // max |y| over all nodes or paths
    std::vector<double> p_list;
    std::vector<double> sp;               // S^p estimates
    std::vector<double> mp;               // M^p estimates
    std::vector<double> ladder;           // dyadic thresholds c
    std::vector<std::vector<double>> class_d;  // [time][c] of E[|y_t| 1_{|y_t| > c}]
    double bmo = 0.0;                     // max over nodes of E[sum_{k>=i} z_k^2 dt | node]
    std::vector<std::string> notes;
};

struct NormOptions {
    std::size_t sample_paths = 20000;
    std::uint64_t seed = 20240229;
    int ladder_size = 12;  // c = 2^-2, ..., 2^(ladder_size - 3)
};

NormReport estimate_norms(const DiscreteSolution& sol, std::span<const double> p_list,
                          const NormOptions& opts = {});

}  // namespace bsde::solver
