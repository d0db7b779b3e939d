#include "bsdelab/norms.hpp"

#include <algorithm>
#include <cmath>

#include "bsdelab/errors.hpp"
#include "bsdelab/rng.hpp"

namespace bsde::solver {
namespace {

struct PathStats {
    std::vector<double> sup_y;   // max_i |y_i| per path
    std::vector<double> qv;      // sum_i z_i^2 dt per path
};

PathStats tree_paths(const DiscreteSolution& sol, const NormOptions& opts) {
    const rng::CounterRng gen(opts.seed);
    const std::size_t N = static_cast<std::size_t>(sol.steps());
    PathStats st;
    st.sup_y.resize(opts.sample_paths);
    st.qv.resize(opts.sample_paths);
    for (std::size_t p = 0; p < opts.sample_paths; ++p) {
        std::size_t j = 0;
        double m = std::fabs(sol.y[0][0]);
        double q = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            q += sol.z[i][j] * sol.z[i][j] * sol.grid.dt(i);
            if (gen.coin(p, i)) ++j;
            m = std::max(m, std::fabs(sol.y[i + 1][j]));
        }
        st.sup_y[p] = m;
        st.qv[p] = q;
    }
    return st;
}

PathStats mc_paths(const DiscreteSolution& sol) {
    const std::size_t N = static_cast<std::size_t>(sol.steps());
    const std::size_t P = sol.y[0].size();
    PathStats st;
    st.sup_y.assign(P, 0.0);
    st.qv.assign(P, 0.0);
    for (std::size_t i = 0; i <= N; ++i) {
        for (std::size_t p = 0; p < P; ++p) {
            st.sup_y[p] = std::max(st.sup_y[p], std::fabs(sol.y[i][p]));
            if (i < N) st.qv[p] += sol.z[i][p] * sol.z[i][p] * sol.grid.dt(i);
        }
    }
    return st;
}

double power_mean(const std::vector<double>& x, double p) {
    double s = 0.0;
    for (double v : x) s += std::pow(v, p);
    s /= static_cast<double>(x.size());
    return std::pow(s, std::min(1.0, 1.0 / p));
}

}  // namespace

NormReport estimate_norms(const DiscreteSolution& sol, std::span<const double> p_list, const NormOptions& opts) {
    for (double p : p_list) {
        if (!(p > 0.0)) throw InvalidArgument("norm exponents must be positive");
    }
    if (opts.sample_paths == 0 || opts.ladder_size < 1) throw InvalidArgument("invalid norm options");

    NormReport rep;
    const std::size_t N = static_cast<std::size_t>(sol.steps());
    for (const auto& slice : sol.y) {
        for (double v : slice) rep.sup_estimate = std::max(rep.sup_estimate, std::fabs(v));
    }

    const PathStats st = sol.backend == Backend::tree ? tree_paths(sol, opts) : mc_paths(sol);
    std::vector<double> root_qv(st.qv.size());
    for (std::size_t k = 0; k < st.qv.size(); ++k) root_qv[k] = std::sqrt(st.qv[k]);
    for (double p : p_list) {
        rep.p_list.push_back(p);
        rep.sp.push_back(power_mean(st.sup_y, p));
        rep.mp.push_back(power_mean(root_qv, p));
    }

    for (int k = 0; k < opts.ladder_size; ++k) rep.ladder.push_back(std::ldexp(1.0, k - 2));
    rep.class_d.assign(N + 1, std::vector<double>(rep.ladder.size(), 0.0));
    for (std::size_t i = 0; i <= N; ++i) {
        for (std::size_t c = 0; c < rep.ladder.size(); ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < sol.y[i].size(); ++k) {
                const double a = std::fabs(sol.y[i][k]);
                if (a > rep.ladder[c]) s += sol.weight_of(i, k) * a;
            }
            rep.class_d[i][c] = s;
        }
    }
    rep.notes.push_back("class (D) table uses grid times in place of stopping times; no verdict");

    if (sol.backend == Backend::tree) {
        std::vector<double> q(N + 1, 0.0), next;
        for (std::size_t i = N; i-- > 0;) {
            next = q;
            for (std::size_t j = 0; j <= i; ++j) {
                const double z = sol.z[i][j];
                q[j] = z * z * sol.grid.dt(i) + 0.5 * (next[j] + next[j + 1]);
                rep.bmo = std::max(rep.bmo, q[j]);
            }
        }
    } else {
        std::vector<double> tail(sol.y[0].size(), 0.0);
        for (std::size_t i = N; i-- > 0;) {
            double mean = 0.0;
            for (std::size_t p = 0; p < tail.size(); ++p) {
                tail[p] += sol.z[i][p] * sol.z[i][p] * sol.grid.dt(i);
                mean += tail[p];
            }
            rep.bmo = std::max(rep.bmo, mean / static_cast<double>(tail.size()));
        }
        rep.notes.push_back("Monte Carlo BMO value is an unconditional proxy (max over t of E[int_t^T |z|^2])");
    }
    return rep;
}

}  // namespace bsde::solver
