#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/solver.hpp"
#include "solver_common.hpp"

namespace bsde::solver {
namespace {

constexpr std::size_t kChunk = 4096;
constexpr double kMaxCondition = 1e12;

// Probabilists' Hermite polynomials He_0..He_D at x.
void hermite(double x, int D, double* out) {
    out[0] = 1.0;
    if (D >= 1) out[1] = x;
    for (int k = 1; k < D; ++k) out[k + 1] = x * out[k] - k * out[k - 1];
}

// Sum of f(p) over paths, chunked so the rounding is thread-count independent.
template <typename F>
double chunked_sum(std::size_t P, int threads, F&& f) {
    const std::size_t chunks = (P + kChunk - 1) / kChunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_for(chunks, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            double s = 0.0;
            for (std::size_t p = c * kChunk; p < std::min(P, (c + 1) * kChunk); ++p) s += f(p);
            partial[c] = s;
        }
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

}  // namespace

std::vector<double> brownian_path(std::uint64_t seed, std::size_t path, const TimeGrid& grid) {
    const rng::CounterRng gen(seed);
    std::vector<double> w(static_cast<std::size_t>(grid.steps()) + 1, 0.0);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        w[i + 1] = w[i] + std::sqrt(grid.dt(i)) * gen.normal(path, i);
    }
    return w;
}

DiscreteSolution solve_mc_regression(const Generator& g, const TerminalCondition& xi, double horizon, int steps,
                                     const McOptions& mc, const SolverOptions& opts) {
    if (steps < 1) throw InvalidArgument("Monte Carlo needs N >= 1");
    if (mc.basis_degree < 1) throw InvalidArgument("basis degree must be >= 1");
    const std::size_t D1 = static_cast<std::size_t>(mc.basis_degree) + 1;
    if (mc.paths < 10 * D1) {
        throw InvalidArgument("need at least 10 (D + 1) = " + std::to_string(10 * D1) + " paths");
    }

    DiscreteSolution sol;
    sol.backend = Backend::mc_regression;
    sol.scheme = opts.scheme;
    sol.grid = TimeGrid(horizon, steps);
    sol.seed = mc.seed;
    sol.paths = mc.paths;
    sol.diag.z_cap = opts.z_cap;
    if (opts.z_cap) sol.diag.notes.push_back("z clamped: non-conforming run");

    const std::size_t N = static_cast<std::size_t>(steps);
    const std::size_t P = mc.paths;
    const int D = mc.basis_degree;

    sol.w.assign(N + 1, std::vector<double>(P, 0.0));
    parallel_for(P, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const auto path = brownian_path(mc.seed, p, sol.grid);
            for (std::size_t i = 0; i <= N; ++i) sol.w[i][p] = path[i];
        }
    });

    sol.y.assign(N + 1, std::vector<double>(P, 0.0));
    sol.z.assign(N, std::vector<double>(P, 0.0));
    for (std::size_t p = 0; p < P; ++p) sol.y[N][p] = xi(sol.w[N][p]);

    std::vector<double> acc(sol.y[N]);  // xi + sum of generator increments, per path
    std::vector<int> iters(P, 0);
    std::vector<double> E(P), basis(P * D1);
    for (std::size_t i = N; i-- > 0;) {
        const double t = sol.grid[i];
        const double dt = sol.grid.dt(i);
        const auto& wi = sol.w[i];
        const auto& wn = sol.w[i + 1];
        const auto& yn = sol.y[i + 1];
        auto& zi = sol.z[i];

        if (i == 0) {
            const double m = chunked_sum(P, opts.threads, [&](std::size_t p) { return yn[p]; }) / P;
            const double zm =
                chunked_sum(P, opts.threads, [&](std::size_t p) { return yn[p] * (wn[p] - wi[p]); }) / (P * dt);
            std::fill(E.begin(), E.end(), m);
            std::fill(zi.begin(), zi.end(), detail::clamp_z(opts, zm));
        } else {
            const double scale = 1.0 / std::sqrt(t);
            parallel_for(P, opts.threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t p = begin; p < end; ++p) hermite(wi[p] * scale, D, &basis[p * D1]);
            });

            // Gram matrix and both right-hand sides, chunk by chunk.
            const std::size_t chunks = (P + kChunk - 1) / kChunk;
            const std::size_t width = D1 * D1 + 2 * D1;
            std::vector<double> partial(chunks * width, 0.0);
            parallel_for(chunks, opts.threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t c = begin; c < end; ++c) {
                    double* s = &partial[c * width];
                    for (std::size_t p = c * kChunk; p < std::min(P, (c + 1) * kChunk); ++p) {
                        const double* b = &basis[p * D1];
                        const double zt = yn[p] * (wn[p] - wi[p]) / dt;
                        for (std::size_t r = 0; r < D1; ++r) {
                            for (std::size_t q = 0; q < D1; ++q) s[r * D1 + q] += b[r] * b[q];
                            s[D1 * D1 + r] += b[r] * yn[p];
                            s[D1 * D1 + D1 + r] += b[r] * zt;
                        }
                    }
                }
            });
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(D1), static_cast<Eigen::Index>(D1));
            Eigen::VectorXd ry = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(D1));
            Eigen::VectorXd rz = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(D1));
            for (std::size_t c = 0; c < chunks; ++c) {
                const double* s = &partial[c * width];
                for (std::size_t r = 0; r < D1; ++r) {
                    for (std::size_t q = 0; q < D1; ++q) G(r, q) += s[r * D1 + q];
                    ry(r) += s[D1 * D1 + r];
                    rz(r) += s[D1 * D1 + D1 + r];
                }
            }

            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
            const double lo = eig.eigenvalues().minCoeff();
            const double hi = eig.eigenvalues().maxCoeff();
            const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
            sol.diag.condition_numbers.push_back(cond);
            if (!(cond < kMaxCondition)) {
                std::ostringstream msg;
                msg << "rank-deficient regression at t=" << t << " (condition number " << cond << ")";
                throw SolverError(msg.str());
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
            const Eigen::VectorXd cy = ldlt.solve(ry);
            const Eigen::VectorXd cz = ldlt.solve(rz);

            parallel_for(P, opts.threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t p = begin; p < end; ++p) {
                    const double* b = &basis[p * D1];
                    double e = 0.0, zz = 0.0;
                    for (std::size_t r = 0; r < D1; ++r) {
                        e += cy(static_cast<Eigen::Index>(r)) * b[r];
                        zz += cz(static_cast<Eigen::Index>(r)) * b[r];
                    }
                    E[p] = e;
                    zi[p] = detail::clamp_z(opts, zz);
                }
            });
        }

        auto& yi = sol.y[i];
        parallel_for(P, opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                iters[p] = detail::backward_step(g, opts, t, E[p], zi[p], dt, yi[p]);
                acc[p] += yi[p] - E[p];
            }
        });
        for (std::size_t p = 0; p < P; ++p) {
            sol.diag.max_picard_iterations = std::max(sol.diag.max_picard_iterations, iters[p]);
            sol.diag.picard_total += iters[p];
        }
    }
    std::reverse(sol.diag.condition_numbers.begin(), sol.diag.condition_numbers.end());

    const double mean = chunked_sum(P, 1, [&](std::size_t p) { return acc[p]; }) / P;
    const double var = chunked_sum(P, 1, [&](std::size_t p) { return (acc[p] - mean) * (acc[p] - mean); }) / (P - 1);
    sol.diag.y0_stderr = std::sqrt(var / P);
    return sol;
}

}  // namespace bsde::solver
