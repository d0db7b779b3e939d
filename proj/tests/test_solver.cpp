#include <doctest.h>

#include <cmath>
#include <numeric>

#include <bsdelab/errors.hpp>
#include <bsdelab/norms.hpp>
#include <bsdelab/rng.hpp>
#include <bsdelab/solver.hpp>

#include "oracles.hpp"

using namespace bsde;
using namespace bsde::solver;

namespace {

const double kInvE = std::exp(-1.0);

SolverOptions implicit() {
    SolverOptions o;
    o.scheme = Scheme::implicit_step;
    return o;
}

DiscreteSolution tree(const char* g, const char* xi, int N, const SolverOptions& o = {}) {
    return solve_tree(Generator::parse(g), TerminalCondition::parse(xi), 1.0, N, o);
}

}  // namespace

TEST_SUITE("tree backend") {
    TEST_CASE("structure") {
        const auto s = tree("0", "w", 7);
        REQUIRE(s.y.size() == 8);
        REQUIRE(s.z.size() == 7);
        for (int i = 0; i <= 7; ++i) {
            CHECK(s.y[i].size() == static_cast<std::size_t>(i + 1));
            const double total = std::accumulate(s.weight[i].begin(), s.weight[i].end(), 0.0);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        }
        // Per-step increment variance is dt exactly.
        const double dt = 1.0 / 7;
        CHECK(s.w[1][1] - s.w[0][0] == doctest::Approx(std::sqrt(dt)).epsilon(1e-15));
        CHECK(s.w[1][0] - s.w[0][0] == doctest::Approx(-std::sqrt(dt)).epsilon(1e-15));
    }

    TEST_CASE("terminal slice equals the payoff exactly") {
        const TerminalCondition xi = TerminalCondition::parse("sin(w) + w^2/3");
        for (Scheme sc : {Scheme::explicit_step, Scheme::implicit_step}) {
            SolverOptions o;
            o.scheme = sc;
            const auto s = solve_tree(Generator::parse("sin(y) - abs(z)^1.5 / (1 + z^2)"), xi, 1.0, 60, o);
            for (std::size_t k = 0; k < s.y.back().size(); ++k) CHECK(s.y.back()[k] == xi(s.w.back()[k]));
        }
    }

    TEST_CASE("martingale payoff has zero value") {
        for (int N : {1, 2, 17, 100}) CHECK(tree("0", "w", N).y0() == 0.0);
    }

    TEST_CASE("closed-form instances") {
        CHECK(std::fabs(tree("0", "w^2", 200).y0() - 1.0) <= 0.02);
        CHECK(std::fabs(tree("-y", "1", 200, implicit()).y0() - kInvE) <= 3e-3);
        CHECK(std::fabs(tree("z", "w", 200).y0() - 1.0) <= 2e-2);
    }

    TEST_CASE("implicit one-step residual") {
        const Generator g = Generator::parse("-y^3 + abs(z)^1.5*sin(y)");
        const auto s = solve_tree(g, TerminalCondition::parse("sin(w)"), 1.0, 100, implicit());
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double dt = s.grid.dt(i);
            for (int j = 0; j <= i; ++j) {
                const double E = 0.5 * (s.y[i + 1][j + 1] + s.y[i + 1][j]);
                worst = std::max(worst, std::fabs(s.y[i][j] - E - g(s.grid[i], s.y[i][j], s.z[i][j]) * dt));
            }
        }
        CHECK(worst <= 1e-10);
    }

    TEST_CASE("first-order convergence on the decay instance") {
        double prev = 0.0;
        for (int N : {50, 100, 200, 400}) {
            const double err = std::fabs(tree("-y", "1", N, implicit()).y0() - kInvE);
            if (prev > 0.0) {
                const double ratio = prev / err;
                CHECK(ratio >= 2.0 * 0.75);
                CHECK(ratio <= 2.0 * 1.25);
            }
            prev = err;
        }
    }

    TEST_CASE("discrete comparison on ordered data") {
        const auto a = tree("sin(y) - 1", "cos(w)", 120, implicit());
        const auto b = tree("sin(y)", "cos(w) + 0.1", 120, implicit());
        for (std::size_t i = 0; i < a.y.size(); ++i)
            for (std::size_t k = 0; k < a.y[i].size(); ++k) CHECK(a.y[i][k] <= b.y[i][k] + 1e-9);
    }

    TEST_CASE("quadratic generator against the transformed linear problem") {
        const double gamma = 1.0;
        const auto direct = tree("z^2/2", "sin(w)", 400, implicit());
        const auto lin = tree("0", "exp(sin(w))", 400);
        CHECK(std::fabs(direct.y0() - std::log(lin.y0()) / gamma) <= 5e-3);
        const double want = std::log(oracle::gaussian_expectation([](double w) { return std::exp(std::sin(w)); }));
        CHECK(std::fabs(direct.y0() - want) <= 5e-3);
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS(tree("5*y", "1", 1, implicit()), SolverError);
        CHECK_THROWS_AS(tree("1/y", "0", 4), Error);
        CHECK_THROWS_AS(tree("0", "1", 0), InvalidArgument);
    }

    TEST_CASE("z clamp marks the run non-conforming") {
        SolverOptions o = implicit();
        o.z_cap = 0.5;
        const auto s = tree("z^2/2", "w", 50, o);
        CHECK_FALSE(s.diag.conforming());
        for (const auto& zi : s.z)
            for (double z : zi) CHECK(std::fabs(z) <= 0.5);
        CHECK(tree("0", "w", 10).diag.conforming());
    }

    TEST_CASE("parallel levels are bit-identical") {
        SolverOptions one = implicit(), many = implicit();
        many.threads = 8;
        const Generator g = Generator::parse("-y^3 + abs(z)^1.5*sin(y)");
        const TerminalCondition xi = TerminalCondition::parse("sin(w)");
        const auto a = solve_tree(g, xi, 1.0, 600, one);
        const auto b = solve_tree(g, xi, 1.0, 600, many);
        CHECK(a.y == b.y);
        CHECK(a.z == b.z);
    }
}

TEST_SUITE("Monte Carlo backend") {
    TEST_CASE("path ensemble moments") {
        const TimeGrid grid(1.0, 10);
        const std::size_t P = 20000;
        const double dt = 0.1;
        for (int i = 0; i < 10; ++i) {
            double sum = 0.0, sum2 = 0.0;
            for (std::size_t p = 0; p < P; ++p) {
                const auto w = brownian_path(5, p, grid);
                const double d = w[i + 1] - w[i];
                sum += d, sum2 += d * d;
            }
            const double mean = sum / P, var = sum2 / P - mean * mean;
            CHECK(std::fabs(mean) <= 5.0 / std::sqrt(static_cast<double>(P)));
            CHECK(std::fabs(var - dt) <= 5.0 * std::sqrt(2.0 / P));
        }
        CHECK(brownian_path(5, 3, grid) == brownian_path(5, 3, grid));
        CHECK(brownian_path(5, 3, grid) != brownian_path(6, 3, grid));
    }

    TEST_CASE("counter RNG is stateless") {
        const rng::CounterRng r(42);
        CHECK(r.bits(3, 7) == r.bits(3, 7));
        CHECK(r.bits(3, 7) != r.bits(3, 8));
        CHECK(r.uniform(1, 1) > 0.0);
        CHECK(r.uniform(1, 1) < 1.0);
    }

    TEST_CASE("second moment") {
        McOptions mc;
        mc.paths = 100000;
        mc.seed = 3;
        const auto s = solve_mc_regression(Generator::parse("0"), TerminalCondition::parse("w^2"), 1.0, 50, mc);
        CHECK(s.diag.y0_stderr > 0.0);
        CHECK(std::fabs(s.y0() - 1.0) <= 3.0 * s.diag.y0_stderr);
        CHECK(s.y.back().size() == mc.paths);
        CHECK(s.diag.condition_numbers.size() == 49);
    }

    TEST_CASE("linear decay") {
        McOptions mc;
        mc.paths = 20000;
        mc.seed = 9;
        const auto s = solve_mc_regression(Generator::parse("-y"), TerminalCondition::parse("1"), 1.0, 50, mc);
        CHECK(std::fabs(s.y0() - kInvE) <= 3.0 * s.diag.y0_stderr + 5e-3);
    }

    TEST_CASE("worker count does not change the result") {
        McOptions mc;
        mc.paths = 30000;
        mc.seed = 77;
        SolverOptions one, eight;
        eight.threads = 8;
        const Generator g = Generator::parse("-y + 0.5*abs(z)");
        const TerminalCondition xi = TerminalCondition::parse("max(w, 0)");
        const auto a = solve_mc_regression(g, xi, 1.0, 20, mc, one);
        const auto b = solve_mc_regression(g, xi, 1.0, 20, mc, eight);
        CHECK(a.y0() == b.y0());
        CHECK(a.y == b.y);
        CHECK(a.z == b.z);
    }

    TEST_CASE("errors") {
        McOptions few;
        few.paths = 20;
        few.basis_degree = 2;
        CHECK_THROWS_AS(solve_mc_regression(Generator::parse("0"), TerminalCondition::parse("w"), 1.0, 5, few),
                        InvalidArgument);
        McOptions wide;
        wide.paths = 400;
        wide.basis_degree = 30;
        CHECK_THROWS_AS(solve_mc_regression(Generator::parse("0"), TerminalCondition::parse("w"), 1.0, 5, wide),
                        SolverError);
    }
}

TEST_SUITE("norms") {
    TEST_CASE("constant solution") {
        const double p[] = {0.5, 1.0, 2.0, 4.0};
        const auto r = estimate_norms(tree("0", "1", 20), p);
        for (double v : r.sp) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
        for (double v : r.mp) CHECK(v == 0.0);
        CHECK(r.bmo == 0.0);
        CHECK(r.sup_estimate == 1.0);
    }

    TEST_CASE("Brownian terminal value") {
        const double p[] = {1.0, 2.0, 4.0};
        const auto r = estimate_norms(tree("0", "w", 100), p);
        CHECK(std::fabs(r.mp[1] - 1.0) <= 2e-2);
        CHECK(std::fabs(r.bmo - 1.0) <= 2e-2);
        CHECK(r.sp[0] <= r.sp[1]);
        CHECK(r.sp[1] <= r.sp[2]);
        for (double v : r.sp) CHECK(v >= 0.0);
        for (const auto& row : r.class_d)
            for (double v : row) CHECK(v >= 0.0);
        REQUIRE(r.ladder.size() == 12);
        CHECK(r.ladder[0] == 0.25);
    }

    TEST_CASE("Monte Carlo solutions carry a proxy note") {
        McOptions mc;
        mc.paths = 5000;
        const auto s = solve_mc_regression(Generator::parse("0"), TerminalCondition::parse("w"), 1.0, 10, mc);
        const double p[] = {2.0};
        const auto r = estimate_norms(s, p);
        CHECK_FALSE(r.notes.empty());
        CHECK(std::fabs(r.mp[0] - 1.0) <= 0.05);
    }

    TEST_CASE("exponent must be positive") {
        const double p[] = {0.0};
        CHECK_THROWS_AS(estimate_norms(tree("0", "w", 5), p), InvalidArgument);
    }
}
