#include <doctest.h>

#include <cmath>
#include <random>

#include <bsdelab/certificate.hpp>
#include <bsdelab/errors.hpp>
#include <bsdelab/expr.hpp>
#include <bsdelab/functions.hpp>

using namespace bsde;
using expr::Expression;
using expr::Op;

namespace {

const double kPi = 3.14159265358979323846;

// Random expressions over (t, y, z) built through the public builders.
struct RandomAst {
    std::mt19937_64 rng;

    explicit RandomAst(std::uint64_t seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    Expression leaf() {
        if (pick(3) == 0) {
            // Mix of "nice" and full-precision constants, both signs.
            const double c = pick(2) == 0 ? std::round(real(-9, 9)) : real(-5, 5);
            return Expression::constant(c);
        }
        return Expression::variable(static_cast<std::size_t>(pick(3)), expr::generator_variables());
    }

    Expression build(int depth) {
        if (depth == 0 || pick(4) == 0) return leaf();
        const Expression a = build(depth - 1);
        switch (pick(15)) {
            case 0: return a + build(depth - 1);
            case 1: return a - build(depth - 1);
            case 2: return a * build(depth - 1);
            case 3: return a / build(depth - 1);
            case 4: return -a;
            case 5: return pow(a, Expression::constant(static_cast<double>(pick(4))));
            case 6: return pow(apply(Op::Abs, a), Expression::constant(real(0.1, 2.0)));
            case 7: return apply(Op::Sin, a);
            case 8: return apply(Op::Cos, a);
            case 9: return apply(Op::Exp, apply(Op::Sin, a));
            case 10: return apply(Op::Ln, Expression::constant(1.0) + apply(Op::Abs, a));
            case 11: return apply(Op::Sqrt, apply(Op::Abs, a));
            case 12: return apply(Op::Min, a, build(depth - 1));
            case 13: return apply(Op::Max, apply(Op::Sign, a), build(depth - 1));
            default: return apply(Op::Clamp, a, Expression::constant(-2.0), Expression::constant(3.0));
        }
    }
};

// Evaluation outcome: a finite value or a domain error.
struct Outcome {
    bool error = false;
    double value = 0.0;
};

Outcome eval_outcome(const Expression& e, double t, double y, double z) {
    try {
        return {false, e.eval({t, y, z})};
    } catch (const DomainError&) {
        return {true, 0.0};
    }
}

}  // namespace

TEST_SUITE("expression parsing") {
    TEST_CASE("block-one g2 parses to the expected function") {
        const Expression e = expr::parse("-y^3 + abs(z)^1.5 * sin(y)");
        for (double y : {-2.0, -0.3, 0.0, 1.0, 2.5})
            for (double z : {-3.0, 0.0, 0.7}) {
                const double want = -y * y * y + std::pow(std::fabs(z), 1.5) * std::sin(y);
                CHECK(e.eval({0.2, y, z}) == doctest::Approx(want).epsilon(1e-15));
            }
        CHECK(e.eval({0.0, 1.0, 0.0}) == -1.0);
    }

    TEST_CASE("constant zero") {
        const Expression e = expr::parse("0");
        CHECK(e.is_constant());
        CHECK(e.eval({0.0, 3.0, -2.0}) == 0.0);
        CHECK(e.eval({1.0, -7.0, 9.0}) == 0.0);
    }

    TEST_CASE("block-one g1 at (0, 0, 1)") {
        CHECK(expr::parse("abs(z)^2 * exp(y) + y*cos(y)").eval({0.0, 0.0, 1.0}) == 1.0);
    }

    TEST_CASE("block-two g1 at (0, 0, pi)") {
        const double v = expr::parse("abs(z)^2*(1 - exp(y)) + abs(z)*sin(abs(z))").eval({0.0, 0.0, kPi});
        CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::fabs(v) < 1e-12);
    }

    TEST_CASE("precedence and associativity") {
        CHECK(expr::parse("2^3^2").eval({0, 0, 0}) == 512.0);
        CHECK(expr::parse("-2^2").eval({0, 0, 0}) == -4.0);
        CHECK(expr::parse("1 - 2 - 3").eval({0, 0, 0}) == -4.0);
        CHECK(expr::parse("8 / 2 / 2").eval({0, 0, 0}) == 2.0);
        CHECK(expr::parse("1 + 2 * 3").eval({0, 0, 0}) == 7.0);
        CHECK(expr::parse("(1 + 2) * 3").eval({0, 0, 0}) == 9.0);
        CHECK(expr::parse("2 * -y").eval({0, 3, 0}) == -6.0);
        CHECK(expr::parse("pi").eval({0, 0, 0}) == doctest::Approx(kPi));
        CHECK(expr::parse("clamp(y, -1, 2)").eval({0, 5, 0}) == 2.0);
        CHECK(expr::parse("min(y, z) + max(y, z)").eval({0, 2, -1}) == 1.0);
    }

    TEST_CASE("sign of zero is zero") {
        CHECK(expr::parse("sign(y)").eval({0, 0, 0}) == 0.0);
        CHECK(expr::parse("sign(y)").eval({0, -0.5, 0}) == -1.0);
        CHECK(expr::parse("sign(y)").eval({0, 1e-300, 0}) == 1.0);
    }

    TEST_CASE("syntax errors carry position and expected tokens") {
        try {
            (void)expr::parse("1 + * y");
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.position() == 4);
            CHECK_FALSE(e.expected().empty());
        }
        CHECK_THROWS_AS(expr::parse("(y + 1"), ParseError);
        CHECK_THROWS_AS(expr::parse(""), ParseError);
        CHECK_THROWS_AS(expr::parse("y z"), ParseError);
        CHECK_THROWS_AS(expr::parse("min(y)"), ParseError);
    }

    TEST_CASE("unknown identifier") {
        try {
            (void)expr::parse("y + q");
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.position() == 4);
        }
        CHECK_THROWS_AS(expr::parse("w"), ParseError);
        CHECK_THROWS_AS(expr::parse("foo(y)"), ParseError);
    }

    TEST_CASE("univariate functions accept one free variable") {
        CHECK(expr::parse_univariate("1 + abs(x)")(-2.0) == 3.0);
        CHECK(expr::parse_univariate("sqrt(u)")(4.0) == 2.0);
        CHECK(expr::parse_univariate("7")(123.0) == 7.0);
        CHECK_THROWS_AS(expr::parse_univariate("x + y"), ParseError);
    }
}

TEST_SUITE("expression evaluation") {
    TEST_CASE("domain violations are reported with the sub-expression") {
        try {
            (void)expr::parse("1 + ln(y)").eval({0, -1, 0});
            FAIL("no error");
        } catch (const DomainError& e) {
            CHECK(e.subexpression().find("ln") != std::string::npos);
        }
        CHECK_THROWS_AS(expr::parse("sqrt(y)").eval({0, -1, 0}), DomainError);
        CHECK_THROWS_AS(expr::parse("y^0.5").eval({0, -4, 0}), DomainError);
        CHECK_THROWS_AS(expr::parse("1 / y").eval({0, 0, 0}), DomainError);
        CHECK_THROWS_AS(expr::parse("exp(y)").eval({0, 1000, 0}), DomainError);
        CHECK(expr::parse("abs(y)^0.5").eval({0, -4, 0}) == 2.0);
        CHECK(expr::parse("y^3").eval({0, -2, 0}) == -8.0);
    }

    TEST_CASE("generator wrapper") {
        const Generator g = Generator::parse("-y^3 + abs(z)^1.5 * sin(y)");
        CHECK(g(0.0, 1.0, 0.0) == -1.0);
        CHECK(Generator::parse("0")(0.4, 12.0, -3.0) == 0.0);
        CHECK_THROWS_AS(Generator::parse("w + y"), ParseError);
    }

    TEST_CASE("round trip over random expressions") {
        RandomAst gen(20240601);
        std::mt19937_64 pts(99);
        std::uniform_real_distribution<double> u(-3.0, 3.0), ut(0.0, 1.0);
        int compared = 0;
        for (int k = 0; k < 1000; ++k) {
            const Expression e = gen.build(5);
            const std::string text = e.to_string();
            Expression back;
            REQUIRE_NOTHROW(back = expr::parse(text));
            for (int p = 0; p < 100; ++p) {
                const double t = ut(pts), y = u(pts), z = u(pts);
                const Outcome a = eval_outcome(e, t, y, z);
                const Outcome b = eval_outcome(back, t, y, z);
                if (a.error != b.error || a.value != b.value) {
                    FAIL_CHECK("round trip mismatch for " << text << " at (" << t << ", " << y << ", " << z << ")");
                    break;
                }
                if (!a.error) ++compared;
            }
        }
        CHECK(compared > 50000);
    }
}

TEST_SUITE("rewrites") {
    TEST_CASE("dual generator") {
        CHECK(dual_generator(Generator::parse("y"))(0.3, 1.7, 2.0) == 1.7);
        CHECK(dual_generator(Generator::parse("1"))(0.3, 1.7, 2.0) == -1.0);
        const Generator g = Generator::parse("-y^3 + abs(z)^1.5 * sin(y)");
        const double direct = -(-std::pow(-1.0, 3) + std::pow(1.0, 1.5) * std::sin(-1.0));
        CHECK(dual_generator(g)(0.0, 1.0, 1.0) == doctest::Approx(direct).epsilon(1e-15));
        CHECK(dual_generator(g)(0.0, 1.0, 1.0) == doctest::Approx(-0.158529).epsilon(1e-6));
    }

    TEST_CASE("dual is an involution") {
        const Generator g = Generator::parse("exp(-y)*sqrt(abs(z)) + sqrt(1 + abs(y) + abs(z)) - t*y");
        const Generator dd = dual_generator(dual_generator(g));
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        for (int k = 0; k < 500; ++k) {
            const double t = std::fabs(u(rng)) / 4.0, y = u(rng), z = u(rng);
            CHECK(dd(t, y, z) == g(t, y, z));
        }
    }

    TEST_CASE("truncation") {
        const Generator g = Generator::parse("y");
        CHECK(truncate_generator(g, 2.0)(0, 5, 0) == 2.0);
        CHECK(truncate_generator(g, 2.0)(0, 1, 0) == 1.0);
        CHECK(truncate_generator(Generator::parse("-y^3"), 1.0)(0, -3, 0) == 1.0);
        CHECK_THROWS_AS(truncate_generator(g, 0.0), InvalidArgument);
    }

    TEST_CASE("truncation is idempotent") {
        const Generator g = Generator::parse("-y^3 + abs(z)^1.5 * sin(y)");
        const Generator once = truncate_generator(g, 1.5);
        const Generator twice = truncate_generator(once, 1.5);
        for (double y = -4.0; y <= 4.0; y += 0.25)
            for (double z = -2.0; z <= 2.0; z += 0.5) CHECK(once(0.5, y, z) == twice(0.5, y, z));
    }
}

TEST_SUITE("weights and terminal data") {
    TEST_CASE("weight classes") {
        CHECK(WeightFn::parse("1").check(1.0).passed());
        CHECK(WeightFn::parse("2*t", Integrability::L1).check(1.0).passed());
        CHECK(WeightFn::parse("1/sqrt(t + 1e-3)", Integrability::L1).check(1.0).passed());
        CHECK_FALSE(WeightFn::parse("t - 0.5").check(1.0).passed());
    }

    TEST_CASE("terminal bound") {
        CHECK(TerminalCondition::parse("sin(w)", 1.0).check_bound().passed());
        CHECK_FALSE(TerminalCondition::parse("sin(w)", 0.1).check_bound().passed());
        const TerminalCondition capped = TerminalCondition::parse("w^2").capped_above(4.0);
        CHECK(capped(3.0) == 4.0);
        CHECK(capped(1.0) == 1.0);
    }
}

TEST_SUITE("certificates") {
    SampleGrid block_grid() {
        SampleGrid s;
        s.t_min = 0.0, s.t_max = 1.0, s.t_count = 50;
        s.y_min = -5.0, s.y_max = 5.0, s.y_count = 50;
        s.z_min = -5.0, s.z_max = 5.0, s.z_count = 50;
        return s;
    }

    TEST_CASE("one-sided super-linear growth of g2") {
        const Generator g = Generator::parse("-y^3 + abs(z)^1.5 * sin(y)");
        AssumptionCertificate c{OneSidedSuperLinear{WeightFn(), expr::parse_univariate("1 + abs(x)"),
                                                    expr::parse_univariate("1")}};
        const auto r = check_certificate(g, c, block_grid());
        CHECK(r.passed());
        CHECK(r.worst_violation <= 0.0);
    }

    TEST_CASE("Osgood in y, equality case") {
        AssumptionCertificate c{OneSidedOsgoodY{WeightFn(), expr::parse_univariate("x"), 1.0}};
        const auto r = check_certificate(Generator::parse("y"), c);
        CHECK(r.passed());
        CHECK(std::fabs(r.worst_violation) < 1e-12);
    }

    TEST_CASE("Osgood in y fails for y^2") {
        AssumptionCertificate c{OneSidedOsgoodY{WeightFn(), expr::parse_univariate("x"), 1.0}};
        SampleGrid s;
        s.y_min = 0.0, s.y_max = 10.0, s.y_count = 11;
        const auto r = check_certificate(Generator::parse("y^2"), c, s);
        CHECK(r.status == Status::fail);
        CHECK(r.worst_violation > 0.0);

        // The named pair alone: 100 - 81 = 19 against rho(1) = 1.
        SampleGrid pair;
        pair.y_min = 9.0, pair.y_max = 10.0, pair.y_count = 2;
        pair.z_count = 2, pair.t_count = 2;
        const auto rp = check_certificate(Generator::parse("y^2"), c, pair);
        CHECK(rp.status == Status::fail);
        CHECK(rp.worst_violation == doctest::Approx(18.0));
    }

    TEST_CASE("block one") {
        const auto s = block_grid();
        const Generator g1 = Generator::parse("abs(z)^2*exp(y) + y*cos(y)");
        const Generator g2 = Generator::parse("-y^3 + abs(z)^1.5*sin(y)");
        AssumptionCertificate sl1{OneSidedSuperLinear{WeightFn(), expr::parse_univariate("1 + abs(x)"),
                                                      expr::parse_univariate("exp(x)")}};
        AssumptionCertificate q1{QuadGrowth{WeightFn(), expr::parse_univariate("abs(x)"),
                                            expr::parse_univariate("exp(x)")}};
        AssumptionCertificate q2{QuadGrowth{WeightFn(), expr::parse_univariate("1 + abs(x)^3"),
                                            expr::parse_univariate("1")}};
        CHECK(check_certificate(g1, sl1, s).passed());
        CHECK(check_certificate(g1, q1, s).passed());
        CHECK(check_certificate(g2, q2, s).passed());
    }

    TEST_CASE("block two") {
        const auto s = block_grid();
        AssumptionCertificate c{OneSidedLinear{WeightFn::constant(1.0), WeightFn::constant(1.0),
                                               WeightFn::constant(1.0, Integrability::L2), Side::sign}};
        CHECK(check_certificate(Generator::parse("abs(z)^2*(1 - exp(y)) + abs(z)*sin(abs(z))"), c, s).passed());
        CHECK(check_certificate(Generator::parse("-y^5 + cos(y*abs(z))"), c, s).passed());
        // Without the one-sided restriction the quadratic part breaks the bound.
        AssumptionCertificate abs_c{OneSidedLinear{WeightFn::constant(1.0), WeightFn::constant(1.0),
                                                   WeightFn::constant(1.0, Integrability::L2), Side::absolute}};
        CHECK_FALSE(check_certificate(Generator::parse("abs(z)^2*(1 - exp(y)) + abs(z)*sin(abs(z))"), abs_c, s).passed());
    }

    TEST_CASE("block three") {
        const auto s = block_grid();
        AssumptionCertificate c1{MixedSubLinear{WeightFn::constant(1.0), WeightFn::constant(1.0),
                                                WeightFn::constant(1.0, Integrability::L2),
                                                WeightFn::parse("1", Integrability::Lq, 1.0 / 3.0), 1.0 / 3.0,
                                                Side::sign}};
        CHECK(check_certificate(Generator::parse("-abs(z)^2*y^3 + abs(z)^(1/3)"), c1, s).passed());
        AssumptionCertificate c2{MixedSubLinear{WeightFn::constant(4.0), WeightFn::constant(1.0),
                                                WeightFn::constant(2.0, Integrability::L2),
                                                WeightFn::parse("2", Integrability::Lq, 0.5), 0.5, Side::sign}};
        CHECK(check_certificate(Generator::parse("exp(-y)*sqrt(abs(z)) + sqrt(1 + abs(y) + abs(z))"), c2, s).passed());
    }

    TEST_CASE("continuity in z and sub-linear difference") {
        AssumptionCertificate c{ContinuityZ{WeightFn::constant(1.0, Integrability::L2),
                                            expr::parse_univariate("min(1, x)"), 0.0, 1.0}};
        CHECK(check_certificate(Generator::parse("sin(z)*0.5 + y"), c).passed());
        CHECK_FALSE(check_certificate(Generator::parse("3*z"), c).passed());
        AssumptionCertificate d{SubLinearDiffZ{WeightFn::parse("1", Integrability::Lq, 0.5), 0.5, std::nullopt}};
        CHECK(check_certificate(Generator::parse("y + abs(z)^0.5"), d).passed());
        CHECK_FALSE(check_certificate(Generator::parse("y + z"), d).passed());
    }

    TEST_CASE("local Lipschitz and convexity in z") {
        AssumptionCertificate c{LocalLipschitzZ{WeightFn::constant(1.0, Integrability::L2)}};
        CHECK(check_certificate(Generator::parse("z^2/2 + z - y"), c).passed());
        CHECK_FALSE(check_certificate(Generator::parse("abs(z)^3"), c).passed());
        CHECK(check_certificate(Generator::parse("z^2 + y"), AssumptionCertificate{ConvexityZ{true}}).passed());
        CHECK(check_certificate(Generator::parse("-z^2"), AssumptionCertificate{ConvexityZ{false}}).passed());
        CHECK_FALSE(check_certificate(Generator::parse("sin(z)"), AssumptionCertificate{ConvexityZ{true}}).passed());
    }

    TEST_CASE("broken witnesses fail the report") {
        AssumptionCertificate bad_rho{OneSidedOsgoodY{WeightFn(), expr::parse_univariate("1 + x"), 2.0}};
        CHECK_FALSE(check_certificate(Generator::parse("y"), bad_rho).passed());
        AssumptionCertificate bad_l{OneSidedSuperLinear{WeightFn(), expr::parse_univariate("x"),
                                                        expr::parse_univariate("1")}};
        CHECK_FALSE(check_certificate(Generator::parse("-y"), bad_l).passed());
    }

    TEST_CASE("kind names") {
        CHECK(AssumptionCertificate{ConvexityZ{}}.kind() == "convexity_z");
        CHECK(AssumptionCertificate{OneSidedLinear{}}.kind() == "one_sided_linear");
        CHECK(side_from_string("upper") == Side::upper);
        CHECK_THROWS_AS(side_from_string("sideways"), InvalidArgument);
    }
}
