#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "bsdelab/expr.hpp"
#include "bsdelab/report.hpp"

namespace bsde {

/// Integrability class declared for a weight function.
enum class Integrability {
    L1,
    L2,
    L1L2,  // L1 and L2
    Lq,    // power 2/(2 - alpha) integrable, 0 < alpha < 1
};

std::string_view to_string(Integrability c) noexcept;
Integrability integrability_from_string(std::string_view s);

/// Nonnegative deterministic weight u(t), v(t), lambda(t), ... on [0, T].
class WeightFn {
public:
    WeightFn();  // u == 1, L1
    WeightFn(expr::Expression e, Integrability cls, double alpha = 0.5);

    static WeightFn parse(std::string_view source, Integrability cls = Integrability::L1,
                          double alpha = 0.5);
    static WeightFn constant(double c, Integrability cls = Integrability::L1);

    double operator()(double t) const { return expr_(t); }

    const expr::Expression& expression() const noexcept { return expr_; }
    Integrability integrability() const noexcept { return class_; }
    double alpha() const noexcept { return alpha_; }

    /// Samples nonnegativity on [0, T] and checks that the integral(s) the
    /// declared class requires stay finite and move by less than 1% under
    /// grid refinement.
    VerificationReport check(double horizon, int samples = 201) const;

private:
    expr::Expression expr_;
    Integrability class_ = Integrability::L1;
    double alpha_ = 0.5;
};

/// Scalar function of one variable (rho, phi, l, h, ...).
using Univariate = expr::Expression;

struct AssumptionCertificate;

/// A generator g(t, y, z) with an optional certificate of the growth or
/// continuity conditions it claims.
class Generator {
public:
    Generator();
    explicit Generator(expr::Expression e);
    Generator(expr::Expression e, AssumptionCertificate cert);
    ~Generator();
    Generator(const Generator&);
    Generator& operator=(const Generator&);
    Generator(Generator&&) noexcept;
    Generator& operator=(Generator&&) noexcept;

    static Generator parse(std::string_view source);

    double operator()(double t, double y, double z) const { return expr_.eval({t, y, z}); }

    const expr::Expression& expression() const noexcept { return expr_; }
    const AssumptionCertificate* certificate() const noexcept { return cert_.get(); }
    void set_certificate(AssumptionCertificate cert);

    std::string to_string() const { return expr_.to_string(); }

private:
    expr::Expression expr_;
    std::unique_ptr<AssumptionCertificate> cert_;
};

/// g~(t, y, z) = -g(t, -y, -z), built as an AST rewrite. The certificate is
/// not carried over.
Generator dual_generator(const Generator& g);

/// g_K(t, y, z) = g(t, clamp(y, -K, K), z).
Generator truncate_generator(const Generator& g, double K);

/// Terminal payoff xi = Phi(B_T), an expression in the variable `w`.
class TerminalCondition {
public:
    TerminalCondition();  // xi == 0
    explicit TerminalCondition(expr::Expression phi, std::optional<double> bound = std::nullopt);

    static TerminalCondition parse(std::string_view source,
                                   std::optional<double> bound = std::nullopt);

    double operator()(double w) const { return phi_(w); }

    const expr::Expression& expression() const noexcept { return phi_; }
    std::optional<double> bound() const noexcept { return bound_; }

    /// min(Phi, n), the monotone approximation used for unbounded data.
    TerminalCondition capped_above(double n) const;

    /// Checks |Phi(w)| <= bound on sampled w in [-range, range].
    VerificationReport check_bound(double range = 8.0, int samples = 2001) const;

    std::string to_string() const { return phi_.to_string(); }

private:
    expr::Expression phi_;
    std::optional<double> bound_;
};

const expr::VariableSet& terminal_variables();
const expr::VariableSet& time_variables();

}  // namespace bsde
