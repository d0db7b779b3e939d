#include "bsdelab/functions.hpp"

#include <cmath>
#include <string>

#include "bsdelab/certificate.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/quadrature.hpp"

namespace bsde {

const expr::VariableSet& terminal_variables() {
    static const expr::VariableSet vars{"w"};
    return vars;
}

const expr::VariableSet& time_variables() {
    static const expr::VariableSet vars{"t"};
    return vars;
}

std::string_view to_string(Integrability c) noexcept {
    switch (c) {
        case Integrability::L1: return "L1";
        case Integrability::L2: return "L2";
        case Integrability::L1L2: return "L1L2";
        case Integrability::Lq: return "Lq";
    }
    return "L1";
}

Integrability integrability_from_string(std::string_view s) {
    if (s == "L1") return Integrability::L1;
    if (s == "L2") return Integrability::L2;
    if (s == "L1L2" || s == "L1&L2") return Integrability::L1L2;
    if (s == "Lq") return Integrability::Lq;
    throw InvalidArgument("unknown integrability class '" + std::string(s) + "'");
}

// --- WeightFn ----------------------------------------------------------------

WeightFn::WeightFn() : WeightFn(expr::Expression::constant(1.0, time_variables()), Integrability::L1) {}

WeightFn::WeightFn(expr::Expression e, Integrability cls, double alpha)
    : expr_(std::move(e)), class_(cls), alpha_(alpha) {
    if (expr_.arity() != 1) throw InvalidArgument("weight function must depend on t alone");
    if (cls == Integrability::Lq && !(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("Lq weight needs alpha in (0, 1)");
    }
}

WeightFn WeightFn::parse(std::string_view source, Integrability cls, double alpha) {
    return WeightFn(expr::parse(source, time_variables()), cls, alpha);
}

WeightFn WeightFn::constant(double c, Integrability cls) {
    return WeightFn(expr::Expression::constant(c, time_variables()), cls);
}

VerificationReport WeightFn::check(double horizon, int samples) const {
    VerificationReport rep;
    rep.name = "weight " + expr_.to_string();
    rep.reference = "nonnegative weight with declared integrability";
    rep.tolerance = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = horizon * i / (samples - 1);
        const double v = (*this)(t);
        rep.observe_with(-v, [&] { return "t=" + std::to_string(t); });
    }
    if (rep.worst_violation > 0.0) {
        rep.notes.push_back("weight takes negative values");
        rep.settle();
        return rep;
    }

    auto converged = [&](auto&& f, const char* label) {
        const double coarse = quad::integrate(f, 0.0, horizon, 64);
        const double fine = quad::integrate(f, 0.0, horizon, 128);
        const bool ok = std::isfinite(fine) && std::fabs(fine) < 1e300 &&
                        std::fabs(fine - coarse) <= 0.01 * std::fabs(fine);
        rep.notes.push_back(std::string(label) + " integral " + std::to_string(fine) +
                            (ok ? "" : " (not converged)"));
        if (!ok) rep.observe(1.0, std::string(label) + " integral");
    };
    auto p1 = [&](double t) { return (*this)(t); };
    auto p2 = [&](double t) {
        const double v = (*this)(t);
        return v * v;
    };
    auto pq = [&](double t) { return std::pow((*this)(t), 2.0 / (2.0 - alpha_)); };
    switch (class_) {
        case Integrability::L1: converged(p1, "L1"); break;
        case Integrability::L2: converged(p2, "L2"); break;
        case Integrability::L1L2:
            converged(p1, "L1");
            converged(p2, "L2");
            break;
        case Integrability::Lq: converged(pq, "Lq"); break;
    }
    rep.settle();
    return rep;
}

// --- Generator ---------------------------------------------------------------

Generator::Generator() = default;

Generator::Generator(expr::Expression e) : expr_(std::move(e)) {
    if (expr_.variables() != expr::generator_variables()) {
        throw InvalidArgument("generator must be an expression over (t, y, z)");
    }
}

Generator::Generator(expr::Expression e, AssumptionCertificate cert) : Generator(std::move(e)) {
    cert_ = std::make_unique<AssumptionCertificate>(std::move(cert));
}

Generator::~Generator() = default;

Generator::Generator(const Generator& other)
    : expr_(other.expr_),
      cert_(other.cert_ ? std::make_unique<AssumptionCertificate>(*other.cert_) : nullptr) {}

Generator& Generator::operator=(const Generator& other) {
    if (this != &other) {
        expr_ = other.expr_;
        cert_ = other.cert_ ? std::make_unique<AssumptionCertificate>(*other.cert_) : nullptr;
    }
    return *this;
}

Generator::Generator(Generator&&) noexcept = default;
Generator& Generator::operator=(Generator&&) noexcept = default;

Generator Generator::parse(std::string_view source) { return Generator(expr::parse(source)); }

void Generator::set_certificate(AssumptionCertificate cert) {
    cert_ = std::make_unique<AssumptionCertificate>(std::move(cert));
}

Generator dual_generator(const Generator& g) {
    const auto& vars = expr::generator_variables();
    const auto neg_y = -expr::Expression::variable(1, vars);
    const auto neg_z = -expr::Expression::variable(2, vars);
    return Generator(-g.expression().substitute(1, neg_y).substitute(2, neg_z));
}

Generator truncate_generator(const Generator& g, double K) {
    if (!(K > 0.0) || !std::isfinite(K)) throw InvalidArgument("truncation level must be positive");
    const auto& vars = expr::generator_variables();
    const auto y = expr::Expression::variable(1, vars);
    const auto clamped = expr::apply(expr::Op::Clamp, y, expr::Expression::constant(-K, vars),
                                     expr::Expression::constant(K, vars));
    return Generator(g.expression().substitute(1, clamped));
}

// --- TerminalCondition ---------------------------------------------------------

TerminalCondition::TerminalCondition()
    : phi_(expr::Expression::constant(0.0, terminal_variables())) {}

TerminalCondition::TerminalCondition(expr::Expression phi, std::optional<double> bound)
    : phi_(std::move(phi)), bound_(bound) {
    if (phi_.variables() != terminal_variables()) {
        throw InvalidArgument("terminal condition must be an expression in w");
    }
    if (bound_ && !(*bound_ >= 0.0)) throw InvalidArgument("terminal bound must be nonnegative");
}

TerminalCondition TerminalCondition::parse(std::string_view source, std::optional<double> bound) {
    return TerminalCondition(expr::parse(source, terminal_variables()), bound);
}

TerminalCondition TerminalCondition::capped_above(double n) const {
    const auto cap = expr::Expression::constant(n, terminal_variables());
    std::optional<double> b;
    if (bound_) b = *bound_;
    return TerminalCondition(expr::apply(expr::Op::Min, phi_, cap), b);
}

VerificationReport TerminalCondition::check_bound(double range, int samples) const {
    VerificationReport rep;
    rep.name = "terminal bound " + phi_.to_string();
    rep.reference = "declared sup-norm bound of the terminal condition";
    if (!bound_) {
        rep.status = Status::inconclusive;
        rep.notes.push_back("no bound declared");
        return rep;
    }
    for (int i = 0; i < samples; ++i) {
        const double w = -range + 2.0 * range * i / (samples - 1);
        rep.observe_with(std::fabs(phi_(w)) - *bound_, [&] { return "w=" + std::to_string(w); });
    }
    rep.settle();
    return rep;
}

}  // namespace bsde
