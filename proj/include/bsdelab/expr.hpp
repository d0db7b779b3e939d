#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bsde::expr {

enum class Op : std::uint8_t {
    Const,
    Var,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Abs,
    Sign,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Min,
    Max,
    Clamp,
};

/// One AST node. Children always precede their parent in the node array,
/// so a single forward sweep evaluates the whole tree.
struct Node {
    Op op = Op::Const;
    double value = 0.0;      // Const only
    std::uint8_t slot = 0;   // Var only
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t c = -1;
};

/// Ordered list of variable names. An expression's Var nodes index into it.
using VariableSet = std::vector<std::string>;

/// Variables of generators.
const VariableSet& generator_variables();

/// Immutable scalar expression over a fixed variable set.
///
/// Copies share the node storage. Evaluation is pure and reentrant; any
/// non-finite intermediate result raises DomainError naming the offending
/// sub-expression, so a returned value is always finite.
class Expression {
public:
    /// The constant zero over generator variables.
    Expression();

    static Expression constant(double value, VariableSet vars = generator_variables());
    static Expression variable(std::size_t slot, VariableSet vars);

    double eval(std::span<const double> args) const;
    double eval(std::initializer_list<double> args) const {
        return eval(std::span<const double>(args.begin(), args.size()));
    }

    /// Evaluate a one-variable expression.
    double operator()(double x) const { return eval(std::span<const double>(&x, 1)); }

    const VariableSet& variables() const noexcept { return *vars_; }
    std::size_t arity() const noexcept { return vars_->size(); }

    /// Precedence-aware text; parse(to_string()) evaluates identically.
    std::string to_string() const;

    /// True when some Var node refers to the given slot.
    bool depends_on(std::size_t slot) const;

    bool is_constant() const noexcept { return root().op == Op::Const; }

    const std::vector<Node>& nodes() const noexcept { return *nodes_; }
    std::int32_t root_index() const noexcept {
        return static_cast<std::int32_t>(nodes_->size()) - 1;
    }

    /// Same tree rebound to another variable set of equal arity.
    Expression with_variables(VariableSet vars) const;

    // Builders used by the parser and the rewrites. All fold constants.
    friend Expression operator-(const Expression& x);
    friend Expression operator+(const Expression& l, const Expression& r);
    friend Expression operator-(const Expression& l, const Expression& r);
    friend Expression operator*(const Expression& l, const Expression& r);
    friend Expression operator/(const Expression& l, const Expression& r);
    friend Expression pow(const Expression& base, const Expression& exponent);
    friend Expression apply(Op fn, const Expression& x);
    friend Expression apply(Op fn, const Expression& x, const Expression& y);
    friend Expression apply(Op fn, const Expression& x, const Expression& y, const Expression& z);

    /// Replace every occurrence of variable `slot` by `replacement`.
    Expression substitute(std::size_t slot, const Expression& replacement) const;

private:
    Expression(std::shared_ptr<const std::vector<Node>> nodes,
               std::shared_ptr<const VariableSet> vars);

    const Node& root() const noexcept { return nodes_->back(); }
    std::string subtree_string(std::int32_t index) const;

    static Expression combine(Op op, std::initializer_list<const Expression*> children);

    std::shared_ptr<const std::vector<Node>> nodes_;
    std::shared_ptr<const VariableSet> vars_;
};

Expression operator-(const Expression& x);
Expression operator+(const Expression& l, const Expression& r);
Expression operator-(const Expression& l, const Expression& r);
Expression operator*(const Expression& l, const Expression& r);
Expression operator/(const Expression& l, const Expression& r);
Expression pow(const Expression& base, const Expression& exponent);
Expression apply(Op fn, const Expression& x);
Expression apply(Op fn, const Expression& x, const Expression& y);
Expression apply(Op fn, const Expression& x, const Expression& y, const Expression& z);

/// Parse `source` over the given variables. Precedence, tightest first:
/// `^` (right-associative), unary minus, `* /`, `+ -`. Functions: abs, sign,
/// sin, cos, exp, ln, sqrt, min(a,b), max(a,b), clamp(x,lo,hi); constant `pi`.
Expression parse(std::string_view source, const VariableSet& vars = generator_variables());

/// Parse a one-variable function. Any single identifier among
/// x, y, z, u, s, t, w is accepted as the free variable.
Expression parse_univariate(std::string_view source);

}  // namespace bsde::expr
