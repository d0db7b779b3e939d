#include "bsdelab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "bsdelab/errors.hpp"

namespace bsde {

ParseError::ParseError(const std::string& message, std::size_t position,
                       std::vector<std::string> expected)
    : Error(message + " at position " + std::to_string(position)),
      position_(position),
      expected_(std::move(expected)) {}

DomainError::DomainError(const std::string& message, std::string subexpression)
    : Error(message + " in '" + subexpression + "'"),
      subexpression_(std::move(subexpression)) {}

BlowUpError::BlowUpError(double time, double value)
    : Error("backward ODE blew up at t = " + std::to_string(time) +
            " (value " + std::to_string(value) + ")"),
      time_(time),
      value_(value) {}

}  // namespace bsde

namespace bsde::expr {
namespace {

int child_count(Op op) {
    switch (op) {
        case Op::Const:
        case Op::Var:
            return 0;
        case Op::Neg:
        case Op::Abs:
        case Op::Sign:
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Ln:
        case Op::Sqrt:
            return 1;
        case Op::Clamp:
            return 3;
        default:
            return 2;
    }
}

const char* function_name(Op op) {
    switch (op) {
        case Op::Abs: return "abs";
        case Op::Sign: return "sign";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Exp: return "exp";
        case Op::Ln: return "ln";
        case Op::Sqrt: return "sqrt";
        case Op::Min: return "min";
        case Op::Max: return "max";
        case Op::Clamp: return "clamp";
        default: return nullptr;
    }
}

std::optional<Op> function_from_name(std::string_view name) {
    static constexpr Op fns[] = {Op::Abs, Op::Sign, Op::Sin, Op::Cos, Op::Exp,
                                 Op::Ln,  Op::Sqrt, Op::Min, Op::Max, Op::Clamp};
    for (Op f : fns) {
        if (name == function_name(f)) return f;
    }
    return std::nullopt;
}

// Applies one operation. On a domain violation returns NaN and sets `why`.
double compute(Op op, double a, double b, double c, const char*& why) {
    why = nullptr;
    double r = 0.0;
    switch (op) {
        case Op::Neg: r = -a; break;
        case Op::Add: r = a + b; break;
        case Op::Sub: r = a - b; break;
        case Op::Mul: r = a * b; break;
        case Op::Div:
            if (b == 0.0) {
                why = "division by zero";
                return std::nan("");
            }
            r = a / b;
            break;
        case Op::Pow:
            if (a < 0.0 && std::trunc(b) != b) {
                why = "non-integer power of a negative base";
                return std::nan("");
            }
            if (a == 0.0 && b < 0.0) {
                why = "negative power of zero";
                return std::nan("");
            }
            r = std::pow(a, b);
            break;
        case Op::Abs: r = std::fabs(a); break;
        case Op::Sign: r = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); break;
        case Op::Sin: r = std::sin(a); break;
        case Op::Cos: r = std::cos(a); break;
        case Op::Exp: r = std::exp(a); break;
        case Op::Ln:
            if (a <= 0.0) {
                why = "logarithm of a non-positive value";
                return std::nan("");
            }
            r = std::log(a);
            break;
        case Op::Sqrt:
            if (a < 0.0) {
                why = "square root of a negative value";
                return std::nan("");
            }
            r = std::sqrt(a);
            break;
        case Op::Min: r = std::min(a, b); break;
        case Op::Max: r = std::max(a, b); break;
        case Op::Clamp:
            if (b > c) {
                why = "clamp with lower bound above upper bound";
                return std::nan("");
            }
            r = std::clamp(a, b, c);
            break;
        case Op::Const:
        case Op::Var:
            break;
    }
    if (!std::isfinite(r)) {
        why = "non-finite result";
        return std::nan("");
    }
    return r;
}

// Precedence levels used by the printer.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Node& n) {
    switch (n.op) {
        case Op::Add:
        case Op::Sub:
            return kPrecAdd;
        case Op::Mul:
        case Op::Div:
            return kPrecMul;
        case Op::Neg:
            return kPrecUnary;
        case Op::Pow:
            return kPrecPow;
        case Op::Const:
            return n.value < 0.0 || std::signbit(n.value) ? kPrecUnary : kPrecAtom;
        default:
            return kPrecAtom;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print(const std::vector<Node>& nodes, const VariableSet& vars, std::int32_t i,
           std::string& out) {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    auto child = [&](std::int32_t c, int min_prec) {
        const bool parens = precedence(nodes[static_cast<std::size_t>(c)]) < min_prec;
        if (parens) out += '(';
        print(nodes, vars, c, out);
        if (parens) out += ')';
    };
    switch (n.op) {
        case Op::Const:
            out += format_number(n.value);
            return;
        case Op::Var:
            out += vars[n.slot];
            return;
        case Op::Neg:
            out += '-';
            child(n.a, kPrecPow);
            return;
        case Op::Add:
        case Op::Sub:
            child(n.a, kPrecAdd);
            out += n.op == Op::Add ? " + " : " - ";
            child(n.b, kPrecAdd + 1);
            return;
        case Op::Mul:
        case Op::Div:
            child(n.a, kPrecMul);
            out += n.op == Op::Mul ? " * " : " / ";
            child(n.b, kPrecMul + 1);
            return;
        case Op::Pow:
            child(n.a, kPrecAtom);
            out += '^';
            child(n.b, kPrecPow);
            return;
        default:
            break;
    }
    out += function_name(n.op);
    out += '(';
    print(nodes, vars, n.a, out);
    if (n.b >= 0) {
        out += ", ";
        print(nodes, vars, n.b, out);
    }
    if (n.c >= 0) {
        out += ", ";
        print(nodes, vars, n.c, out);
    }
    out += ')';
}

}  // namespace

const VariableSet& generator_variables() {
    static const VariableSet vars{"t", "y", "z"};
    return vars;
}

Expression::Expression() : Expression(constant(0.0)) {}

Expression::Expression(std::shared_ptr<const std::vector<Node>> nodes,
                       std::shared_ptr<const VariableSet> vars)
    : nodes_(std::move(nodes)), vars_(std::move(vars)) {}

Expression Expression::constant(double value, VariableSet vars) {
    if (!std::isfinite(value)) throw InvalidArgument("expression constant must be finite");
    Node n;
    n.op = Op::Const;
    n.value = value;
    return Expression(std::make_shared<const std::vector<Node>>(std::vector<Node>{n}),
                      std::make_shared<const VariableSet>(std::move(vars)));
}

Expression Expression::variable(std::size_t slot, VariableSet vars) {
    if (slot >= vars.size()) throw InvalidArgument("variable slot out of range");
    Node n;
    n.op = Op::Var;
    n.slot = static_cast<std::uint8_t>(slot);
    return Expression(std::make_shared<const std::vector<Node>>(std::vector<Node>{n}),
                      std::make_shared<const VariableSet>(std::move(vars)));
}

double Expression::eval(std::span<const double> args) const {
    const auto& nodes = *nodes_;
    if (args.size() < vars_->size()) {
        throw InvalidArgument("expression expects " + std::to_string(vars_->size()) +
                              " arguments, got " + std::to_string(args.size()));
    }
    thread_local std::vector<double> scratch;
    if (scratch.size() < nodes.size()) scratch.resize(nodes.size());
    double* v = scratch.data();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        if (n.op == Op::Const) {
            v[i] = n.value;
            continue;
        }
        if (n.op == Op::Var) {
            v[i] = args[n.slot];
            continue;
        }
        const double a = v[n.a];
        const double b = n.b >= 0 ? v[n.b] : 0.0;
        const double c = n.c >= 0 ? v[n.c] : 0.0;
        const char* why = nullptr;
        v[i] = compute(n.op, a, b, c, why);
        if (why != nullptr) throw DomainError(why, subtree_string(static_cast<std::int32_t>(i)));
    }
    return v[nodes.size() - 1];
}

std::string Expression::subtree_string(std::int32_t index) const {
    std::string out;
    print(*nodes_, *vars_, index, out);
    return out;
}

std::string Expression::to_string() const { return subtree_string(root_index()); }

bool Expression::depends_on(std::size_t slot) const {
    return std::any_of(nodes_->begin(), nodes_->end(),
                       [&](const Node& n) { return n.op == Op::Var && n.slot == slot; });
}

Expression Expression::with_variables(VariableSet vars) const {
    if (vars.size() != vars_->size()) throw InvalidArgument("variable set arity mismatch");
    return Expression(nodes_, std::make_shared<const VariableSet>(std::move(vars)));
}

Expression Expression::combine(Op op, std::initializer_list<const Expression*> children) {
    // Variable set comes from the first non-constant child; constants adapt.
    std::shared_ptr<const VariableSet> vars;
    for (const Expression* c : children) {
        if (c->is_constant()) continue;
        if (!vars) {
            vars = c->vars_;
        } else if (*vars != *c->vars_) {
            throw InvalidArgument("cannot combine expressions over different variables");
        }
    }
    if (!vars) vars = (*children.begin())->vars_;

    double vals[3] = {0.0, 0.0, 0.0};
    bool all_const = true;
    std::size_t k = 0;
    for (const Expression* c : children) {
        all_const = all_const && c->is_constant();
        vals[k++] = c->root().value;
    }
    if (all_const) {
        const char* why = nullptr;
        const double r = compute(op, vals[0], vals[1], vals[2], why);
        if (why == nullptr) {
            Node n;
            n.value = r;
            return Expression(std::make_shared<const std::vector<Node>>(std::vector<Node>{n}), vars);
        }
    }

    std::vector<Node> nodes;
    std::size_t total = 1;
    for (const Expression* c : children) total += c->nodes_->size();
    nodes.reserve(total);
    std::int32_t idx[3] = {-1, -1, -1};
    k = 0;
    for (const Expression* c : children) {
        const auto offset = static_cast<std::int32_t>(nodes.size());
        for (Node n : *c->nodes_) {
            if (n.a >= 0) n.a += offset;
            if (n.b >= 0) n.b += offset;
            if (n.c >= 0) n.c += offset;
            nodes.push_back(n);
        }
        idx[k++] = static_cast<std::int32_t>(nodes.size()) - 1;
    }
    Node parent;
    parent.op = op;
    parent.a = idx[0];
    parent.b = idx[1];
    parent.c = idx[2];
    nodes.push_back(parent);
    return Expression(std::make_shared<const std::vector<Node>>(std::move(nodes)), vars);
}

Expression operator-(const Expression& x) { return Expression::combine(Op::Neg, {&x}); }
Expression operator+(const Expression& l, const Expression& r) {
    return Expression::combine(Op::Add, {&l, &r});
}
Expression operator-(const Expression& l, const Expression& r) {
    return Expression::combine(Op::Sub, {&l, &r});
}
Expression operator*(const Expression& l, const Expression& r) {
    return Expression::combine(Op::Mul, {&l, &r});
}
Expression operator/(const Expression& l, const Expression& r) {
    return Expression::combine(Op::Div, {&l, &r});
}
Expression pow(const Expression& base, const Expression& exponent) {
    return Expression::combine(Op::Pow, {&base, &exponent});
}
Expression apply(Op fn, const Expression& x) {
    if (child_count(fn) != 1) throw InvalidArgument("function expects one argument");
    return Expression::combine(fn, {&x});
}
Expression apply(Op fn, const Expression& x, const Expression& y) {
    if (child_count(fn) != 2 || function_name(fn) == nullptr) {
        throw InvalidArgument("function expects two arguments");
    }
    return Expression::combine(fn, {&x, &y});
}
Expression apply(Op fn, const Expression& x, const Expression& y, const Expression& z) {
    if (fn != Op::Clamp) throw InvalidArgument("function expects three arguments");
    return Expression::combine(fn, {&x, &y, &z});
}

Expression Expression::substitute(std::size_t slot, const Expression& replacement) const {
    const auto& nodes = *nodes_;
    std::vector<Expression> built;
    built.reserve(nodes.size());
    for (const Node& n : nodes) {
        switch (n.op) {
            case Op::Const:
                built.push_back(constant(n.value, *vars_));
                break;
            case Op::Var:
                built.push_back(n.slot == slot ? replacement : variable(n.slot, *vars_));
                break;
            default: {
                const auto& a = built[static_cast<std::size_t>(n.a)];
                if (n.c >= 0) {
                    built.push_back(combine(n.op, {&a, &built[static_cast<std::size_t>(n.b)],
                                                   &built[static_cast<std::size_t>(n.c)]}));
                } else if (n.b >= 0) {
                    built.push_back(combine(n.op, {&a, &built[static_cast<std::size_t>(n.b)]}));
                } else {
                    built.push_back(combine(n.op, {&a}));
                }
            }
        }
    }
    Expression out = built.back();
    // Keep the original variable set when the rewrite folded to a constant.
    if (out.is_constant()) return constant(out.root().value, *vars_);
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string_view text;
    double number = 0.0;
};

class Parser {
public:
    Parser(std::string_view src, const VariableSet& vars) : src_(src), vars_(vars) { advance(); }

    Expression parse_all() {
        Expression e = parse_sum();
        if (tok_.kind != Tok::End) {
            fail("unexpected token '" + std::string(tok_.text) + "'",
                 {"+", "-", "*", "/", "^", "end of input"});
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        throw ParseError(msg, tok_.pos, std::move(expected));
    }

    // Typographic operators accepted as aliases: U+2212 minus, U+00B7 middle
    // dot and U+00D7 multiplication sign.
    bool match_utf8(std::string_view seq, Tok kind) {
        if (src_.substr(pos_, seq.size()) != seq) return false;
        tok_ = {kind, pos_, src_.substr(pos_, seq.size())};
        pos_ += seq.size();
        return true;
    }

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ >= src_.size()) {
            tok_ = {Tok::End, pos_, {}};
            return;
        }
        const char ch = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
                ++pos_;
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t p = pos_ + 1;
                if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
                if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                    pos_ = p;
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                        ++pos_;
                    }
                }
            }
            tok_ = {Tok::Number, start, src_.substr(start, pos_ - start)};
            const auto* first = src_.data() + start;
            const auto* last = src_.data() + pos_;
            auto [ptr, ec] = std::from_chars(first, last, tok_.number);
            if (ec != std::errc() || ptr != last || !std::isfinite(tok_.number)) {
                fail("malformed number '" + std::string(tok_.text) + "'", {"number"});
            }
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
            tok_ = {Tok::Ident, start, src_.substr(start, pos_ - start)};
            return;
        }
        if (match_utf8("\xE2\x88\x92", Tok::Minus) || match_utf8("\xC2\xB7", Tok::Star) ||
            match_utf8("\xC3\x97", Tok::Star)) {
            return;
        }
        Tok kind;
        switch (ch) {
            case '+': kind = Tok::Plus; break;
            case '-': kind = Tok::Minus; break;
            case '*': kind = Tok::Star; break;
            case '/': kind = Tok::Slash; break;
            case '^': kind = Tok::Caret; break;
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case ',': kind = Tok::Comma; break;
            default:
                tok_ = {Tok::End, pos_, src_.substr(pos_, 1)};
                fail("unexpected character '" + std::string(1, ch) + "'",
                     {"number", "identifier", "(", "-"});
        }
        tok_ = {kind, pos_, src_.substr(pos_, 1)};
        ++pos_;
    }

    void expect(Tok kind, const char* spelled) {
        if (tok_.kind != kind) {
            fail(std::string("expected '") + spelled + "'", {spelled});
        }
        advance();
    }

    Expression parse_sum() {
        Expression lhs = parse_product();
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            const bool add = tok_.kind == Tok::Plus;
            advance();
            Expression rhs = parse_product();
            lhs = add ? lhs + rhs : lhs - rhs;
        }
        return lhs;
    }

    Expression parse_product() {
        Expression lhs = parse_unary();
        while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
            const bool mul = tok_.kind == Tok::Star;
            advance();
            Expression rhs = parse_unary();
            lhs = mul ? lhs * rhs : lhs / rhs;
        }
        return lhs;
    }

    Expression parse_unary() {
        if (tok_.kind == Tok::Minus) {
            advance();
            return -parse_unary();
        }
        if (tok_.kind == Tok::Plus) {
            advance();
            return parse_unary();
        }
        return parse_power();
    }

    Expression parse_power() {
        Expression base = parse_primary();
        if (tok_.kind == Tok::Caret) {
            advance();
            Expression exponent = parse_unary();
            return pow(base, exponent);
        }
        return base;
    }

    Expression parse_primary() {
        switch (tok_.kind) {
            case Tok::Number: {
                const double v = tok_.number;
                advance();
                return Expression::constant(v, vars_);
            }
            case Tok::LParen: {
                advance();
                Expression e = parse_sum();
                expect(Tok::RParen, ")");
                return e;
            }
            case Tok::Ident:
                return parse_identifier();
            default:
                fail(tok_.kind == Tok::End ? "unexpected end of input" : "unexpected token '" +
                                                                             std::string(tok_.text) + "'",
                     {"number", "identifier", "(", "-"});
        }
    }

    Expression parse_identifier() {
        const Token ident = tok_;
        advance();
        if (auto fn = function_from_name(ident.text)) {
            expect(Tok::LParen, "(");
            std::vector<Expression> args;
            args.push_back(parse_sum());
            while (tok_.kind == Tok::Comma) {
                advance();
                args.push_back(parse_sum());
            }
            expect(Tok::RParen, ")");
            const int want = child_count(*fn);
            if (static_cast<int>(args.size()) != want) {
                throw ParseError(std::string(ident.text) + " expects " + std::to_string(want) +
                                     " argument(s), got " + std::to_string(args.size()),
                                 ident.pos, {std::to_string(want) + " argument(s)"});
            }
            if (want == 1) return apply(*fn, args[0]);
            if (want == 2) return apply(*fn, args[0], args[1]);
            return apply(*fn, args[0], args[1], args[2]);
        }
        for (std::size_t s = 0; s < vars_.size(); ++s) {
            if (ident.text == vars_[s]) return Expression::variable(s, vars_);
        }
        if (ident.text == "pi") return Expression::constant(std::numbers::pi, vars_);
        std::vector<std::string> expected(vars_.begin(), vars_.end());
        expected.emplace_back("pi");
        throw ParseError("unknown identifier '" + std::string(ident.text) + "'", ident.pos,
                         std::move(expected));
    }

    std::string_view src_;
    const VariableSet& vars_;
    std::size_t pos_ = 0;
    Token tok_{Tok::End, 0, {}};
};

}  // namespace

Expression parse(std::string_view source, const VariableSet& vars) {
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw ParseError("empty expression", 0, {"expression"});
    }
    return Parser(source, vars).parse_all();
}

Expression parse_univariate(std::string_view source) {
    static const std::vector<std::string> candidates{"x", "y", "z", "u", "s", "t", "w"};
    // Parsing over a single name succeeds only when every identifier is that
    // name, a function or `pi`.
    for (const auto& name : candidates) {
        try {
            return parse(source, VariableSet{name}).with_variables(VariableSet{"x"});
        } catch (const ParseError&) {
        }
    }
    return parse(source, VariableSet{"x"});
}

}  // namespace bsde::expr
