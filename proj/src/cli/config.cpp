#include "config.hpp"

#include <utility>

namespace bsde::cli {
namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <typename F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ConfigError(path, std::string(e.what()) + " at offset " + std::to_string(e.position()));
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
}

std::string expression_text(const json& j, const std::string& path) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return j.dump();
    if (j.is_object() && j.contains("expr")) return expression_text(j.at("expr"), join(path, "expr"));
    throw ConfigError(path, "expected an expression string");
}

Side parse_side(const json& j, const std::string& path) {
    const std::string s = get_string(j, "side", path, std::string("sign"));
    return guarded(join(path, "side"), [&] { return side_from_string(s); });
}

}  // namespace

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(join(path, key), "missing");
    return j.at(key);
}

double get_number(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
        if (fallback) return *fallback;
        throw ConfigError(join(path, key), "missing");
    }
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& path, std::optional<int> fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
        if (fallback) return *fallback;
        throw ConfigError(join(path, key), "missing");
    }
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
    return v.get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path,
                       std::optional<std::string> fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
        if (fallback) return *fallback;
        throw ConfigError(join(path, key), "missing");
    }
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    return v.get<std::string>();
}

verify::BackendConfig ModelConfig::backend_config(int threads) const {
    verify::BackendConfig cfg;
    cfg.backend = backend;
    cfg.horizon = horizon;
    cfg.steps = steps;
    cfg.options.scheme = scheme;
    cfg.options.z_cap = z_cap;
    cfg.options.threads = threads;
    cfg.mc.paths = paths;
    cfg.mc.basis_degree = basis_degree;
    cfg.mc.seed = seed;
    return cfg;
}

ModelConfig parse_model(const json& j, const std::string& path, ModelConfig m) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    m.horizon = get_number(j, "T", path, m.horizon);
    if (!(m.horizon > 0.0)) throw ConfigError(join(path, "T"), "must be positive");
    m.steps = get_int(j, "N", path, m.steps);
    if (m.steps < 1) throw ConfigError(join(path, "N"), "must be >= 1");
    if (j.contains("backend")) {
        const std::string s = get_string(j, "backend", path);
        m.backend = guarded(join(path, "backend"), [&] { return solver::backend_from_string(s); });
    }
    if (j.contains("scheme")) {
        const std::string s = get_string(j, "scheme", path);
        m.scheme = guarded(join(path, "scheme"), [&] { return solver::scheme_from_string(s); });
    }
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer()) throw ConfigError(join(path, "seed"), "expected an integer");
        m.seed = s.get<std::uint64_t>();
    }
    m.paths = static_cast<std::size_t>(get_int(j, "paths", path, static_cast<int>(m.paths)));
    m.basis_degree = get_int(j, "basis_degree", path, m.basis_degree);
    if (j.contains("z_cap") && !j.at("z_cap").is_null()) m.z_cap = get_number(j, "z_cap", path);
    return m;
}

Univariate parse_function(const json& j, const std::string& path) {
    const std::string src = expression_text(j, path);
    return guarded(path, [&] { return expr::parse_univariate(src); });
}

WeightFn parse_weight(const json& j, const std::string& path, Integrability default_class) {
    const std::string src = expression_text(j, path);
    Integrability cls = default_class;
    double alpha = 0.5;
    if (j.is_object()) {
        if (j.contains("class")) {
            const std::string c = get_string(j, "class", path);
            cls = guarded(join(path, "class"), [&] { return integrability_from_string(c); });
        }
        alpha = get_number(j, "alpha", path, alpha);
    }
    return guarded(path, [&] { return WeightFn::parse(src, cls, alpha); });
}

AssumptionCertificate parse_certificate(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    const std::string kind = get_string(j, "kind", path);
    auto weight = [&](const char* key, Integrability cls) {
        return parse_weight(require(j, key, path), join(path, key), cls);
    };
    auto fn = [&](const char* key) { return parse_function(require(j, key, path), join(path, key)); };
    auto alpha = [&] {
        const double a = get_number(j, "alpha", path);
        if (!(a > 0.0 && a < 1.0)) throw ConfigError(join(path, "alpha"), "must lie in (0, 1)");
        return a;
    };

    AssumptionCertificate cert;
    if (kind == "one_sided_osgood_y") {
        cert.condition = OneSidedOsgoodY{weight("u", Integrability::L1), fn("rho"), get_number(j, "rho_growth_k", path)};
    } else if (kind == "continuity_z") {
        cert.condition = ContinuityZ{weight("v", Integrability::L2), fn("phi"), get_number(j, "a", path),
                                     get_number(j, "b", path)};
    } else if (kind == "sub_linear_diff_z") {
        SubLinearDiffZ c{weight("lambda", Integrability::Lq), alpha(), std::nullopt};
        if (j.contains("f")) c.f = weight("f", Integrability::L1);
        cert.condition = std::move(c);
    } else if (kind == "one_sided_super_linear") {
        cert.condition = OneSidedSuperLinear{weight("u", Integrability::L1), fn("l"), fn("h")};
    } else if (kind == "quad_growth") {
        cert.condition = QuadGrowth{weight("u_bar", Integrability::L1), fn("phi_bar"), fn("h_bar")};
    } else if (kind == "local_lipschitz_z") {
        cert.condition = LocalLipschitzZ{weight("v", Integrability::L2)};
    } else if (kind == "convexity_z") {
        const json& c = require(j, "convex", path);
        if (!c.is_boolean()) throw ConfigError(join(path, "convex"), "expected true or false");
        cert.condition = ConvexityZ{c.get<bool>()};
    } else if (kind == "one_sided_linear") {
        cert.condition = OneSidedLinear{weight("f", Integrability::L1), weight("u", Integrability::L1),
                                        weight("v", Integrability::L2), parse_side(j, path)};
    } else if (kind == "mixed_sub_linear") {
        cert.condition = MixedSubLinear{weight("f", Integrability::L1), weight("u", Integrability::L1),
                                        weight("v", Integrability::L2), weight("lambda", Integrability::Lq),
                                        alpha(), parse_side(j, path)};
    } else {
        throw ConfigError(join(path, "kind"), "unknown certificate kind '" + kind + "'");
    }
    return cert;
}

Generator parse_generator(const json& j, const std::string& path) {
    const std::string src = expression_text(j, path);
    Generator g = guarded(join(path, "expr"), [&] { return Generator::parse(src); });
    if (j.is_object() && j.contains("certificate") && !j.at("certificate").is_null()) {
        g.set_certificate(parse_certificate(j.at("certificate"), join(path, "certificate")));
    }
    return g;
}

TerminalCondition parse_terminal(const json& j, const std::string& path) {
    const std::string src = expression_text(j, path);
    std::optional<double> bound;
    if (j.is_object() && j.contains("bound") && !j.at("bound").is_null()) bound = get_number(j, "bound", path);
    return guarded(join(path, "expr"), [&] { return TerminalCondition::parse(src, bound); });
}

Range parse_range(const json& j, const std::string& path) {
    Range r;
    if (j.is_number()) {
        r.from = r.to = j.get<double>();
        r.points = 1;
        return r;
    }
    r.from = get_number(j, "from", path);
    r.to = get_number(j, "to", path);
    r.points = get_int(j, "points", path, 11);
    if (r.points < 1) throw ConfigError(join(path, "points"), "must be >= 1");
    return r;
}

Problem parse_problem(const json& root) {
    Problem p;
    p.model = parse_model(require(root, "model", ""), "model");
    p.generator = parse_generator(require(root, "generator", ""), "generator");
    p.terminal = parse_terminal(require(root, "terminal", ""), "terminal");
    return p;
}

Problem problem_for(const Problem& base, const json& overrides, const std::string& path) {
    Problem p = base;
    if (overrides.contains("model")) p.model = parse_model(overrides.at("model"), join(path, "model"), base.model);
    if (overrides.contains("generator")) p.generator = parse_generator(overrides.at("generator"), join(path, "generator"));
    if (overrides.contains("terminal")) p.terminal = parse_terminal(overrides.at("terminal"), join(path, "terminal"));
    return p;
}

}  // namespace bsde::cli
