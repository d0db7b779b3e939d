#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bsdelab/envelopes.hpp"
#include "bsdelab/norms.hpp"
#include "bsdelab/ode_bounds.hpp"
#include "config.hpp"

namespace bsde::cli {
namespace {

namespace fs = std::filesystem;

struct RunOptions {
    std::string subcommand;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::optional<double> tol;
    bool quiet = false;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Accumulates CSV text and writes it atomically (temp file, then rename).
class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) {
        bool first = true;
        for (const auto& h : header) {
            text_ += (first ? "" : ",") + h;
            first = false;
        }
        text_ += '\n';
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((text_ += (first ? "" : ",") + cell(cells), first = false), ...);
        text_ += '\n';
    }

    const std::string& text() const noexcept { return text_; }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return quoted(s); }
    static std::string cell(const char* s) { return quoted(s); }

    std::string text_;
};

class Session {
public:
    Session(RunOptions opts, json config, std::ostream& out)
        : opts_(std::move(opts)), config_(std::move(config)), out_(out) {}

    int execute();

private:
    void write(const std::string& name, const std::string& text);
    void say(const std::string& line) {
        if (!opts_.quiet) out_ << line << '\n';
    }

    void run_solve(const Problem& p);
    void run_bounds(const Problem& p);
    void run_envelope(const Problem& p);
    bool run_checks(const Problem& p);
    bool run_check(const Problem& base, const json& c, std::size_t index, json& records);
    void write_manifest();

    RunOptions opts_;
    json config_;
    std::ostream& out_;
    std::vector<std::pair<std::string, std::uint64_t>> artifacts_;
};

void Session::write(const std::string& name, const std::string& text) {
    fs::create_directories(opts_.out);
    const fs::path target = fs::path(opts_.out) / name;
    const fs::path tmp = fs::path(opts_.out) / (name + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << text;
        if (!f.flush()) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
    artifacts_.emplace_back(name, fnv1a(text));
}

void Session::run_solve(const Problem& p) {
    const auto sol = verify::solve(p.generator, p.terminal, p.model.backend_config(opts_.threads));
    Csv csv{"t", "y_mean", "y_min", "y_max", "z_mean"};
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
        const auto [lo, hi] = std::minmax_element(sol.y[i].begin(), sol.y[i].end());
        csv.row(sol.grid[i], sol.mean_y(i), *lo, *hi, i < sol.z.size() ? sol.mean_z(i) : std::nan(""));
    }
    write("solve.csv", csv.text());
    std::string line = "solve: y0 = " + num(sol.y0());
    if (sol.backend == solver::Backend::mc_regression) line += " (stderr " + num(sol.diag.y0_stderr) + ")";
    if (!sol.diag.conforming()) line += " [non-conforming: z clamped]";
    say(line);
}

ode::BoundEnvelope envelope_for(const Problem& p, const json& root) {
    const TimeGrid grid(p.model.horizon, p.model.steps);
    if (root.contains("bounds")) {
        const json& b = root.at("bounds");
        const double xi_bound = get_number(b, "xi_bound", "bounds");
        const WeightFn u = parse_weight(require(b, "u", "bounds"), "bounds.u");
        const Univariate l = parse_function(require(b, "l", "bounds"), "bounds.l");
        return ode::sandwich_envelope(xi_bound, u, l, grid);
    }
    try {
        return verify::envelope_from_certificate(p.generator, p.terminal, grid);
    } catch (const InvalidArgument& e) {
        throw ConfigError("bounds", e.what());
    }
}

void Session::run_bounds(const Problem& p) {
    const auto env = envelope_for(p, config_);
    Csv csv{"t", "L", "U"};
    for (std::size_t i = 0; i < env.L.size(); ++i) csv.row(env.grid[i], env.L[i], env.U[i]);
    write("bounds.csv", csv.text());
    say("bounds: L0 = " + num(env.L[0]) + ", U0 = " + num(env.U[0]));
}

void Session::run_envelope(const Problem& base) {
    const json& e = require(config_, "envelope", "");
    const std::string kind = get_string(e, "kind", "envelope");
    env::EnvelopeGrid grid;
    grid.nodes = get_int(e, "nodes", "envelope", grid.nodes);
    grid.radius = get_number(e, "radius", "envelope", grid.radius);
    Csv csv{"x", "value"};
    if (kind == "lipschitz") {
        const Univariate psi = parse_function(require(e, "psi", "envelope"), "envelope.psi");
        const double K = get_number(e, "K", "envelope");
        const double k = get_number(e, "growth_slope", "envelope");
        const Range xs = parse_range(require(e, "x", "envelope"), "envelope.x");
        std::optional<env::LipschitzEnvelope> env;
        try {
            env.emplace(psi, K, k, grid);
        } catch (const InvalidArgument& ex) {
            throw ConfigError("envelope", ex.what());
        }
        for (int i = 0; i < xs.points; ++i) csv.row(xs.at(i), (*env)(xs.at(i)));
    } else if (kind == "sup_convolution") {
        const Problem p = problem_for(base, e, "envelope");
        const int n = get_int(e, "n", "envelope");
        const WeightFn u_w = parse_weight(require(e, "u_w", "envelope"), "envelope.u_w");
        const WeightFn v_w = parse_weight(require(e, "v_w", "envelope"), "envelope.v_w", Integrability::L2);
        std::optional<env::SupConvolution> sc;
        try {
            if (e.contains("lambda_w")) {
                const WeightFn lw = parse_weight(e.at("lambda_w"), "envelope.lambda_w", Integrability::Lq);
                sc.emplace(env::sup_convolution_generator_alpha(p.generator, n, u_w, v_w, lw,
                                                                get_number(e, "alpha", "envelope"), grid));
            } else {
                sc.emplace(env::sup_convolution_generator(p.generator, n, u_w, v_w, grid));
            }
        } catch (const InvalidArgument& ex) {
            throw ConfigError("envelope", ex.what());
        }
        const std::string over = get_string(e, "over", "envelope", std::string("y"));
        if (over != "y" && over != "z") throw ConfigError("envelope.over", "expected y or z");
        const double t = get_number(e, "t", "envelope", 0.0);
        const double fixed = get_number(e, over == "y" ? "z" : "y", "envelope", 0.0);
        const Range xs = parse_range(require(e, "points", "envelope"), "envelope.points");
        for (int i = 0; i < xs.points; ++i) {
            const double x = xs.at(i);
            csv.row(x, over == "y" ? (*sc)(t, x, fixed) : (*sc)(t, fixed, x));
        }
    } else {
        throw ConfigError("envelope.kind", "unknown envelope kind '" + kind + "'");
    }
    write("envelope.csv", csv.text());
    say("envelope: " + kind + " written");
}

bool Session::run_check(const Problem& base, const json& c, std::size_t index, json& records) {
    const std::string path = "checks[" + std::to_string(index) + "]";
    if (!c.is_object()) throw ConfigError(path, "expected an object");
    const std::string type = get_string(c, "type", path);
    const Problem p = problem_for(base, c, path);
    auto tol_or = [&](double fallback) { return opts_.tol ? *opts_.tol : get_number(c, "tol", path, fallback); };
    const auto cfg = p.model.backend_config(opts_.threads);

    auto prime_problem = [&] {
        Problem q = p;
        if (c.contains("generator_prime")) q.generator = parse_generator(c.at("generator_prime"), path + ".generator_prime");
        if (c.contains("terminal_prime")) q.terminal = parse_terminal(c.at("terminal_prime"), path + ".terminal_prime");
        return q;
    };

    std::vector<VerificationReport> reports;
    if (type == "closed_form") {
        const double expected = get_number(c, "expected", path);
        const auto sol = verify::solve(p.generator, p.terminal, cfg);
        VerificationReport r;
        r.name = "closed-form";
        r.reference = "y_0 against a known value";
        r.tolerance = tol_or(1e-2);
        r.observe(std::fabs(sol.y0() - expected), "t=0");
        r.notes.push_back("y0 = " + num(sol.y0()) + ", expected " + num(expected));
        r.settle();
        reports.push_back(std::move(r));
    } else if (type == "certificate") {
        const AssumptionCertificate* cert = p.generator.certificate();
        if (cert == nullptr) throw ConfigError(path + ".generator.certificate", "missing");
        SampleGrid grid;
        grid.t_max = p.model.horizon;
        if (c.contains("y")) {
            const Range r = parse_range(c.at("y"), path + ".y");
            grid.y_min = r.from, grid.y_max = r.to, grid.y_count = r.points;
        }
        if (c.contains("z")) {
            const Range r = parse_range(c.at("z"), path + ".z");
            grid.z_min = r.from, grid.z_max = r.to, grid.z_count = r.points;
        }
        reports.push_back(check_certificate(p.generator, *cert, grid));
    } else if (type == "sandwich") {
        const TimeGrid grid(p.model.horizon, p.model.steps);
        ode::BoundEnvelope env = [&] {
            if (c.contains("xi_bound")) {
                const AssumptionCertificate* cert = p.generator.certificate();
                const auto* sl = cert ? std::get_if<OneSidedSuperLinear>(&cert->condition) : nullptr;
                if (!sl) throw ConfigError(path + ".generator.certificate", "needs one_sided_super_linear");
                return ode::sandwich_envelope(get_number(c, "xi_bound", path), sl->u, sl->l, grid);
            }
            try {
                return verify::envelope_from_certificate(p.generator, p.terminal, grid);
            } catch (const InvalidArgument& e) {
                throw ConfigError(path, e.what());
            }
        }();
        const auto sol = verify::solve(p.generator, p.terminal, cfg);
        reports.push_back(verify::sandwich_check(sol, env, tol_or(1e-3)));
    } else if (type == "comparison" || type == "bilateral" || type == "premise") {
        const Problem q = prime_problem();
        const auto a = verify::solve(p.generator, p.terminal, cfg);
        const auto b = verify::solve(q.generator, q.terminal, cfg);
        if (type == "comparison") {
            reports.push_back(verify::comparison_check(a, b, tol_or(1e-6)));
        } else if (type == "bilateral") {
            reports.push_back(verify::bilateral_check(a, b, tol_or(1e-6)));
        } else {
            const std::string which = get_string(c, "which", path, std::string("at_primed"));
            if (which != "at_primed" && which != "at_own")
                throw ConfigError(path + ".which", "expected at_primed or at_own");
            reports.push_back(verify::indicator_premise_check(
                a, b, p.generator, q.generator, which == "at_primed" ? verify::Premise::at_primed : verify::Premise::at_own,
                tol_or(1e-9)));
        }
    } else if (type == "monotone_family") {
        const json& o = require(c, "orders", path);
        if (!o.is_array() || o.empty()) throw ConfigError(path + ".orders", "expected a non-empty array");
        std::vector<double> orders;
        for (const auto& v : o) {
            if (!v.is_number()) throw ConfigError(path + ".orders", "expected numbers");
            orders.push_back(v.get<double>());
        }
        auto fam = verify::monotone_family_check(p.generator, p.terminal, orders, cfg, tol_or(1e-9));
        Csv series{"n", "y0"};
        for (std::size_t k = 0; k < fam.orders.size(); ++k) series.row(fam.orders[k], fam.y0[k]);
        write("check_" + std::to_string(index) + "_series.csv", series.text());
        reports.push_back(std::move(fam.report));
    } else if (type == "transform_residual") {
        if (p.model.backend != solver::Backend::tree) throw ConfigError(path + ".model.backend", "needs tree");
        const double gamma = get_number(c, "gamma", path);
        const auto sol = verify::solve(p.generator, p.terminal, cfg);
        reports.push_back(verify::transform_residual_check(sol, p.generator, gamma,
                                                           tol_or(verify::transform_tolerance(sol))));
    } else if (type == "comparison_sweep") {
        const int pairs = get_int(c, "pairs", path, 50);
        const int steps = get_int(c, "N", path, 200);
        const auto seed = static_cast<std::uint64_t>(get_int(c, "seed", path, 7));
        auto sweep = verify::comparison_sweep(pairs, steps, seed, tol_or(1e-6), opts_.threads);
        for (auto& r : sweep.reports) reports.push_back(std::move(r));
    } else if (type == "bounds_value") {
        const auto env = envelope_for(p, config_);
        const double expected = get_number(c, "expected", path);
        VerificationReport r;
        r.name = "bounds-value";
        r.reference = "U_0 against a closed-form value";
        r.tolerance = tol_or(1e-5);
        r.observe(std::fabs(env.U[0] - expected), "t=0");
        r.settle();
        reports.push_back(std::move(r));
    } else if (type == "norms") {
        const auto sol = verify::solve(p.generator, p.terminal, cfg);
        std::vector<double> ps{1.0, 2.0};
        if (c.contains("p")) ps = c.at("p").get<std::vector<double>>();
        const auto nr = solver::estimate_norms(sol, ps);
        Csv series{"p", "S_p", "M_p"};
        for (std::size_t k = 0; k < nr.p_list.size(); ++k) series.row(nr.p_list[k], nr.sp[k], nr.mp[k]);
        write("check_" + std::to_string(index) + "_series.csv", series.text());
        VerificationReport r;
        r.name = "norms";
        r.reference = "finite S^p, M^p and BMO estimates";
        r.tolerance = 0.0;
        bool finite = std::isfinite(nr.bmo) && std::isfinite(nr.sup_estimate);
        for (std::size_t k = 0; k < nr.p_list.size(); ++k) finite = finite && std::isfinite(nr.sp[k]) && std::isfinite(nr.mp[k]);
        r.observe(finite ? 0.0 : 1.0, "norm table");
        r.notes.push_back("BMO diagnostic " + num(nr.bmo));
        for (const auto& n : nr.notes) r.notes.push_back(n);
        r.settle();
        reports.push_back(std::move(r));
    } else {
        throw ConfigError(path + ".type", "unknown check type '" + type + "'");
    }

    const std::string expect = get_string(c, "expect", path, std::string("pass"));
    if (expect != "pass" && expect != "fail") throw ConfigError(path + ".expect", "expected pass or fail");

    Csv csv{"name", "status", "expected", "worst_violation", "tolerance", "location"};
    bool ok = true;
    for (const auto& r : reports) {
        csv.row(r.name, std::string(to_string(r.status)), expect, r.worst_violation, r.tolerance, r.location);
        ok = ok && (r.passed() == (expect == "pass"));
        json rec = json::parse(r.to_json());
        rec["check"] = index;
        rec["expected"] = expect;
        records.push_back(std::move(rec));
    }
    write("check_" + std::to_string(index) + "_" + type + ".csv", csv.text());
    std::string label = get_string(c, "label", path, type);
    say("check " + std::to_string(index) + " " + label + ": " + (ok ? "ok" : "FAILED") + " (" +
        std::to_string(reports.size()) + " report" + (reports.size() == 1 ? "" : "s") + ", expected " + expect + ")");
    return ok;
}

bool Session::run_checks(const Problem& p) {
    const json& checks = require(config_, "checks", "");
    if (!checks.is_array()) throw ConfigError("checks", "expected an array");
    json records = json::array();
    bool ok = true;
    for (std::size_t k = 0; k < checks.size(); ++k) ok = run_check(p, checks[k], k, records) && ok;
    write("report.json", records.dump(2) + "\n");
    return ok;
}

void Session::write_manifest() {
    json m;
    m["tool"] = "bsdelab";
    m["version"] = BSDELAB_VERSION;
    m["subcommand"] = opts_.subcommand;
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(config_.dump())));
    m["config_hash"] = hash;
    m["seed"] = config_.contains("model") ? config_["model"].value("seed", std::uint64_t{1}) : std::uint64_t{1};
    if (opts_.tol) m["tol_override"] = *opts_.tol;
    m["config"] = config_;
    json arts = json::object();
    for (const auto& [name, h] : artifacts_) {
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(h));
        arts[name] = hash;
    }
    m["artifacts"] = arts;
    write("manifest.json", m.dump(2) + "\n");
}

int Session::execute() {
    if (opts_.seed) config_["model"]["seed"] = *opts_.seed;
    const std::string& cmd = opts_.subcommand;
    bool ok = true;
    if (cmd == "envelope" && !config_.contains("model")) {
        run_envelope(Problem{});
    } else {
        const Problem p = parse_problem(config_);
        if (cmd == "solve") {
            run_solve(p);
        } else if (cmd == "bounds") {
            run_bounds(p);
        } else if (cmd == "envelope") {
            run_envelope(p);
        } else if (cmd == "verify") {
            ok = run_checks(p);
        } else {
            run_solve(p);
            if (config_.contains("bounds") || p.terminal.bound()) {
                const AssumptionCertificate* cert = p.generator.certificate();
                if (config_.contains("bounds") || (cert && std::holds_alternative<OneSidedSuperLinear>(cert->condition))) {
                    run_bounds(p);
                }
            }
            if (config_.contains("envelope")) run_envelope(p);
            if (config_.contains("checks")) ok = run_checks(p);
        }
    }
    write_manifest();
    say(ok ? "all checks passed" : "some checks FAILED");
    return ok ? exit_pass : exit_check_failed;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"bsdelab: numerical laboratory for one-dimensional BSDEs"};
    app.require_subcommand(1, 1);
    RunOptions opts;
    std::uint64_t seed = 0;
    double tol = 0.0;
    for (const char* name : {"solve", "bounds", "envelope", "verify", "suite"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config, "JSON experiment file")->required();
        sub->add_option("--out", opts.out, "output directory (default $BSDELAB_OUT or ./bsdelab-out)");
        sub->add_option("--seed", seed, "override model.seed");
        sub->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--tol", tol, "override every check tolerance");
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
        sub->callback([&opts, name] { opts.subcommand = name; });
    }

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_pass;
        }
        err << "bsdelab: " << e.what() << "\n";
        return exit_config_error;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed")) opts.seed = seed;
        if (sub->count("--tol")) opts.tol = tol;
    }
    if (opts.out.empty()) {
        const char* env = std::getenv("BSDELAB_OUT");
        opts.out = env && *env ? env : "bsdelab-out";
    }

    try {
        std::ifstream f(opts.config);
        if (!f) throw ConfigError(opts.config, "cannot open config file");
        json config;
        try {
            config = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError(opts.config, e.what());
        }
        if (!config.is_object()) throw ConfigError(opts.config, "top level must be an object");
        Session session(opts, std::move(config), out);
        return session.execute();
    } catch (const ConfigError& e) {
        err << "bsdelab: config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const json::exception& e) {
        err << "bsdelab: config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        err << "bsdelab: runtime error: " << e.what() << "\n";
        return exit_runtime_error;
    }
}

}  // namespace bsde::cli
