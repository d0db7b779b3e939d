#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include <bsdelab/cli.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bsde;

namespace {

struct Sandbox {
    fs::path dir;

    explicit Sandbox(const std::string& name) {
        dir = fs::temp_directory_path() / ("bsdelab_cli_" + name + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    std::string config(const json& j, const std::string& name = "config.json") const {
        const fs::path p = dir / name;
        std::ofstream(p) << j.dump(2);
        return p.string();
    }
    std::string out(const std::string& name = "out") const { return (dir / name).string(); }
};

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::string> row(const std::string& csv, std::size_t index) {
    std::istringstream in(csv);
    std::string line;
    for (std::size_t k = 0; k <= index; ++k) std::getline(in, line);
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    return cells;
}

json base_model() {
    return {{"model", {{"T", 1.0}, {"N", 100}}}, {"generator", "0"}, {"terminal", "w"}};
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("solve writes the expected table") {
        Sandbox box("solve");
        const auto r = run({"solve", "--config", box.config(base_model()), "--out", box.out(), "--quiet"});
        REQUIRE(r.code == cli::exit_pass);
        const std::string csv = slurp(fs::path(box.out()) / "solve.csv");
        CHECK(row(csv, 0) == std::vector<std::string>{"t", "y_mean", "y_min", "y_max", "z_mean"});
        const auto first = row(csv, 1);
        CHECK(std::stod(first[0]) == 0.0);
        CHECK(std::stod(first[1]) == 0.0);
        CHECK(fs::exists(fs::path(box.out()) / "manifest.json"));
        for (const auto& e : fs::directory_iterator(box.out())) CHECK(e.path().extension() != ".tmp");
    }

    TEST_CASE("bounds value at t = 0") {
        Sandbox box("bounds");
        json c = base_model();
        c["bounds"] = {{"xi_bound", 1}, {"u", "1"}, {"l", "1 + abs(x)"}};
        const auto r = run({"bounds", "--config", box.config(c), "--out", box.out(), "--quiet"});
        REQUIRE(r.code == cli::exit_pass);
        const auto first = row(slurp(fs::path(box.out()) / "bounds.csv"), 1);
        CHECK(std::fabs(std::stod(first[2]) - 4.436564) <= 1e-5);
        CHECK(std::fabs(std::stod(first[1]) + 4.436564) <= 1e-5);
    }

    TEST_CASE("envelope table") {
        Sandbox box("envelope");
        const json c = {{"envelope",
                         {{"kind", "lipschitz"}, {"psi", "sqrt(x)"}, {"K", 1}, {"growth_slope", 0.5},
                          {"x", {{"from", 0}, {"to", 1}, {"points", 5}}}}}};
        const auto r = run({"envelope", "--config", box.config(c), "--out", box.out(), "--quiet"});
        REQUIRE(r.code == cli::exit_pass);
        const std::string csv = slurp(fs::path(box.out()) / "envelope.csv");
        CHECK(std::stod(row(csv, 1)[1]) == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(std::stod(row(csv, 5)[1]) == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("sup-convolution envelope from a config") {
        Sandbox box("supconv");
        json c = base_model();
        c["generator"] = {{"expr", "-y^2"},
                          {"certificate", {{"kind", "one_sided_linear"}, {"f", "0"}, {"u", "0"}, {"v", "0"},
                                           {"side", "upper"}}}};
        c["envelope"] = {{"kind", "sup_convolution"}, {"n", 2}, {"u_w", "1"}, {"v_w", "1"}, {"over", "y"},
                         {"points", {{"from", 0}, {"to", 2}, {"points", 5}}}};
        const auto r = run({"envelope", "--config", box.config(c), "--out", box.out(), "--quiet"});
        REQUIRE(r.code == cli::exit_pass);
        const std::string csv = slurp(fs::path(box.out()) / "envelope.csv");
        CHECK(std::stod(row(csv, 2)[1]) == doctest::Approx(-0.25).epsilon(1e-12));
        CHECK(std::stod(row(csv, 5)[1]) == doctest::Approx(-3.0).epsilon(1e-9));
    }

    TEST_CASE("shipped acceptance suite") {
        Sandbox box("suite");
        const auto r = run({"suite", "--config", std::string(BSDELAB_SOURCE_DIR) + "/configs/acceptance.json", "--out",
                            box.out(), "--quiet"});
        CHECK_MESSAGE(r.code == cli::exit_pass, r.err);
        const json manifest = json::parse(slurp(fs::path(box.out()) / "manifest.json"));
        CHECK(manifest["tool"] == "bsdelab");
        CHECK(manifest["config_hash"].get<std::string>().size() == 16);
        const json report = json::parse(slurp(fs::path(box.out()) / "report.json"));
        REQUIRE(report.is_array());
        std::set<int> indices;
        for (const auto& entry : report) indices.insert(entry["check"].get<int>());
        CHECK(indices.size() == 16);
        for (int k : indices) {
            bool found = false;
            for (const auto& e : fs::directory_iterator(box.out())) {
                const std::string name = e.path().filename().string();
                if (name.rfind("check_" + std::to_string(k) + "_", 0) == 0) found = true;
            }
            CHECK_MESSAGE(found, "check " << k);
        }
        CHECK(fs::exists(fs::path(box.out()) / "solve.csv"));
        CHECK(fs::exists(fs::path(box.out()) / "bounds.csv"));
    }

    TEST_CASE("failing check gives exit 1") {
        Sandbox box("fail");
        json c = base_model();
        c["checks"] = json::array({{{"type", "comparison"}, {"terminal", "1"}, {"terminal_prime", "0"}}});
        const auto r = run({"verify", "--config", box.config(c), "--out", box.out(), "--quiet"});
        CHECK(r.code == cli::exit_check_failed);
        c["checks"][0]["expect"] = "fail";
        CHECK(run({"verify", "--config", box.config(c), "--out", box.out(), "--quiet"}).code == cli::exit_pass);
    }

    TEST_CASE("config errors name the offending key") {
        Sandbox box("config");
        json missing = base_model();
        missing.erase("generator");
        auto r = run({"solve", "--config", box.config(missing), "--out", box.out()});
        CHECK(r.code == cli::exit_config_error);
        CHECK(r.err.find("generator") != std::string::npos);

        json bad_expr = base_model();
        bad_expr["generator"] = "y +* 2";
        r = run({"solve", "--config", box.config(bad_expr), "--out", box.out()});
        CHECK(r.code == cli::exit_config_error);
        CHECK(r.err.find("generator.expr") != std::string::npos);

        json no_witness = base_model();
        no_witness["generator"] = {{"expr", "-y"}, {"certificate", {{"kind", "one_sided_super_linear"}, {"u", "1"}}}};
        r = run({"solve", "--config", box.config(no_witness), "--out", box.out()});
        CHECK(r.code == cli::exit_config_error);
        CHECK(r.err.find("generator.certificate.l") != std::string::npos);

        json bad_n = base_model();
        bad_n["model"]["N"] = 0;
        r = run({"solve", "--config", box.config(bad_n), "--out", box.out()});
        CHECK(r.code == cli::exit_config_error);
        CHECK(r.err.find("model.N") != std::string::npos);

        CHECK(run({"solve", "--config", (box.dir / "absent.json").string()}).code == cli::exit_config_error);
        CHECK(run({"solve"}).code == cli::exit_config_error);
        CHECK(run({"frobnicate", "--config", "x"}).code == cli::exit_config_error);
    }

    TEST_CASE("runtime errors give exit 3") {
        Sandbox box("runtime");
        json c = base_model();
        c["model"] = {{"T", 1.0}, {"N", 1}, {"scheme", "implicit"}};
        c["generator"] = "5*y";
        c["terminal"] = "1";
        const auto r = run({"solve", "--config", box.config(c), "--out", box.out()});
        CHECK(r.code == cli::exit_runtime_error);
        CHECK(r.err.find("runtime error") != std::string::npos);
    }

    TEST_CASE("identical CSVs across thread counts and reruns") {
        Sandbox box("determinism");
        json c = base_model();
        c["model"] = {{"T", 1.0}, {"N", 20}, {"backend", "mc-regression"}, {"paths", 20000}, {"seed", 5}};
        c["generator"] = "-y + 0.5*abs(z)";
        c["terminal"] = "max(w, 0)";
        const std::string cfg = box.config(c);
        REQUIRE(run({"solve", "--config", cfg, "--out", box.out("a"), "--threads", "1", "--quiet"}).code == 0);
        REQUIRE(run({"solve", "--config", cfg, "--out", box.out("b"), "--threads", "8", "--quiet"}).code == 0);
        CHECK(slurp(fs::path(box.out("a")) / "solve.csv") == slurp(fs::path(box.out("b")) / "solve.csv"));

        REQUIRE(run({"solve", "--config", cfg, "--out", box.out("c"), "--seed", "6", "--quiet"}).code == 0);
        CHECK(slurp(fs::path(box.out("a")) / "solve.csv") != slurp(fs::path(box.out("c")) / "solve.csv"));
        const json m = json::parse(slurp(fs::path(box.out("c")) / "manifest.json"));
        CHECK(m["seed"] == 6);
    }

    TEST_CASE("manifest alone reproduces the run") {
        Sandbox box("manifest");
        json c = base_model();
        c["model"]["scheme"] = "implicit";
        c["generator"] = "sin(y) - z^2/4";
        c["checks"] = json::array({{{"type", "closed_form"}, {"generator", "0"}, {"terminal", "w"},
                                    {"expected", 0.0}, {"tol", 1e-12}}});
        REQUIRE(run({"suite", "--config", box.config(c), "--out", box.out("first"), "--quiet", "--tol", "1e-9"}).code ==
                0);
        const json m = json::parse(slurp(fs::path(box.out("first")) / "manifest.json"));
        CHECK(m["tol_override"] == 1e-9);
        const std::string replay = box.config(m["config"], "replay.json");
        REQUIRE(run({"suite", "--config", replay, "--out", box.out("second"), "--quiet", "--tol", "1e-9"}).code == 0);
        for (const auto& e : fs::directory_iterator(box.out("first"))) {
            const std::string name = e.path().filename().string();
            if (e.path().extension() == ".csv")
                CHECK_MESSAGE(slurp(e.path()) == slurp(fs::path(box.out("second")) / name), name);
        }
        const json m2 = json::parse(slurp(fs::path(box.out("second")) / "manifest.json"));
        CHECK(m2["config_hash"] == m["config_hash"]);
        CHECK(m2["artifacts"] == m["artifacts"]);
    }

    TEST_CASE("output directory from the environment") {
        Sandbox box("envout");
        const std::string target = box.out("from_env");
        ::setenv("BSDELAB_OUT", target.c_str(), 1);
        const auto r = run({"solve", "--config", box.config(base_model()), "--quiet"});
        ::unsetenv("BSDELAB_OUT");
        CHECK(r.code == 0);
        CHECK(fs::exists(fs::path(target) / "solve.csv"));
    }

    TEST_CASE("certificate parsing") {
        const auto c = cli::parse_certificate(
            json{{"kind", "mixed_sub_linear"}, {"f", "1"}, {"u", "1"}, {"v", "1"}, {"lambda", "2"}, {"alpha", 0.5}},
            "cert");
        CHECK(c.kind() == "mixed_sub_linear");
        CHECK_THROWS_AS(cli::parse_certificate(json{{"kind", "nonsense"}}, "cert"), cli::ConfigError);
        try {
            (void)cli::parse_certificate(json{{"kind", "continuity_z"}, {"v", "1"}, {"phi", "x"}, {"a", 1}}, "cert");
            FAIL("no error");
        } catch (const cli::ConfigError& e) {
            CHECK(e.path() == "cert.b");
        }
        CHECK_THROWS_AS(cli::parse_certificate(
                            json{{"kind", "sub_linear_diff_z"}, {"lambda", "1"}, {"alpha", 1.5}}, "cert"),
                        cli::ConfigError);
    }

    TEST_CASE("FNV-1a reference values") {
        CHECK(cli::fnv1a("") == 0xcbf29ce484222325ULL);
        CHECK(cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
        CHECK(cli::fnv1a("foobar") == 0x85944171f73967e8ULL);
    }
}
