#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdelab/cli.hpp"
#include "bsdelab/functions.hpp"
#include "bsdelab/verify.hpp"

namespace bsde::cli {

using nlohmann::json;

struct ModelConfig {
    double horizon = 1.0;
    int steps = 100;
    solver::Backend backend = solver::Backend::tree;
    solver::Scheme scheme = solver::Scheme::explicit_step;
    std::uint64_t seed = 1;
    std::size_t paths = 10000;
    int basis_degree = 2;
    std::optional<double> z_cap;

    verify::BackendConfig backend_config(int threads) const;
};

/// Model, generator and terminal condition of one experiment.
struct Problem {
    ModelConfig model;
    Generator generator;
    TerminalCondition terminal;
};

struct Range {
    double from = 0.0;
    double to = 1.0;
    int points = 11;

    double at(int k) const { return points == 1 ? from : from + (to - from) * k / (points - 1); }
};

ModelConfig parse_model(const json& j, const std::string& path, ModelConfig base = {});
Generator parse_generator(const json& j, const std::string& path);
TerminalCondition parse_terminal(const json& j, const std::string& path);
WeightFn parse_weight(const json& j, const std::string& path, Integrability default_class = Integrability::L1);
Univariate parse_function(const json& j, const std::string& path);
Range parse_range(const json& j, const std::string& path);

/// Top-level problem; a check may override any of the three sections.
Problem parse_problem(const json& root);
Problem problem_for(const Problem& base, const json& overrides, const std::string& path);

// Typed accessors that raise ConfigError with the key path.
const json& require(const json& j, const std::string& key, const std::string& path);
double get_number(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback = {});
int get_int(const json& j, const std::string& key, const std::string& path, std::optional<int> fallback = {});
std::string get_string(const json& j, const std::string& key, const std::string& path,
                       std::optional<std::string> fallback = {});

}  // namespace bsde::cli
