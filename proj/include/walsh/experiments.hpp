#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace walsh {

// Canonical configuration for one experiment run. The JSON layout is
//   { "experiment": ..., "measure": ..., "coefficients": ...,
//     "grid": {"t_end", "n_steps"}, "batch": {"n_paths", "seed", "workers"},
//     "estimator": {"epsilons", "method"},
//     "output": {"dir", "formats", "per_path_csv"}, "params": {...} }
// Seeds are mandatory; nothing is ever seeded from the clock.
struct ExperimentConfig {
    std::string experiment;
    nlohmann::json measure;
    nlohmann::json coefficients;
    double t_end = 1.0;
    std::size_t n_steps = 1000;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::vector<double> epsilons;
    std::string lt_method = "tanaka";
    std::string out_dir;
    bool want_csv = true;
    bool per_path_csv = false;
    nlohmann::json params;
};

// Names of the built-in experiments, in catalog order.
std::vector<std::string> list_experiments();

// Bundled default configuration for a built-in experiment (ArgumentError on
// unknown names).
nlohmann::json default_config(const std::string& name);

// Schema check; returns one "field.path: message" line per violation.
std::vector<std::string> validate_config(const nlohmann::json& j);

// Applies defaults for the config's experiment, validates, and parses.
ExperimentConfig parse_config(const nlohmann::json& j);

struct RunResult {
    nlohmann::ordered_json summary;
    nlohmann::ordered_json manifest;
    std::filesystem::path out_dir;
};

// Runs the experiment and writes summary.json, any CSV artifacts, and
// manifest.json under the output directory. Identical config and seed give
// byte-identical artifacts for any worker count.
RunResult run_experiment(const nlohmann::json& config_json);

}  // namespace walsh
