#include <algorithm>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "walsh/errors.hpp"
#include "walsh/experiments.hpp"
#include "walsh/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

nlohmann::json load_config(const std::string& arg) {
    const auto names = walsh::list_experiments();
    if (std::find(names.begin(), names.end(), arg) != names.end())
        return walsh::default_config(arg);
    std::ifstream f(arg);
    if (!f) throw walsh::ArgumentError("config: cannot open '" + arg + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw walsh::ArgumentError(std::string("config: invalid JSON: ") + e.what());
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Walsh semimartingale simulation and verification toolkit"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "List the built-in experiments");

    std::string validate_arg;
    auto* validate_cmd = app.add_subcommand("validate", "Schema-check a config file");
    validate_cmd->add_option("config", validate_arg, "config file or experiment name")->required();

    std::string run_arg;
    std::int64_t seed_override = -1;
    std::int64_t paths_override = -1;
    std::int64_t workers_override = -1;
    std::string out_override;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment");
    run_cmd->add_option("config", run_arg, "config file or experiment name")->required();
    run_cmd->add_option("--seed", seed_override, "override batch.seed");
    run_cmd->add_option("--n-paths", paths_override, "override batch.n_paths");
    run_cmd->add_option("--workers", workers_override, "override batch.workers");
    run_cmd->add_option("--out", out_override, "override output.dir");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& name : walsh::list_experiments()) std::cout << name << "\n";
            return kExitOk;
        }
        if (validate_cmd->parsed()) {
            const auto errors = walsh::validate_config(load_config(validate_arg));
            for (const auto& e : errors) std::cerr << e << "\n";
            if (!errors.empty()) return kExitConfig;
            std::cout << "ok\n";
            return kExitOk;
        }
        // run
        nlohmann::json cfg = load_config(run_arg);
        if (seed_override >= 0) cfg["batch"]["seed"] = seed_override;
        if (paths_override >= 0) cfg["batch"]["n_paths"] = paths_override;
        if (workers_override >= 0) cfg["batch"]["workers"] = workers_override;
        if (!out_override.empty()) cfg["output"]["dir"] = out_override;
        const auto errors = walsh::validate_config(cfg);
        if (!errors.empty()) {
            for (const auto& e : errors) std::cerr << e << "\n";
            return kExitConfig;
        }
        const walsh::RunResult res = walsh::run_experiment(cfg);
        std::cout << "wrote " << (res.out_dir / "summary.json").string() << " ("
                  << res.manifest["files"].size() << " files)\n";
        return kExitOk;
    } catch (const walsh::ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const walsh::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const walsh::NumericalBlowup& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
