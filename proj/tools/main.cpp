#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amap/config.hpp"
#include "amap/experiment.hpp"
#include "amap/sim_env.hpp"
#include "amap/summary.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kTrialFailures = 3;

int run(const std::string& config_path, std::optional<int> trials, std::optional<std::uint64_t> seed,
        std::optional<std::string> out)
{
    amap::ExperimentConfig cfg;
    try {
        cfg = amap::parse_config(config_path);
        if (trials) cfg.trials = *trials;
        if (seed) cfg.base_seed = *seed;
        if (out) cfg.output = *out;
        cfg.validate();
    } catch (const amap::Error& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return kConfigError;
    }

    const amap::ExperimentResult result = amap::run_experiment(cfg, amap::default_thread_count());
    for (const auto& e : result.errors) {
        std::cerr << "failed " << e << '\n';
    }
    std::cout << result.csv.string() << '\n';
    if (result.failure_threshold_exceeded()) {
        std::cerr << result.failed << " of " << result.trials << " trials failed\n";
        return kTrialFailures;
    }
    return 0;
}

int summarize(const std::vector<std::string>& inputs, const std::string& out)
{
    std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
    std::vector<amap::SummaryRow> rows;
    try {
        rows = amap::summarize_files(paths);
    } catch (const amap::SchemaMismatch& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    }
    amap::write_summary(std::cout, rows);
    std::ofstream file(out, std::ios::binary);
    amap::write_summary(file, rows);
    return file ? 0 : 1;
}

int grf(const std::optional<std::string>& config_path, std::uint64_t seed, const std::string& out)
{
    amap::ExperimentConfig cfg;
    try {
        if (config_path) cfg = amap::parse_config(*config_path);
    } catch (const amap::Error& e) {
        std::cerr << *config_path << ": " << e.what() << '\n';
        return kConfigError;
    }
    const amap::World world = amap::make_world(cfg.world, cfg.field_kernel, seed);
    std::ofstream file(out, std::ios::binary);
    amap::write_field(file, world.field);
    return file ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Uncertainty-aware active mapping simulator"};
    app.set_version_flag("--version", AMAP_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    auto* run_cmd = app.add_subcommand("run", "Run seeded missions and write CSV records");
    run_cmd->add_option("--config", config_path, "Experiment configuration file")->required();
    run_cmd->add_option("--trials", trials, "Override experiment.trials");
    run_cmd->add_option("--seed", seed, "Override experiment.base_seed");
    run_cmd->add_option("--out", out, "Override experiment.output directory");

    std::vector<std::string> inputs;
    std::string summary_out = "summary.csv";
    auto* sum_cmd = app.add_subcommand("summarize", "Mean and 95% CI per configuration and 1 s bin");
    sum_cmd->add_option("csv", inputs, "Harness CSV files")->required();
    sum_cmd->add_option("--out", summary_out, "Summary file (also printed)");

    std::uint64_t grf_seed = 0;
    std::string grf_out;
    std::optional<std::string> grf_config;
    auto* grf_cmd = app.add_subcommand("grf", "Dump a ground-truth field as x,y,z,value CSV");
    grf_cmd->add_option("--seed", grf_seed, "Trial seed")->required();
    grf_cmd->add_option("--out", grf_out, "Output file")->required();
    grf_cmd->add_option("--config", grf_config, "World and field settings (defaults otherwise)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfigError;
    }

    try {
        if (*run_cmd) return run(config_path, trials, seed, out);
        if (*sum_cmd) return summarize(inputs, summary_out);
        if (*grf_cmd) return grf(grf_config, grf_seed, grf_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
