#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amap/gp.hpp"
#include "amap/planner.hpp"
#include "amap/sim_env.hpp"

namespace amap {

enum class PlannerKind { TwoStep, RigTree, Random };

std::string_view to_string(PlannerKind kind);
PlannerKind planner_kind_from_string(std::string_view name);

struct ExperimentConfig {
    std::string name;  // output file stem; empty derives planner_utility_mapping
    WorldConfig world;
    KernelSpec field_kernel;  // ground-truth generator
    KernelSpec map_kernel;    // mapping GP
    double prior_mean = 0.0;
    int train_samples = 0;    // > 0 retrains map hyperparameters on this many truth samples
    KernelMode mapping_mode = KernelMode::Expected;
    int quadrature_order = 5;

    PlannerKind planner = PlannerKind::TwoStep;
    UtilityKind utility;
    int n_waypoints = 4;
    std::array<int, 3> lattice_counts{3, 3, 3};
    TrajectoryOptions trajectory;
    CmaesSettings cmaes;
    RigTreeConfig rig;
    CameraModel camera;
    ControlNoiseModel motion_noise;
    double interp_hz = 0.5;

    int trials = 1;
    std::uint64_t base_seed = 0;
    std::filesystem::path output = "results";

    std::string stem() const;
    PlannerConfig planner_config() const;
    /// Throws ValidationError listing every violation.
    void validate() const;
    /// Fully resolved key = value text; parse_config_text(to_text()) reproduces the config.
    std::string to_text() const;
};

class ParseError : public Error {
public:
    ParseError(int line, std::string key, const std::string& message);
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/*
 * Flat "section.key = value" text. '#' starts a comment, vectors are
 * whitespace separated, every key is optional and unknown keys are errors.
 */
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

}  // namespace amap
