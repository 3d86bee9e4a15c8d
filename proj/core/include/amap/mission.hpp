#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amap/config.hpp"
#include "amap/sim_env.hpp"

namespace amap {

struct TrialRecord {
    int trial_id = 0;
    std::uint64_t env_seed = 0;
    double time = 0.0;
    Metrics metrics;
    std::string planner;
    std::string utility;
    std::string mapping_mode;
};

struct MissionResult {
    std::vector<TrialRecord> records;
    std::vector<std::string> log;  // fallbacks and other notable events
    std::vector<Vec3> true_path;   // true pose at every executed node
    std::vector<Vec3> sites;       // estimated measurement positions
    Eigen::VectorXd final_mean;    // map posterior mean at the end
    int replans = 0;
    int fallbacks = 0;
};

/*
 * Replan / execute loop. Every plan is executed node by node at the union of
 * the control ticks (interp_hz) and the measurement ticks (sensor rate, on a
 * mission-wide clock); the plan that would cross the budget is truncated at it.
 * A measurement solves the graph and adds the current marginal belief and a
 * noisy truth sample to the field model, then emits one record.
 */
MissionResult run_mission(const ExperimentConfig& cfg, const World& world, std::uint64_t seed, int trial_id = 0);

/// World from the environment stream, then the mission from the noise stream, both keyed by seed.
MissionResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed, int trial_id = 0);

}  // namespace amap
