#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "amap/config.hpp"
#include "amap/mission.hpp"

namespace amap {

inline constexpr const char* kCsvHeader =
    "trial_id,env_seed,time,tr_P,map_rmse,tr_Sigma,pose_err,planner,utility,mapping_mode";

/// Shortest round-trip decimal form.
std::string format_number(double value);

void write_records(std::ostream& out, std::span<const TrialRecord> records);

struct ExperimentResult {
    std::filesystem::path csv;
    std::filesystem::path manifest;
    int trials = 0;
    int failed = 0;
    std::vector<std::string> errors;

    /// More than 10% of trials failed.
    bool failure_threshold_exceeded() const { return failed * 10 > trials; }
};

/// Pool size from AMAP_THREADS when set, else the hardware concurrency.
int default_thread_count();

/*
 * Runs trials 0..cfg.trials-1 with seeds base_seed + i on a worker pool and
 * writes <output>/<stem>.csv plus <output>/<stem>.manifest. Rows are buffered
 * per trial and written in trial order, so the bytes do not depend on the pool size.
 */
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

/// Ground-truth dump: header "x,y,z,value", one row per grid point in grid order.
void write_field(std::ostream& out, const GroundTruthField& field);

}  // namespace amap
