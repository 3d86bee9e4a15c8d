#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "amap/mission.hpp"

namespace amap {

/// Parses a harness CSV; throws SchemaMismatch unless the header matches exactly.
std::vector<TrialRecord> read_records(std::istream& in);
std::vector<TrialRecord> read_records(const std::filesystem::path& path);

struct SummaryRow {
    std::string planner;
    std::string utility;
    std::string mapping_mode;
    double time = 0.0;
    std::string metric;
    int n = 0;
    double mean = 0.0;
    double ci_half_width = 0.0;  // 1.96 * sd / sqrt(n); 0 when n = 1
};

/*
 * Per configuration (planner, utility, mapping_mode), per 1 s bin and per
 * metric: each trial contributes its measurement event nearest to the bin time
 * (earlier event on ties) as long as the bin lies within half a second of its
 * last event. Trials are keyed by (source, trial_id).
 */
std::vector<SummaryRow> summarize(std::span<const std::vector<TrialRecord>> sources);
std::vector<SummaryRow> summarize_files(std::span<const std::filesystem::path> paths);

void write_summary(std::ostream& out, std::span<const SummaryRow> rows);

}  // namespace amap
