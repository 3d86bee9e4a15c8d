#include "amap/summary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "amap/experiment.hpp"

namespace amap {

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

constexpr const char* kMetricNames[] = {"tr_P", "map_rmse", "tr_Sigma", "pose_err"};

double metric_value(const Metrics& m, int k)
{
    switch (k) {
    case 0: return m.tr_P;
    case 1: return m.map_rmse;
    case 2: return m.tr_Sigma;
    default: return m.pose_err;
    }
}

}  // namespace

std::vector<TrialRecord> read_records(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw SchemaMismatch("unexpected CSV header '" + line + "'");
    }
    std::vector<TrialRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != 10) {
            throw SchemaMismatch("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                 " fields");
        }
        try {
            TrialRecord r;
            r.trial_id = std::stoi(cells[0]);
            r.env_seed = std::stoull(cells[1]);
            r.time = std::stod(cells[2]);
            r.metrics = {std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5]), std::stod(cells[6])};
            r.planner = cells[7];
            r.utility = cells[8];
            r.mapping_mode = cells[9];
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw SchemaMismatch("line " + std::to_string(line_no) + " is not numeric where expected");
        }
    }
    return out;
}

std::vector<TrialRecord> read_records(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_records(in);
}

std::vector<SummaryRow> summarize(std::span<const std::vector<TrialRecord>> sources)
{
    using ConfigKey = std::tuple<std::string, std::string, std::string>;
    using TrialKey = std::pair<std::size_t, int>;
    std::map<ConfigKey, std::map<TrialKey, std::vector<const TrialRecord*>>> groups;
    for (std::size_t s = 0; s < sources.size(); ++s) {
        for (const TrialRecord& r : sources[s]) {
            groups[{r.planner, r.utility, r.mapping_mode}][{s, r.trial_id}].push_back(&r);
        }
    }

    std::vector<SummaryRow> rows;
    for (auto& [config, trials] : groups) {
        double horizon = 0.0;
        for (auto& [key, recs] : trials) {
            std::stable_sort(recs.begin(), recs.end(),
                             [](const TrialRecord* a, const TrialRecord* b) { return a->time < b->time; });
            horizon = std::max(horizon, recs.back()->time);
        }
        for (int bin = 0; bin <= static_cast<int>(std::floor(horizon + 1e-9)); ++bin) {
            const double t = bin;
            std::vector<const TrialRecord*> picks;
            for (const auto& [key, recs] : trials) {
                if (t > recs.back()->time + 0.5) {
                    continue;
                }
                const TrialRecord* nearest = recs.front();
                for (const TrialRecord* r : recs) {
                    if (std::abs(r->time - t) < std::abs(nearest->time - t)) {
                        nearest = r;
                    }
                }
                picks.push_back(nearest);
            }
            if (picks.empty()) {
                continue;
            }
            for (int k = 0; k < 4; ++k) {
                const auto n = static_cast<double>(picks.size());
                double sum = 0.0;
                for (const TrialRecord* r : picks) sum += metric_value(r->metrics, k);
                const double mean = sum / n;
                double ss = 0.0;
                for (const TrialRecord* r : picks) {
                    const double d = metric_value(r->metrics, k) - mean;
                    ss += d * d;
                }
                const double half = picks.size() > 1 ? 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
                rows.push_back({std::get<0>(config), std::get<1>(config), std::get<2>(config), t, kMetricNames[k],
                                static_cast<int>(picks.size()), mean, half});
            }
        }
    }
    return rows;
}

std::vector<SummaryRow> summarize_files(std::span<const std::filesystem::path> paths)
{
    std::vector<std::vector<TrialRecord>> sources;
    for (const auto& p : paths) {
        sources.push_back(read_records(p));
    }
    return summarize(sources);
}

void write_summary(std::ostream& out, std::span<const SummaryRow> rows)
{
    out << "planner,utility,mapping_mode,time,metric,n,mean,ci_low,ci_high,note\n";
    for (const SummaryRow& r : rows) {
        out << r.planner << ',' << r.utility << ',' << r.mapping_mode << ',' << format_number(r.time) << ',' << r.metric
            << ',' << r.n << ',' << format_number(r.mean) << ',' << format_number(r.mean - r.ci_half_width) << ','
            << format_number(r.mean + r.ci_half_width) << ',' << (r.n == 1 ? "n=1" : "") << '\n';
    }
}

}  // namespace amap
