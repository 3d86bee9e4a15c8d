#include "amap/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace amap {

std::string format_number(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_records(std::ostream& out, std::span<const TrialRecord> records)
{
    for (const TrialRecord& r : records) {
        out << r.trial_id << ',' << r.env_seed << ',' << format_number(r.time) << ','
            << format_number(r.metrics.tr_P) << ',' << format_number(r.metrics.map_rmse) << ','
            << format_number(r.metrics.tr_Sigma) << ',' << format_number(r.metrics.pose_err) << ',' << r.planner << ','
            << r.utility << ',' << r.mapping_mode << '\n';
    }
}

int default_thread_count()
{
    if (const char* env = std::getenv("AMAP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads)
{
    cfg.validate();
    if (threads <= 0) {
        threads = default_thread_count();
    }
    threads = std::min(threads, cfg.trials);

    std::vector<std::string> rows(static_cast<std::size_t>(cfg.trials));
    std::vector<std::string> errors(static_cast<std::size_t>(cfg.trials));
    std::atomic<int> next{0};

    auto worker = [&] {
        for (int i = next++; i < cfg.trials; i = next++) {
            const auto idx = static_cast<std::size_t>(i);
            try {
                const MissionResult m = run_trial(cfg, cfg.base_seed + static_cast<std::uint64_t>(i), i);
                std::ostringstream buf;
                write_records(buf, m.records);
                rows[idx] = buf.str();
            } catch (const std::exception& e) {
                errors[idx] = e.what();
                if (errors[idx].empty()) {
                    errors[idx] = "unknown failure";
                }
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    ExperimentResult result;
    result.trials = cfg.trials;
    std::filesystem::create_directories(cfg.output);
    result.csv = cfg.output / (cfg.stem() + ".csv");
    result.manifest = cfg.output / (cfg.stem() + ".manifest");

    std::ofstream csv(result.csv, std::ios::binary);
    csv << kCsvHeader << '\n';
    for (int i = 0; i < cfg.trials; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!errors[idx].empty()) {
            ++result.failed;
            result.errors.push_back("trial " + std::to_string(i) + ": " + errors[idx]);
            continue;
        }
        csv << rows[idx];
    }
    if (!csv) {
        throw std::runtime_error("cannot write " + result.csv.string());
    }

    std::ofstream manifest(result.manifest, std::ios::binary);
    manifest << "# amap " << AMAP_VERSION << '\n';
    manifest << "# failed_trials = " << result.failed << '\n';
    manifest << cfg.to_text();
    return result;
}

void write_field(std::ostream& out, const GroundTruthField& field)
{
    out << "x,y,z,value\n";
    const auto& pts = field.grid->points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out << format_number(pts[i].x()) << ',' << format_number(pts[i].y()) << ',' << format_number(pts[i].z()) << ','
            << format_number(field.values[static_cast<Eigen::Index>(i)]) << '\n';
    }
}

}  // namespace amap
