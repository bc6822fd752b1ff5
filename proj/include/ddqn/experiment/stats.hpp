#pragma once

// Reward statistics across seeds.
//
// Percentiles use linear interpolation between order statistics: for sorted
// values x_0 <= ... <= x_{n-1} the p-th percentile sits at rank
// r = p / 100 * (n - 1) and equals x_i + (r - i) * (x_{i+1} - x_i), i = floor(r).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ddqn/csv.hpp"
#include "ddqn/errors.hpp"
#include "ddqn/experiment/run_log.hpp"

namespace ddqn::experiment {

inline double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw UsageError("percentile of an empty sample");
    if (!(p >= 0.0 && p <= 100.0)) throw UsageError("percentile must lie in [0, 100]");
    const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, p);
}

inline double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

inline double mean(std::span<const double> values) {
    if (values.empty()) throw UsageError("mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

struct StatsPoint {
    std::uint64_t step = 0;
    bool missing = false;
    double mean = 0.0;
    double median = 0.0;
    double p2 = 0.0;
    double p98 = 0.0;
    std::size_t n = 0;
};

struct RewardStats {
    std::vector<StatsPoint> points;
};

inline StatsPoint summarize(std::uint64_t step, std::vector<double> values) {
    std::sort(values.begin(), values.end());
    StatsPoint pt;
    pt.step = step;
    pt.n = values.size();
    pt.mean = mean(values);
    pt.median = percentile_sorted(values, 50.0);
    pt.p2 = percentile_sorted(values, 2.0);
    pt.p98 = percentile_sorted(values, 98.0);
    return pt;
}

// Return of the last episode that finished at or before `step`.
inline std::optional<double> latest_return_at(const RunLog& log, std::uint64_t step) {
    std::optional<double> latest;
    for (const auto& e : log.episodes) {
        if (e.end_step() > step) break;
        latest = e.ret;
    }
    return latest;
}

// Returns of episodes ending in the step window (from, to].
inline std::vector<double> returns_ending_in(const RunLog& log, std::uint64_t from, std::uint64_t to) {
    std::vector<double> out;
    for (const auto& e : log.episodes)
        if (e.end_step() > from && e.end_step() <= to) out.push_back(e.ret);
    return out;
}

// At each eval point, every run contributes its most recent completed-episode
// return; the point is marked missing when some run has none yet.
inline RewardStats aggregate_stats(const std::vector<RunLog>& logs, const std::vector<std::uint64_t>& eval_points) {
    if (logs.size() < 2) throw UsageError("aggregate_stats needs at least two runs");
    RewardStats stats;
    for (const auto step : eval_points) {
        std::vector<double> values;
        bool missing = false;
        for (const auto& log : logs) {
            const auto r = latest_return_at(log, step);
            if (!r) {
                missing = true;
                break;
            }
            values.push_back(*r);
        }
        if (missing) {
            stats.points.push_back({step, true, 0, 0, 0, 0, 0});
        } else {
            stats.points.push_back(summarize(step, std::move(values)));
        }
    }
    return stats;
}

// Every `interval` steps up to and including `total`.
inline std::vector<std::uint64_t> regular_eval_points(std::uint64_t total, std::uint64_t interval = 1000) {
    if (interval == 0) throw UsageError("eval interval must be positive");
    std::vector<std::uint64_t> pts;
    for (std::uint64_t s = interval; s <= total; s += interval) pts.push_back(s);
    return pts;
}

// stats.csv: step,mean,median,p2,p98,n.  Missing points leave the statistic
// fields empty and report n = 0.
inline void write_stats_csv(std::ostream& os, const RewardStats& stats) {
    os << "step,mean,median,p2,p98,n\n";
    for (const auto& p : stats.points) {
        if (p.missing) {
            os << p.step << ",,,,,0\n";
        } else {
            os << p.step << ',' << csv::format(p.mean) << ',' << csv::format(p.median) << ',' << csv::format(p.p2)
               << ',' << csv::format(p.p98) << ',' << p.n << '\n';
        }
    }
}

inline void save_stats_csv(const std::filesystem::path& path, const RewardStats& stats) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_stats_csv(os, stats);
}

}  // namespace ddqn::experiment
