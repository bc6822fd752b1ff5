#pragma once

// Record of one training run and its on-disk layout:
//
//   <dir>/config.json          the TrainConfig echo
//   <dir>/run.json             version stamp, steps completed, error (if any)
//   <dir>/episodes.csv         start_step,length,return
//   <dir>/transitions.csv      trace format (see envs/trace.hpp)
//   <dir>/snapshot_<step>.bin  online network after env step <step>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddqn/csv.hpp"
#include "ddqn/envs/trace.hpp"
#include "ddqn/errors.hpp"
#include "ddqn/experiment/config.hpp"
#include "ddqn/nn/snapshot.hpp"
#include "ddqn/transition.hpp"

#ifndef DDQN_VERSION
#define DDQN_VERSION "dev"
#endif

namespace ddqn::experiment {

struct EpisodeRecord {
    std::uint64_t start_step = 0;  // env step of the first transition (1-based)
    std::uint64_t length = 0;
    double ret = 0.0;              // undiscounted return

    std::uint64_t end_step() const { return start_step + length - 1; }

    friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct RunLog {
    TrainConfig config;
    std::string version = DDQN_VERSION;
    std::uint64_t steps_completed = 0;
    std::vector<EpisodeRecord> episodes;
    // Transitions in step order.  When config.trace_capacity > 0 only the
    // most recent trace_capacity of them are kept.
    std::vector<TraceRow> trace;
    std::map<std::uint64_t, nn::MlpParams> snapshots;
    bool stopped_early = false;
    // Empty on success, otherwise the diagnostic of the aborted run.
    std::string error;

    bool ok() const { return error.empty(); }

    friend bool operator==(const RunLog&, const RunLog&) = default;
};

inline void write_episodes_csv(std::ostream& os, const std::vector<EpisodeRecord>& episodes) {
    os << "start_step,length,return\n";
    for (const auto& e : episodes) os << e.start_step << ',' << e.length << ',' << csv::format(e.ret) << '\n';
}

inline std::vector<EpisodeRecord> read_episodes_csv(std::istream& is) {
    std::string line;
    if (!csv::next_line(is, line) || line != "start_step,length,return") throw IoError("episodes.csv: bad header");
    std::vector<EpisodeRecord> out;
    while (csv::next_line(is, line)) {
        const auto f = csv::split(line);
        if (f.size() != 3) throw IoError("episodes.csv: bad row: " + line);
        out.push_back({csv::parse_int<std::uint64_t>(f[0]), csv::parse_int<std::uint64_t>(f[1]), csv::parse_double(f[2])});
    }
    return out;
}

inline std::filesystem::path snapshot_path(const std::filesystem::path& dir, std::uint64_t step) {
    return dir / ("snapshot_" + std::to_string(step) + ".bin");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("write to " + path.string() + " failed");
}

inline void save_run_log(const std::filesystem::path& dir, const RunLog& log) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.json", config_text(log.config));
    nlohmann::ordered_json meta = {{"version", log.version},
                                   {"steps_completed", log.steps_completed},
                                   {"stopped_early", log.stopped_early},
                                   {"error", log.error}};
    write_text(dir / "run.json", meta.dump(2) + "\n");
    {
        std::ofstream os(dir / "episodes.csv", std::ios::trunc | std::ios::binary);
        if (!os) throw IoError("cannot write episodes.csv in " + dir.string());
        write_episodes_csv(os, log.episodes);
    }
    {
        std::ofstream os(dir / "transitions.csv", std::ios::trunc | std::ios::binary);
        if (!os) throw IoError("cannot write transitions.csv in " + dir.string());
        envs::write_trace(os, log.trace, envs::obs_dim(log.config.env));
    }
    for (const auto& [step, params] : log.snapshots) nn::save_snapshot(snapshot_path(dir, step), params);
}

inline RunLog load_run_log(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a run directory");
    RunLog log;
    log.config = load_config(dir / "config.json");
    if (std::filesystem::exists(dir / "run.json")) {
        std::ifstream is(dir / "run.json");
        const auto meta = nlohmann::json::parse(is);
        log.version = meta.value("version", std::string());
        log.steps_completed = meta.value("steps_completed", std::uint64_t{0});
        log.stopped_early = meta.value("stopped_early", false);
        log.error = meta.value("error", std::string());
    }
    {
        std::ifstream is(dir / "episodes.csv");
        if (!is) throw IoError("missing episodes.csv in " + dir.string());
        log.episodes = read_episodes_csv(is);
    }
    if (std::filesystem::exists(dir / "transitions.csv")) log.trace = envs::load_trace(dir / "transitions.csv");
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.starts_with("snapshot_") && name.ends_with(".bin")) {
            const auto digits = name.substr(9, name.size() - 13);
            log.snapshots.emplace(csv::parse_int<std::uint64_t>(digits), nn::load_snapshot(entry.path()));
        }
    }
    return log;
}

}  // namespace ddqn::experiment
