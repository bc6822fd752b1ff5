#pragma once

// Replays recorded reference traces through `step` and reports the largest
// per-component deviation.
//
// Recorded trace CSV (written by tests/reference/gen_reference_traces.py):
//   episode,t,s0..s{d-1},action,reward,terminated,truncated,n0..n{d-1}
// where s/n are the internal physics before/after the step.  Each episode is
// replayed from its recorded initial state; within an episode the
// implementation runs free, so errors accumulate as they would in training.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ddqn/csv.hpp"
#include "ddqn/envs/env.hpp"
#include "ddqn/errors.hpp"

namespace ddqn::envs {

struct RecordedStep {
    int episode = 0;
    int t = 0;
    std::vector<double> before;
    int action = 0;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    std::vector<double> after;
};

inline std::vector<RecordedStep> load_recorded_trace(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::string line;
    if (!csv::next_line(is, line)) throw IoError(path.string() + ": empty file");
    const std::size_t columns = csv::split(line).size();
    if (columns < 8 || (columns - 6) % 2 != 0) throw IoError(path.string() + ": malformed header");
    const std::size_t d = (columns - 6) / 2;
    std::vector<RecordedStep> steps;
    while (csv::next_line(is, line)) {
        const auto f = csv::split(line);
        if (f.size() != columns) throw IoError(path.string() + ": malformed row: " + line);
        RecordedStep r;
        r.episode = csv::parse_int<int>(f[0]);
        r.t = csv::parse_int<int>(f[1]);
        for (std::size_t i = 0; i < d; ++i) r.before.push_back(csv::parse_double(f[2 + i]));
        r.action = csv::parse_int<int>(f[2 + d]);
        r.reward = csv::parse_double(f[3 + d]);
        r.terminated = csv::parse_int<int>(f[4 + d]) != 0;
        r.truncated = csv::parse_int<int>(f[5 + d]) != 0;
        for (std::size_t i = 0; i < d; ++i) r.after.push_back(csv::parse_double(f[6 + d + i]));
        steps.push_back(std::move(r));
    }
    return steps;
}

struct ConformanceReport {
    std::size_t steps = 0;
    std::size_t episodes = 0;
    double max_abs_error = 0.0;
    std::size_t worst_step = 0;
    // Steps where done / timeout disagreed with the recording.
    std::size_t termination_mismatches = 0;

    bool passed(double tolerance) const { return termination_mismatches == 0 && max_abs_error < tolerance; }
};

inline ConformanceReport check_against_recording(EnvId env, const std::vector<RecordedStep>& recording) {
    ConformanceReport report;
    const std::size_t d = env == EnvId::MountainCar ? 2 : 4;
    EnvState state;
    for (std::size_t k = 0; k < recording.size(); ++k) {
        const auto& r = recording[k];
        if (r.before.size() != d || r.after.size() != d) throw IoError("recorded trace has the wrong state size");
        if (r.t == 0) {
            std::array<double, 4> physics{};
            std::copy(r.before.begin(), r.before.end(), physics.begin());
            state = make_state(env, physics);
            ++report.episodes;
        }
        const StepResult res = step(state, r.action);
        for (std::size_t i = 0; i < d; ++i) {
            const double err = std::abs(res.next.physics[i] - r.after[i]);
            if (err > report.max_abs_error || std::isnan(err)) {
                report.max_abs_error = std::isnan(err) ? INFINITY : err;
                report.worst_step = k;
            }
        }
        if (res.done != (r.terminated || r.truncated) || res.terminal_is_timeout != (r.truncated && !r.terminated))
            ++report.termination_mismatches;
        ++report.steps;
        state = res.next;
        if (res.done && k + 1 < recording.size() && recording[k + 1].t != 0) {
            ++report.termination_mismatches;
            state.done = false;
        }
    }
    return report;
}

inline std::filesystem::path recording_path(const std::filesystem::path& dir, EnvId env) {
    return dir / ("reference_" + to_string(env) + ".csv");
}

}  // namespace ddqn::envs
