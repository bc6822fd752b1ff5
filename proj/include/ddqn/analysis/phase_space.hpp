#pragma once

// Phase-space diagnostics for MountainCar: visit histograms over transition
// windows, vector fields of fixed controllers, rollouts from random starts,
// and the first step at which a run reached the goal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddqn/agent.hpp"
#include "ddqn/csv.hpp"
#include "ddqn/envs/env.hpp"
#include "ddqn/errors.hpp"
#include "ddqn/experiment/run_log.hpp"
#include "ddqn/nn/mlp.hpp"
#include "ddqn/rng.hpp"
#include "ddqn/transition.hpp"

namespace ddqn::analysis {

namespace mc = envs::mountain_car;

// ---- transition windows ----------------------------------------------------

// The n transitions with step indices in (checkpoint - n, checkpoint].
inline std::vector<TraceRow> transition_window(const experiment::RunLog& log, std::uint64_t checkpoint,
                                               std::uint64_t n) {
    if (n == 0) throw UsageError("transition_window: n must be positive");
    if (checkpoint < n)
        throw AnalysisError("transition window (" + std::to_string(static_cast<std::int64_t>(checkpoint) -
                                                                   static_cast<std::int64_t>(n)) +
                            ", " + std::to_string(checkpoint) + "] starts before the first step");
    const std::uint64_t first = checkpoint - n + 1;
    auto lo = std::lower_bound(log.trace.begin(), log.trace.end(), first,
                               [](const TraceRow& r, std::uint64_t s) { return r.step < s; });
    std::vector<TraceRow> out;
    for (auto it = lo; it != log.trace.end() && it->step <= checkpoint; ++it) out.push_back(*it);
    if (out.size() != n || out.front().step != first || out.back().step != checkpoint)
        throw AnalysisError("trace does not cover steps " + std::to_string(first) + ".." + std::to_string(checkpoint));
    return out;
}

// ---- histograms --------------------------------------------------------------

inline constexpr int kRenderCeiling = 100;

// Visit counts on an H x W grid over the MountainCar state box.  Row index
// is the velocity bin, column index the position bin, both ascending.
struct PhaseHistogram {
    int height = 100;
    int width = 100;
    double position_min = mc::kMinPosition, position_max = mc::kMaxPosition;
    double velocity_min = -mc::kMaxSpeed, velocity_max = mc::kMaxSpeed;
    int clamp = kRenderCeiling;
    std::vector<std::uint64_t> counts;  // row-major, height * width

    std::uint64_t& at(int row, int col) { return counts[static_cast<std::size_t>(row) * width + col]; }
    std::uint64_t at(int row, int col) const { return counts[static_cast<std::size_t>(row) * width + col]; }
    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

namespace detail {
inline int bin_of(double x, double lo, double hi, int bins) {
    const int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    return std::clamp(b, 0, bins - 1);
}
}  // namespace detail

inline PhaseHistogram empty_histogram(int height, int width) {
    if (height < 1 || width < 1) throw UsageError("histogram needs at least one bin per axis");
    PhaseHistogram h;
    h.height = height;
    h.width = width;
    h.counts.assign(static_cast<std::size_t>(height) * width, 0);
    return h;
}

// Adds one visit of (position, velocity).
inline void add_visit(PhaseHistogram& h, double position, double velocity) {
    if (!(position >= h.position_min && position <= h.position_max && velocity >= h.velocity_min &&
          velocity <= h.velocity_max))
        throw AnalysisError("state (" + csv::format(position) + ", " + csv::format(velocity) +
                            ") lies outside the MountainCar state box");
    h.at(detail::bin_of(velocity, h.velocity_min, h.velocity_max, h.height),
         detail::bin_of(position, h.position_min, h.position_max, h.width)) += 1;
}

// Bins the pre-action state s of every transition.
inline PhaseHistogram phase_histogram(std::span<const TraceRow> trace, int height = 100, int width = 100) {
    PhaseHistogram h = empty_histogram(height, width);
    for (const auto& row : trace) {
        if (row.t.s.size() != 2) throw AnalysisError("phase_histogram expects MountainCar observations");
        add_visit(h, row.t.s[0], row.t.s[1]);
    }
    return h;
}

// Gray level of a count: round(255 * min(c, ceiling) / ceiling).
inline int gray_level(std::uint64_t count, int ceiling = kRenderCeiling) {
    const double c = static_cast<double>(std::min<std::uint64_t>(count, static_cast<std::uint64_t>(ceiling)));
    return static_cast<int>(std::lround(255.0 * c / ceiling));
}

// P2 portable graymap, maxval 255.  The top image row is the highest
// velocity bin so the picture reads like a phase portrait.
inline void write_pgm(std::ostream& os, const PhaseHistogram& h) {
    os << "P2\n" << h.width << ' ' << h.height << "\n255\n";
    for (int row = h.height - 1; row >= 0; --row) {
        for (int col = 0; col < h.width; ++col) {
            if (col) os << ' ';
            os << gray_level(h.at(row, col), h.clamp);
        }
        os << '\n';
    }
}

// Long-format counts: position_bin,velocity_bin,position,velocity,count with
// bin-centre coordinates.
inline void write_histogram_csv(std::ostream& os, const PhaseHistogram& h) {
    os << "position_bin,velocity_bin,position,velocity,count\n";
    const double dp = (h.position_max - h.position_min) / h.width;
    const double dv = (h.velocity_max - h.velocity_min) / h.height;
    for (int row = 0; row < h.height; ++row)
        for (int col = 0; col < h.width; ++col)
            os << col << ',' << row << ',' << csv::format(h.position_min + (col + 0.5) * dp) << ','
               << csv::format(h.velocity_min + (row + 0.5) * dv) << ',' << h.at(row, col) << '\n';
}

// ---- controllers ---------------------------------------------------------------

// A fixed MountainCar controller: greedy in a Q-network, or the uncontrolled
// system (the no-push action everywhere) when no network is set.
struct Policy {
    std::optional<nn::MlpParams> network;

    static Policy uncontrolled() { return {}; }
    static Policy greedy(nn::MlpParams q) { return {std::move(q)}; }

    bool controlled() const { return network.has_value(); }

    int action(std::span<const double> obs) const {
        return network ? greedy_action(*network, obs) : mc::kNoPush;
    }
};

struct FieldPoint {
    double position = 0.0, velocity = 0.0;
    double dp = 0.0, dv = 0.0;
    int action = 0;
};

struct VectorField {
    bool controlled = false;
    int height = 0, width = 0;
    std::vector<FieldPoint> points;  // velocity-major: index = row * width + col
};

// One-step displacement of the dynamics under `policy` on an evenly spaced
// grid (endpoints included) over the state box.
inline VectorField vector_field(const Policy& policy, int height = 40, int width = 40) {
    if (height < 2 || width < 2) throw UsageError("vector_field grid must be at least 2x2");
    VectorField f{policy.controlled(), height, width, {}};
    f.points.reserve(static_cast<std::size_t>(height) * width);
    for (int row = 0; row < height; ++row) {
        const double v = std::lerp(-mc::kMaxSpeed, mc::kMaxSpeed, static_cast<double>(row) / (height - 1));
        for (int col = 0; col < width; ++col) {
            const double p = std::lerp(mc::kMinPosition, mc::kMaxPosition, static_cast<double>(col) / (width - 1));
            const auto state = envs::mountain_car_state(p, v);
            const int a = policy.action(state.obs);
            const auto next = envs::step(state, a).next;
            f.points.push_back({p, v, next.physics[0] - p, next.physics[1] - v, a});
        }
    }
    return f;
}

inline void write_field_csv(std::ostream& os, const VectorField& f) {
    os << "p,v,dp,dv\n";
    for (const auto& pt : f.points)
        os << csv::format(pt.position) << ',' << csv::format(pt.velocity) << ',' << csv::format(pt.dp) << ','
           << csv::format(pt.dv) << '\n';
}

// ---- rollouts ------------------------------------------------------------------

struct Trajectory {
    std::vector<std::array<double, 2>> states;  // initial state first
    bool reached_goal = false;
};

// n rollouts from fresh MountainCar resets, each following the policy for
// max_steps steps or until the episode ends.
inline std::vector<Trajectory> rollout_random_inits(const Policy& policy, int n_trajectories, int max_steps, Rng& rng) {
    if (n_trajectories < 1) throw UsageError("rollout_random_inits: need at least one trajectory");
    if (max_steps < 0) throw UsageError("rollout_random_inits: max_steps must be non-negative");
    const auto goal = envs::goal_region(envs::EnvId::MountainCar);
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(n_trajectories));
    for (int i = 0; i < n_trajectories; ++i) {
        Trajectory traj;
        auto state = envs::reset(envs::EnvId::MountainCar, rng);
        traj.states.push_back({state.physics[0], state.physics[1]});
        for (int t = 0; t < max_steps && !state.done; ++t) {
            state = envs::step(state, policy.action(state.obs)).next;
            traj.states.push_back({state.physics[0], state.physics[1]});
            if (goal(state.obs)) traj.reached_goal = true;
        }
        out.push_back(std::move(traj));
    }
    return out;
}

inline int goal_count(const std::vector<Trajectory>& trajectories) {
    return static_cast<int>(std::count_if(trajectories.begin(), trajectories.end(),
                                          [](const Trajectory& t) { return t.reached_goal; }));
}

inline void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories) {
    os << "traj_id,t,p,v\n";
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        for (std::size_t t = 0; t < trajectories[i].states.size(); ++t)
            os << i << ',' << t << ',' << csv::format(trajectories[i].states[t][0]) << ','
               << csv::format(trajectories[i].states[t][1]) << '\n';
}

// ---- goal detection --------------------------------------------------------------

// Earliest logged step whose resulting observation satisfies the task's
// goal predicate.
inline std::optional<std::uint64_t> first_goal_step(const experiment::RunLog& log) {
    const auto goal = envs::goal_region(log.config.env);
    for (const auto& row : log.trace)
        if (goal(row.t.s_next)) return row.step;
    return std::nullopt;
}

}  // namespace ddqn::analysis
