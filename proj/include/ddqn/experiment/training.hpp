#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ddqn/agent.hpp"
#include "ddqn/envs/env.hpp"
#include "ddqn/experiment/config.hpp"
#include "ddqn/experiment/run_log.hpp"
#include "ddqn/replay.hpp"
#include "ddqn/rng.hpp"

namespace ddqn::experiment {

// Independent random streams of one run, all derived from config.seed.
enum class Stream : std::uint64_t { Init = 0, Reset = 1, Behaviour = 2, Replay = 3 };

inline Rng stream_rng(std::uint64_t seed, Stream s) {
    return Rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
}

// Called after every completed episode; returning true ends the run early.
using StopPredicate = std::function<bool(const RunLog&)>;

// Runs the DDQN loop for config.total_env_steps environment steps:
// act -> store -> (once the buffer holds learn_start transitions) sample and
// train -> maybe sync target -> snapshot.  Episodes restart on termination.
// A non-finite loss ends the run with RunLog::error set.
inline RunLog run_training(const TrainConfig& config, const StopPredicate& stop = {}) {
    validate(config);
    RunLog log;
    log.config = config;

    Rng init_rng = stream_rng(config.seed, Stream::Init);
    Rng reset_rng = stream_rng(config.seed, Stream::Reset);
    Rng behaviour_rng = stream_rng(config.seed, Stream::Behaviour);
    Rng replay_rng = stream_rng(config.seed, Stream::Replay);

    AgentConfig agent_config;
    agent_config.gamma = config.gamma;
    agent_config.adam.alpha = config.alpha;
    agent_config.target_sync_period = config.target_sync_period;
    Agent agent = make_agent(config.architecture, agent_config, init_rng);

    const int obs_dim = envs::obs_dim(config.env);
    ReplayBuffer buffer(config.buffer_capacity, obs_dim);
    Batch batch;
    std::deque<TraceRow> recent;  // used only when trace_capacity > 0

    envs::EnvState state;
    bool need_reset = true;
    EpisodeRecord episode;

    for (std::uint64_t step = 1; step <= config.total_env_steps; ++step) {
        if (need_reset) {
            state = envs::reset(config.env, reset_rng);
            episode = {step, 0, 0.0};
            need_reset = false;
        }
        const double eps = epsilon_at(config.schedule, agent.env_steps);
        const int action = select_action(agent, state.obs, eps, behaviour_rng);
        envs::StepResult result = envs::step(state, action);

        TraceRow row;
        row.step = step;
        row.timeout = result.terminal_is_timeout;
        row.t = {state.obs, action, result.reward, result.next.obs,
                 result.done && !(result.terminal_is_timeout && config.timeout_bootstrap)};
        buffer.push(row.t);
        if (config.trace_capacity == 0) {
            log.trace.push_back(std::move(row));
        } else {
            recent.push_back(std::move(row));
            if (recent.size() > config.trace_capacity) recent.pop_front();
        }

        agent.env_steps = step;
        episode.length += 1;
        episode.ret += result.reward;

        if (buffer.size() >= config.learn_start) {
            buffer.sample_into(batch, config.batch_size, replay_rng);
            try {
                (void)train_step(agent, batch);
            } catch (const TrainingError& e) {
                log.error = std::string(e.what()) + " (seed " + std::to_string(config.seed) + ", step " +
                            std::to_string(step) + ")";
                log.steps_completed = step;
                break;
            }
        }
        maybe_sync_target(agent);
        if (std::find(config.snapshot_steps.begin(), config.snapshot_steps.end(), step) != config.snapshot_steps.end())
            log.snapshots.emplace(step, agent.online);
        log.steps_completed = step;

        state = std::move(result.next);
        if (result.done) {
            log.episodes.push_back(episode);
            need_reset = true;
            if (stop && stop(log)) {
                log.stopped_early = step < config.total_env_steps;
                break;
            }
        }
    }
    if (config.trace_capacity != 0) log.trace.assign(recent.begin(), recent.end());
    return log;
}

// Runs every config, at most `parallelism` at a time.  Output order matches
// input order and does not depend on parallelism.  A run that throws is
// reported through its RunLog::error without affecting the others.
inline std::vector<RunLog> run_grid(const std::vector<TrainConfig>& configs, unsigned parallelism,
                                    const std::function<void(std::size_t, const RunLog&)>& on_done = {}) {
    if (parallelism == 0) throw UsageError("run_grid: parallelism must be positive");
    std::vector<RunLog> logs(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            try {
                logs[i] = run_training(configs[i]);
            } catch (const std::exception& e) {
                logs[i] = RunLog{};
                logs[i].config = configs[i];
                logs[i].error = e.what();
            }
            if (on_done) {
                std::lock_guard lock(report_mutex);
                on_done(i, logs[i]);
            }
        }
    };
    const unsigned n_workers = std::min<unsigned>(parallelism, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    return logs;
}

}  // namespace ddqn::experiment
