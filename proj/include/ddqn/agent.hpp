#pragma once

// Double-DQN learner.
//
// The online network picks the bootstrap action, the target network values
// it:  y = r + gamma * Q_target(s', argmax_a Q_online(s', a))  (y = r when
// done).  The loss is the batch mean of (Q_online(s, a) - y)^2 with y held
// constant, minimised by one Adam step per call to train_step.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ddqn/errors.hpp"
#include "ddqn/nn/adam.hpp"
#include "ddqn/nn/mlp.hpp"
#include "ddqn/nn/snapshot.hpp"
#include "ddqn/replay.hpp"
#include "ddqn/rng.hpp"

namespace ddqn {

struct EpsilonSchedule {
    enum class Kind { Constant, LinearDecay };

    Kind kind = Kind::Constant;
    double value = 0.0;
    double start = 1.0;
    double end = 0.0;
    std::uint64_t decay_steps = 1;

    static EpsilonSchedule constant(double eps) {
        if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
        return {Kind::Constant, eps, eps, eps, 1};
    }

    static EpsilonSchedule linear(double start, double end, std::uint64_t decay_steps) {
        if (!(start >= 0.0 && start <= 1.0 && end >= 0.0 && end <= 1.0))
            throw ConfigError("epsilon schedule endpoints must lie in [0, 1]");
        if (end > start) throw ConfigError("epsilon schedule must not increase");
        if (decay_steps == 0) throw ConfigError("epsilon decay_steps must be positive");
        return {Kind::LinearDecay, start, start, end, decay_steps};
    }

    friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

// Constant -> value; LinearDecay -> max(end, start + (end - start) * step / decay_steps).
inline double epsilon_at(const EpsilonSchedule& schedule, std::uint64_t step) {
    if (schedule.kind == EpsilonSchedule::Kind::Constant) return schedule.value;
    const double frac = static_cast<double>(step) / static_cast<double>(schedule.decay_steps);
    return std::max(schedule.end, schedule.start + (schedule.end - schedule.start) * frac);
}

struct AgentConfig {
    double gamma = 0.99;
    nn::AdamConfig adam{};
    std::uint64_t target_sync_period = 1000;

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct Agent {
    nn::MlpParams online;
    nn::MlpParams target;
    nn::AdamState opt;
    AgentConfig config;
    std::uint64_t env_steps = 0;

    friend bool operator==(const Agent&, const Agent&) = default;
};

// Fresh agent: Glorot-initialised online network, target an exact copy.
inline Agent make_agent(const nn::Architecture& arch, const AgentConfig& config, Rng& rng) {
    if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (config.target_sync_period == 0) throw ConfigError("target_sync_period must be positive");
    if (arch.back().activation != nn::Activation::Identity)
        throw ConfigError("the Q-network output layer must use the identity activation");
    Agent agent;
    agent.online = nn::glorot_init(arch, rng);
    agent.target = agent.online;
    agent.opt = nn::adam_init(agent.online);
    agent.config = config;
    return agent;
}

inline int greedy_action(const nn::MlpParams& q, std::span<const double> obs) {
    const Eigen::Map<const Eigen::VectorXd> x(obs.data(), static_cast<Eigen::Index>(obs.size()));
    return nn::argmax(nn::predict(q, x));
}

// With probability epsilon a uniformly random action, otherwise the greedy
// action of the online network (lowest index on ties).  Always consumes one
// uniform draw, plus one more when exploring.
inline int select_action(const Agent& agent, std::span<const double> obs, double epsilon, Rng& rng) {
    const double u = rng.uniform01();
    if (u < epsilon) return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(agent.online.output_dim())));
    return greedy_action(agent.online, obs);
}

inline Eigen::VectorXd ddqn_targets(const Batch& batch, const nn::MlpParams& online, const nn::MlpParams& target,
                                    double gamma) {
    if (batch.size() == 0) throw UsageError("ddqn_targets: empty batch");
    const Eigen::MatrixXd q_online_next = nn::forward_batch(online, batch.next_states);
    const Eigen::MatrixXd q_target_next = nn::forward_batch(target, batch.next_states);
    if (!q_online_next.allFinite() || !q_target_next.allFinite())
        throw TrainingError("ddqn_targets: non-finite network output");
    Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        if (batch.dones[static_cast<std::size_t>(j)]) {
            y[j] = batch.rewards[j];
        } else {
            const int best = nn::argmax(q_online_next.col(j));
            y[j] = batch.rewards[j] + gamma * q_target_next(best, j);
        }
    }
    return y;
}

inline Eigen::VectorXd ddqn_targets(const std::vector<Transition>& batch, const nn::MlpParams& online,
                                    const nn::MlpParams& target, double gamma) {
    return ddqn_targets(to_batch(batch), online, target, gamma);
}

// Squared-error loss and its gradient with respect to the online parameters
// for fixed targets y.
struct LossAndGrad {
    double loss = 0.0;
    nn::MlpParams grad;
};

inline LossAndGrad td_loss_and_grad(const nn::MlpParams& online, const Batch& batch, const Eigen::VectorXd& y) {
    nn::GradCache cache;
    const Eigen::MatrixXd q = nn::forward_batch(online, batch.states, &cache);
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(q.rows(), n);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const int a = batch.actions[static_cast<std::size_t>(j)];
        if (a < 0 || a >= q.rows()) throw UsageError("train_step: action index out of range");
        const double residual = q(a, j) - y[j];
        loss += residual * residual;
        output_grad(a, j) = 2.0 * residual / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) throw TrainingError("train_step: non-finite loss");
    return {loss, nn::backward(online, cache, output_grad)};
}

// One DDQN update of the online network; returns the pre-update loss.
inline double train_step(Agent& agent, const Batch& batch) {
    const Eigen::VectorXd y = ddqn_targets(batch, agent.online, agent.target, agent.config.gamma);
    auto [loss, grad] = td_loss_and_grad(agent.online, batch, y);
    nn::adam_step(agent.online, grad, agent.opt, agent.config.adam);
    return loss;
}

inline double train_step(Agent& agent, const std::vector<Transition>& batch) {
    return train_step(agent, to_batch(batch));
}

// Hard copy online -> target when env_steps is a positive multiple of the
// sync period.  Returns whether a copy happened.
inline bool maybe_sync_target(Agent& agent) {
    if (agent.env_steps > 0 && agent.env_steps % agent.config.target_sync_period == 0) {
        agent.target = agent.online;
        return true;
    }
    return false;
}

// Checkpoint: magic "DDQNCKP1", u32 version, u64 env_steps, u64 adam t,
// f64 gamma, then four network records in snapshot format: online, target,
// Adam first moments, Adam second moments.
inline void save_checkpoint(const std::filesystem::path& path, const Agent& agent) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write("DDQNCKP1", 8);
    nn::detail::write_pod<std::uint32_t>(os, 1);
    nn::detail::write_pod<std::uint64_t>(os, agent.env_steps);
    nn::detail::write_pod<std::uint64_t>(os, agent.opt.t);
    nn::detail::write_pod<double>(os, agent.config.gamma);
    nn::write_snapshot(os, agent.online);
    nn::write_snapshot(os, agent.target);
    nn::write_snapshot(os, agent.opt.m);
    nn::write_snapshot(os, agent.opt.v);
}

// Restores networks, optimiser state and step counter.  Hyper-parameters
// other than gamma come from `config`.
inline Agent load_checkpoint(const std::filesystem::path& path, AgentConfig config) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[8] = {};
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "DDQNCKP1") throw IoError("checkpoint: bad magic");
    if (nn::detail::read_pod<std::uint32_t>(is) != 1) throw IoError("checkpoint: unsupported version");
    Agent agent;
    agent.env_steps = nn::detail::read_pod<std::uint64_t>(is);
    agent.opt.t = nn::detail::read_pod<std::uint64_t>(is);
    config.gamma = nn::detail::read_pod<double>(is);
    agent.config = config;
    agent.online = nn::read_snapshot(is);
    agent.target = nn::read_snapshot(is);
    agent.opt.m = nn::read_snapshot(is);
    agent.opt.v = nn::read_snapshot(is);
    if (!agent.online.same_shape(agent.target) || !agent.online.same_shape(agent.opt.m) ||
        !agent.online.same_shape(agent.opt.v))
        throw IoError("checkpoint: network records disagree in shape");
    return agent;
}

}  // namespace ddqn
