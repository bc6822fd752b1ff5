#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ddqn/agent.hpp"
#include "ddqn/envs/env.hpp"
#include "ddqn/errors.hpp"
#include "ddqn/nn/mlp.hpp"
#include "json.hpp"

namespace ddqn::experiment {

using envs::EnvId;

// Named Q-network layouts from the architecture ablation.
enum class ArchPreset { Linear, Relu1, Relu2, Tanh2 };

inline ArchPreset arch_preset_from_string(const std::string& name) {
    if (name == "linear") return ArchPreset::Linear;
    if (name == "relu1") return ArchPreset::Relu1;
    if (name == "relu2") return ArchPreset::Relu2;
    if (name == "tanh2") return ArchPreset::Tanh2;
    throw ConfigError("unknown architecture preset '" + name + "' (expected linear, relu1, relu2 or tanh2)");
}

inline std::string to_string(ArchPreset p) {
    switch (p) {
        case ArchPreset::Linear: return "linear";
        case ArchPreset::Relu1: return "relu1";
        case ArchPreset::Relu2: return "relu2";
        case ArchPreset::Tanh2: return "tanh2";
    }
    return "?";
}

inline nn::Architecture architecture_for(EnvId env, ArchPreset preset, int width = 128) {
    const int in = envs::obs_dim(env), out = envs::action_count(env);
    switch (preset) {
        case ArchPreset::Linear: return nn::q_network(in, out, {}, nn::Activation::Identity);
        case ArchPreset::Relu1: return nn::q_network(in, out, {width}, nn::Activation::ReLU);
        case ArchPreset::Relu2: return nn::q_network(in, out, {width, width}, nn::Activation::ReLU);
        case ArchPreset::Tanh2: return nn::q_network(in, out, {width, width}, nn::Activation::Tanh);
    }
    throw ConfigError("unknown architecture preset");
}

struct TrainConfig {
    EnvId env = EnvId::MountainCar;
    nn::Architecture architecture;
    EpsilonSchedule schedule = EpsilonSchedule::constant(0.0);
    std::uint64_t total_env_steps = 160'000;
    std::uint64_t buffer_capacity = 200'000;
    std::uint64_t batch_size = 256;
    double gamma = 0.99;
    double alpha = 5e-4;
    std::uint64_t target_sync_period = 1000;
    std::uint64_t seed = 0;
    std::uint64_t learn_start = 256;
    std::vector<std::uint64_t> snapshot_steps;
    bool timeout_bootstrap = true;
    // Most recent transitions kept in the run log; 0 keeps all of them.
    std::uint64_t trace_capacity = 0;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Hyper-parameter defaults for one task: two 128-unit ReLU hidden layers,
// batch 256, gamma 0.99, Adam 5e-4, target sync every 1000 steps, replay
// 200k for MountainCar and 50k otherwise, greedy behaviour policy.
inline TrainConfig defaults_for(EnvId env) {
    TrainConfig c;
    c.env = env;
    c.architecture = architecture_for(env, ArchPreset::Relu2);
    if (env == EnvId::MountainCar) {
        c.total_env_steps = 160'000;
        c.buffer_capacity = 200'000;
        c.snapshot_steps = {10'000, 20'000, 40'000, 160'000};
    } else {
        c.total_env_steps = 100'000;
        c.buffer_capacity = 50'000;
    }
    return c;
}

inline void validate(const TrainConfig& c) {
    nn::validate(c.architecture);
    if (c.architecture.front().input_dim != envs::obs_dim(c.env))
        throw ConfigError("architecture input_dim must equal the observation size of " + envs::to_string(c.env));
    if (c.architecture.back().output_dim != envs::action_count(c.env))
        throw ConfigError("architecture output_dim must equal the action count of " + envs::to_string(c.env));
    if (c.architecture.back().activation != nn::Activation::Identity)
        throw ConfigError("the Q-network output layer must use the identity activation");
    if (c.buffer_capacity == 0) throw ConfigError("buffer_capacity must be positive");
    if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (c.learn_start < c.batch_size) throw ConfigError("learn_start must be at least batch_size");
    if (c.buffer_capacity < c.batch_size) throw ConfigError("buffer_capacity must be at least batch_size");
    if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (c.target_sync_period == 0) throw ConfigError("target_sync_period must be positive");
    const auto& s = c.schedule;
    if (s.kind == EpsilonSchedule::Kind::Constant) {
        if (!(s.value >= 0.0 && s.value <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    } else {
        (void)EpsilonSchedule::linear(s.start, s.end, s.decay_steps);
    }
}

// ---- JSON ----------------------------------------------------------------

inline nlohmann::ordered_json schedule_to_json(const EpsilonSchedule& s) {
    if (s.kind == EpsilonSchedule::Kind::Constant) return {{"kind", "constant"}, {"value", s.value}};
    return {{"kind", "linear"}, {"start", s.start}, {"end", s.end}, {"decay_steps", s.decay_steps}};
}

inline EpsilonSchedule schedule_from_json(const nlohmann::json& j) {
    if (j.is_number()) return EpsilonSchedule::constant(j.get<double>());
    const auto kind = j.value("kind", std::string("constant"));
    if (kind == "constant") return EpsilonSchedule::constant(j.value("value", 0.0));
    if (kind == "linear")
        return EpsilonSchedule::linear(j.value("start", 1.0), j.value("end", 0.0),
                                       j.value("decay_steps", std::uint64_t{1}));
    throw ConfigError("unknown epsilon schedule kind '" + kind + "'");
}

inline nlohmann::ordered_json to_json(const TrainConfig& c) {
    nlohmann::ordered_json arch = nlohmann::ordered_json::array();
    for (const auto& l : c.architecture)
        arch.push_back({{"input_dim", l.input_dim}, {"output_dim", l.output_dim}, {"activation", nn::to_string(l.activation)}});
    return {
        {"env", envs::to_string(c.env)},
        {"architecture", arch},
        {"schedule", schedule_to_json(c.schedule)},
        {"total_env_steps", c.total_env_steps},
        {"buffer_capacity", c.buffer_capacity},
        {"batch_size", c.batch_size},
        {"gamma", c.gamma},
        {"alpha", c.alpha},
        {"target_sync_period", c.target_sync_period},
        {"seed", c.seed},
        {"learn_start", c.learn_start},
        {"snapshot_steps", c.snapshot_steps},
        {"timeout_bootstrap", c.timeout_bootstrap},
        {"trace_capacity", c.trace_capacity},
    };
}

// Fields missing from `j` keep the defaults of the configured environment.
inline TrainConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {
        "env",  "architecture", "schedule", "total_env_steps", "buffer_capacity", "batch_size",  "gamma",
        "alpha", "target_sync_period", "seed", "learn_start", "snapshot_steps", "timeout_bootstrap",
        "trace_capacity"};
    for (const auto& item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw ConfigError("unknown config field '" + item.key() + "'");
    try {
        TrainConfig c = defaults_for(envs::env_from_string(j.value("env", std::string("mountaincar"))));
        if (j.contains("architecture")) {
            const auto& a = j.at("architecture");
            if (a.is_string()) {
                c.architecture = architecture_for(c.env, arch_preset_from_string(a.get<std::string>()));
            } else {
                c.architecture.clear();
                for (const auto& l : a)
                    c.architecture.push_back({l.at("input_dim").get<int>(), l.at("output_dim").get<int>(),
                                              nn::activation_from_string(l.value("activation", std::string("identity")))});
            }
        }
        if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
        c.total_env_steps = j.value("total_env_steps", c.total_env_steps);
        c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.gamma = j.value("gamma", c.gamma);
        c.alpha = j.value("alpha", c.alpha);
        c.target_sync_period = j.value("target_sync_period", c.target_sync_period);
        c.seed = j.value("seed", c.seed);
        c.learn_start = j.value("learn_start", c.learn_start);
        if (j.contains("snapshot_steps")) c.snapshot_steps = j.at("snapshot_steps").get<std::vector<std::uint64_t>>();
        c.timeout_bootstrap = j.value("timeout_bootstrap", c.timeout_bootstrap);
        c.trace_capacity = j.value("trace_capacity", c.trace_capacity);
        validate(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline TrainConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return config_from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline std::string config_text(const TrainConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace ddqn::experiment
