#pragma once

// Uniform interface over the three classic-control tasks.  Stepping is a pure
// function of (state, action); all randomness enters through `reset`.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ddqn/envs/acrobot.hpp"
#include "ddqn/envs/cart_pole.hpp"
#include "ddqn/envs/mountain_car.hpp"
#include "ddqn/errors.hpp"
#include "ddqn/rng.hpp"

namespace ddqn::envs {

enum class EnvId { MountainCar, CartPole, Acrobot };

inline std::string to_string(EnvId env) {
    switch (env) {
        case EnvId::MountainCar: return "mountaincar";
        case EnvId::CartPole: return "cartpole";
        case EnvId::Acrobot: return "acrobot";
    }
    return "?";
}

inline EnvId env_from_string(const std::string& name) {
    if (name == "mountaincar" || name == "MountainCar-v0" || name == "mountaincar-v0") return EnvId::MountainCar;
    if (name == "cartpole" || name == "CartPole-v0" || name == "cartpole-v0") return EnvId::CartPole;
    if (name == "acrobot" || name == "Acrobot-v1" || name == "acrobot-v1" || name == "acrobat-v1")
        return EnvId::Acrobot;
    throw ConfigError("unknown environment '" + name + "'");
}

inline int obs_dim(EnvId env) {
    switch (env) {
        case EnvId::MountainCar: return 2;
        case EnvId::CartPole: return 4;
        case EnvId::Acrobot: return 6;
    }
    return 0;
}

inline int action_count(EnvId env) {
    switch (env) {
        case EnvId::MountainCar: return mountain_car::kActions;
        case EnvId::CartPole: return cart_pole::kActions;
        case EnvId::Acrobot: return acrobot::kActions;
    }
    return 0;
}

inline int step_limit(EnvId env) {
    switch (env) {
        case EnvId::MountainCar: return mountain_car::kStepLimit;
        case EnvId::CartPole: return cart_pole::kStepLimit;
        case EnvId::Acrobot: return acrobot::kStepLimit;
    }
    return 0;
}

// Per-step reward: -1 for MountainCar and Acrobot, +1 for CartPole.
inline double step_reward(EnvId env) { return env == EnvId::CartPole ? 1.0 : -1.0; }

struct EnvState {
    EnvId env = EnvId::MountainCar;
    // Internal physical state.  MountainCar uses the first two entries
    // (position, velocity); CartPole (x, x_dot, theta, theta_dot); Acrobot
    // (theta1, theta2, dtheta1, dtheta2).
    std::array<double, 4> physics{};
    // Agent-facing observation: the physics for MountainCar / CartPole, the
    // six-vector (cos t1, sin t1, cos t2, sin t2, dt1, dt2) for Acrobot.
    std::vector<double> obs;
    std::uint32_t steps_in_episode = 0;
    bool done = false;

    friend bool operator==(const EnvState&, const EnvState&) = default;
};

inline std::vector<double> observe(EnvId env, const std::array<double, 4>& physics) {
    switch (env) {
        case EnvId::MountainCar: return {physics[0], physics[1]};
        case EnvId::CartPole: return {physics.begin(), physics.end()};
        case EnvId::Acrobot: {
            const auto o = acrobot::observe(physics);
            return {o.begin(), o.end()};
        }
    }
    return {};
}

// State at the start of an episode with the given physics.
inline EnvState make_state(EnvId env, const std::array<double, 4>& physics) {
    return {env, physics, observe(env, physics), 0, false};
}

inline EnvState mountain_car_state(double position, double velocity) {
    return make_state(EnvId::MountainCar, {position, velocity, 0.0, 0.0});
}

inline EnvState reset(EnvId env, Rng& rng) {
    std::array<double, 4> physics{};
    switch (env) {
        case EnvId::MountainCar:
            physics[0] = rng.uniform(mountain_car::kResetLow, mountain_car::kResetHigh);
            break;
        case EnvId::CartPole:
            for (auto& x : physics) x = rng.uniform(-cart_pole::kResetBound, cart_pole::kResetBound);
            break;
        case EnvId::Acrobot:
            for (auto& x : physics) x = rng.uniform(-acrobot::kResetBound, acrobot::kResetBound);
            break;
    }
    return make_state(env, physics);
}

struct StepResult {
    EnvState next;
    double reward = 0.0;
    bool done = false;
    // True when the episode ended only because the step limit expired.
    bool terminal_is_timeout = false;

    const std::vector<double>& next_obs() const { return next.obs; }
};

// Whether the physical state is a goal/failure terminal (ignores the step limit).
inline bool is_terminal_physics(EnvId env, const std::array<double, 4>& physics) {
    switch (env) {
        case EnvId::MountainCar: return mountain_car::at_goal(physics[0], physics[1]);
        case EnvId::CartPole: return cart_pole::failed(physics);
        case EnvId::Acrobot: return acrobot::tip_above_bar(physics);
    }
    return false;
}

inline StepResult step(const EnvState& state, int action) {
    const EnvId env = state.env;
    if (action < 0 || action >= action_count(env))
        throw UsageError("step: action " + std::to_string(action) + " out of range for " + to_string(env));
    if (state.done) throw UsageError("step: episode is already done; call reset");

    std::array<double, 4> physics{};
    switch (env) {
        case EnvId::MountainCar: {
            const auto next = mountain_car::advance({state.physics[0], state.physics[1]}, action);
            physics = {next.position, next.velocity, 0.0, 0.0};
            break;
        }
        case EnvId::CartPole: physics = cart_pole::advance(state.physics, action); break;
        case EnvId::Acrobot: physics = acrobot::advance(state.physics, action); break;
    }

    StepResult r;
    r.next = {env, physics, observe(env, physics), state.steps_in_episode + 1, false};
    r.reward = step_reward(env);
    const bool terminal = is_terminal_physics(env, physics);
    const bool timeout = r.next.steps_in_episode >= static_cast<std::uint32_t>(step_limit(env));
    r.done = terminal || timeout;
    r.terminal_is_timeout = timeout && !terminal;
    r.next.done = r.done;
    return r;
}

using ObsPredicate = std::function<bool(std::span<const double>)>;

// Success predicate over observations.  CartPole has no goal state, so its
// predicate is constant false.
inline ObsPredicate goal_region(EnvId env) {
    switch (env) {
        case EnvId::MountainCar:
            return [](std::span<const double> obs) { return obs[0] >= mountain_car::kGoalPosition; };
        case EnvId::Acrobot:
            return [](std::span<const double> obs) {
                // -cos(t1) - cos(t1 + t2) expressed through the observed cos/sin pairs.
                const double c1 = obs[0], s1 = obs[1], c2 = obs[2], s2 = obs[3];
                return -c1 - (c1 * c2 - s1 * s2) > 1.0;
            };
        case EnvId::CartPole: return [](std::span<const double>) { return false; };
    }
    return [](std::span<const double>) { return false; };
}

// sum_t gamma^t r_t
inline double discounted_return(std::span<const double> rewards, double gamma) {
    double g = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
    return g;
}

}  // namespace ddqn::envs
