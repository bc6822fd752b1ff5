#pragma once

// One-command reproductions of the experiment grids.
//
//   figure 1: MountainCar, epsilon in {0, 1->0 over 25k, 1->0 over 100k}, 5 seeds
//   figure 2: {CartPole, Acrobot} x {epsilon 0, 1->0 over 10k}, 10 seeds
//   figure 3: MountainCar, epsilon 0, {linear, 1x128 ReLU, 2x128 ReLU,
//             2x128 tanh}, 5 seeds, snapshots at 10k/20k/40k/160k
//
// Seed i of every variant is derive_seed(base_seed, i), so variants are
// compared on the same seeds.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddqn/experiment/config.hpp"
#include "ddqn/rng.hpp"

namespace ddqn::experiment {

struct GridVariant {
    std::string name;
    std::vector<TrainConfig> runs;
};

inline std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
    return derive_seed(base_seed, run_index);
}

inline GridVariant make_variant(const std::string& name, const TrainConfig& base, int seeds, std::uint64_t base_seed) {
    GridVariant v{name, {}};
    for (int i = 0; i < seeds; ++i) {
        TrainConfig c = base;
        c.seed = run_seed(base_seed, static_cast<std::uint64_t>(i));
        v.runs.push_back(c);
    }
    return v;
}

// The variants of one figure.  `steps` overrides total_env_steps (and drops
// snapshot steps beyond it) for scaled-down runs.
inline std::vector<GridVariant> figure_grid(int figure, std::uint64_t base_seed = 0,
                                            std::optional<std::uint64_t> steps = std::nullopt) {
    std::vector<GridVariant> grid;
    auto scaled = [&](TrainConfig c) {
        if (steps) {
            c.total_env_steps = *steps;
            std::erase_if(c.snapshot_steps, [&](std::uint64_t s) { return s > *steps; });
        }
        return c;
    };
    switch (figure) {
        case 1: {
            TrainConfig base = defaults_for(EnvId::MountainCar);
            TrainConfig greedy = base, d25 = base, d100 = base;
            d25.schedule = EpsilonSchedule::linear(1.0, 0.0, 25'000);
            d100.schedule = EpsilonSchedule::linear(1.0, 0.0, 100'000);
            grid.push_back(make_variant("eps0", scaled(greedy), 5, base_seed));
            grid.push_back(make_variant("decay25k", scaled(d25), 5, base_seed));
            grid.push_back(make_variant("decay100k", scaled(d100), 5, base_seed));
            break;
        }
        case 2: {
            for (EnvId env : {EnvId::CartPole, EnvId::Acrobot}) {
                TrainConfig greedy = defaults_for(env), d10 = defaults_for(env);
                d10.schedule = EpsilonSchedule::linear(1.0, 0.0, 10'000);
                grid.push_back(make_variant(envs::to_string(env) + "_eps0", scaled(greedy), 10, base_seed));
                grid.push_back(make_variant(envs::to_string(env) + "_decay10k", scaled(d10), 10, base_seed));
            }
            break;
        }
        case 3: {
            for (ArchPreset p : {ArchPreset::Linear, ArchPreset::Relu1, ArchPreset::Relu2, ArchPreset::Tanh2}) {
                TrainConfig c = defaults_for(EnvId::MountainCar);
                c.architecture = architecture_for(EnvId::MountainCar, p);
                grid.push_back(make_variant(to_string(p), scaled(c), 5, base_seed));
            }
            break;
        }
        default: throw ConfigError("unknown figure preset " + std::to_string(figure) + " (expected 1, 2 or 3)");
    }
    return grid;
}

}  // namespace ddqn::experiment
