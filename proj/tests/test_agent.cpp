#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ddqn/agent.hpp"

namespace {

using namespace ddqn;
using nn::Activation;

// Network whose output is the bias vector for every input.
nn::MlpParams constant_net(std::vector<double> outputs, int in = 2) {
    auto p = nn::zeros({{in, static_cast<int>(outputs.size()), Activation::Identity}});
    for (std::size_t i = 0; i < outputs.size(); ++i) p.layers[0].bias[static_cast<Eigen::Index>(i)] = outputs[i];
    return p;
}

Agent agent_with(nn::MlpParams online) {
    Agent a;
    a.target = online;
    a.opt = nn::adam_init(online);
    a.online = std::move(online);
    return a;
}

// ---- epsilon schedule ----

TEST(EpsilonSchedule, LinearEndpointsAndMidpoint) {
    const auto s = EpsilonSchedule::linear(1.0, 0.0, 25000);
    EXPECT_EQ(epsilon_at(s, 0), 1.0);
    EXPECT_EQ(epsilon_at(s, 12500), 0.5);
    EXPECT_EQ(epsilon_at(s, 25000), 0.0);
    EXPECT_EQ(epsilon_at(s, 30000), 0.0);
}

TEST(EpsilonSchedule, ConstantIgnoresStep) {
    const auto s = EpsilonSchedule::constant(0.0);
    for (std::uint64_t t : {0ull, 1ull, 100000ull}) EXPECT_EQ(epsilon_at(s, t), 0.0);
    EXPECT_EQ(epsilon_at(EpsilonSchedule::constant(0.3), 7), 0.3);
}

TEST(EpsilonSchedule, MonotoneAndBounded) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const double start = rng.uniform01(), end = start * rng.uniform01();
        const auto s = EpsilonSchedule::linear(start, end, 1 + rng.uniform_index(50000));
        double prev = 2.0;
        for (std::uint64_t t = 0; t < 120000; t += 97) {
            const double e = epsilon_at(s, t);
            EXPECT_GE(e, 0.0);
            EXPECT_LE(e, 1.0);
            EXPECT_LE(e, prev);
            prev = e;
        }
    }
}

TEST(EpsilonSchedule, RejectsInvalidParameters) {
    EXPECT_THROW(EpsilonSchedule::constant(1.5), ConfigError);
    EXPECT_THROW(EpsilonSchedule::linear(0.1, 0.5, 10), ConfigError);
    EXPECT_THROW(EpsilonSchedule::linear(1.0, 0.0, 0), ConfigError);
}

// ---- action selection ----

TEST(SelectAction, GreedyPicksArgmax) {
    const auto agent = agent_with(constant_net({-1.0, 3.0, 2.0}));
    Rng rng(2);
    const std::vector<double> obs{0.1, 0.2};
    for (int i = 0; i < 10; ++i) EXPECT_EQ(select_action(agent, obs, 0.0, rng), 1);
}

TEST(SelectAction, GreedyTieGoesToLowestIndex) {
    const auto agent = agent_with(constant_net({2.0, 2.0, 0.0}));
    Rng rng(3);
    EXPECT_EQ(select_action(agent, std::vector<double>{0.0, 0.0}, 0.0, rng), 0);
}

TEST(SelectAction, FullExplorationIsUniform) {
    const auto agent = agent_with(constant_net({-1.0, 3.0, 2.0}));
    Rng rng(4);
    constexpr int draws = 10000;
    std::array<int, 3> counts{};
    const std::vector<double> obs{0.0, 0.0};
    for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(select_action(agent, obs, 1.0, rng))]++;
    const double expected = draws / 3.0, sigma = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
    for (int c : counts) EXPECT_LT(std::abs(c - expected), 3 * sigma);
}

TEST(SelectAction, GreedyChoiceSurvivesOutputShift) {
    Rng rng(5);
    const auto arch = nn::q_network(2, 3, {16, 16}, Activation::ReLU);
    for (int trial = 0; trial < 20; ++trial) {
        Agent a = make_agent(arch, AgentConfig{}, rng);
        Agent b = a;
        b.online.layers.back().bias.array() += rng.uniform(-50.0, 50.0);
        for (int k = 0; k < 20; ++k) {
            const std::vector<double> obs{rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)};
            Rng r1(k), r2(k);
            EXPECT_EQ(select_action(a, obs, 0.0, r1), select_action(b, obs, 0.0, r2));
        }
    }
}

// ---- DDQN targets ----

TEST(DdqnTargets, TerminalTransitionIgnoresNetworks) {
    const auto online = constant_net({5.0, 7.0}, 1), target = constant_net({100.0, -100.0}, 1);
    const std::vector<Transition> batch{{{0.3}, 0, -1.0, {0.4}, true}};
    EXPECT_EQ(ddqn_targets(batch, online, target, 0.99)[0], -1.0);
}

TEST(DdqnTargets, ZeroDiscountReducesToRewards) {
    Rng rng(6);
    const auto arch = nn::q_network(2, 3, {8}, Activation::Tanh);
    const auto online = nn::glorot_init(arch, rng), target = nn::glorot_init(arch, rng);
    std::vector<Transition> batch;
    for (int i = 0; i < 20; ++i)
        batch.push_back({{rng.uniform01(), rng.uniform01()}, i % 3, rng.uniform(-2, 2), {rng.uniform01(), rng.uniform01()}, i % 4 == 0});
    const auto y = ddqn_targets(batch, online, target, 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(y[static_cast<Eigen::Index>(i)], batch[i].r);
}

TEST(DdqnTargets, OnlineSelectsTargetEvaluates) {
    const auto online = constant_net({0.5, 0.9}, 1), target = constant_net({10.0, 2.0}, 1);
    const std::vector<Transition> batch{{{0.0}, 0, -1.0, {0.0}, false}};
    EXPECT_NEAR(ddqn_targets(batch, online, target, 0.99)[0], 0.98, 1e-15);
}

TEST(DdqnTargets, NonFiniteOutputIsATrainingError) {
    const auto online = constant_net({std::nan(""), 0.0}, 1), target = constant_net({0.0, 0.0}, 1);
    const std::vector<Transition> batch{{{0.0}, 0, -1.0, {0.0}, false}};
    EXPECT_THROW(ddqn_targets(batch, online, target, 0.99), TrainingError);
}

// ---- training step ----

TEST(TrainStep, ZeroResidualLeavesParametersUnchanged) {
    Rng rng(7);
    Agent agent = make_agent(nn::q_network(2, 3, {8}, Activation::ReLU), AgentConfig{}, rng);
    std::vector<Transition> batch;
    for (int i = 0; i < 16; ++i) {
        std::vector<double> s{rng.uniform01(), rng.uniform01()};
        batch.push_back({s, i % 3, 0.0, s, true});
    }
    // Rewards equal to the batched Q-values, computed on the same matrix train_step uses.
    const Eigen::MatrixXd q = nn::forward_batch(agent.online, to_batch(batch).states);
    for (int i = 0; i < 16; ++i) batch[static_cast<std::size_t>(i)].r = q(i % 3, i);
    const auto before = agent.online;
    EXPECT_EQ(train_step(agent, batch), 0.0);
    EXPECT_EQ(agent.online, before);
}

TEST(TrainStep, ScalarLinearCaseMatchesHandDerivation) {
    auto net = nn::zeros({{1, 1, Activation::Identity}});
    net.layers[0].weight(0, 0) = 0.5;
    net.layers[0].bias[0] = 0.2;
    Agent agent = agent_with(net);
    // s = 2, Q = 0.5 * 2 + 0.2 = 1.2, terminal with r = 3 so y = 3.
    const std::vector<Transition> batch{{{2.0}, 0, 3.0, {0.0}, true}};
    const Eigen::VectorXd y = ddqn_targets(batch, agent.online, agent.target, 0.99);
    const auto lg = td_loss_and_grad(agent.online, to_batch(batch), y);
    EXPECT_NEAR(lg.loss, 1.8 * 1.8, 1e-15);
    EXPECT_NEAR(lg.grad.layers[0].weight(0, 0), 2 * (1.2 - 3.0) * 2.0, 1e-14);
    EXPECT_NEAR(lg.grad.layers[0].bias[0], 2 * (1.2 - 3.0), 1e-14);

    EXPECT_NEAR(train_step(agent, batch), 3.24, 1e-15);
    // First Adam step moves each parameter by ~alpha against the gradient sign.
    EXPECT_NEAR(agent.online.layers[0].weight(0, 0), 0.5 + agent.config.adam.alpha, 1e-10);
    EXPECT_NEAR(agent.online.layers[0].bias[0], 0.2 + agent.config.adam.alpha, 1e-10);
}

TEST(TrainStep, LossIsNonNegativeAndTargetUntouched) {
    Rng rng(8);
    Agent agent = make_agent(nn::q_network(2, 3, {32, 32}, Activation::ReLU), AgentConfig{}, rng);
    const auto target_before = agent.target;
    for (int it = 0; it < 30; ++it) {
        std::vector<Transition> batch;
        for (int i = 0; i < 32; ++i)
            batch.push_back({{rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)},
                             static_cast<int>(rng.uniform_index(3)),
                             -1.0,
                             {rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)},
                             rng.uniform01() < 0.1});
        EXPECT_GE(train_step(agent, batch), 0.0);
    }
    EXPECT_EQ(agent.target, target_before);
    EXPECT_NE(agent.online, target_before);
}

// ---- target sync ----

TEST(TargetSync, CopiesOnPeriodBoundaryOnly) {
    Rng rng(9);
    Agent agent = make_agent(nn::q_network(2, 3, {8}, Activation::ReLU), AgentConfig{}, rng);
    agent.online.layers[0].bias.array() += 1.0;
    const auto target_before = agent.target;

    agent.env_steps = 999;
    EXPECT_FALSE(maybe_sync_target(agent));
    EXPECT_EQ(agent.target, target_before);

    agent.env_steps = 0;
    EXPECT_FALSE(maybe_sync_target(agent));

    agent.env_steps = 1000;
    EXPECT_TRUE(maybe_sync_target(agent));
    EXPECT_EQ(agent.target, agent.online);

    const auto once = agent;
    EXPECT_TRUE(maybe_sync_target(agent));
    EXPECT_EQ(agent, once);
}

// ---- checkpoints ----

TEST(Checkpoint, RoundTripsFullState) {
    Rng rng(10);
    AgentConfig cfg;
    cfg.gamma = 0.95;
    Agent agent = make_agent(nn::q_network(2, 3, {8, 8}, Activation::Tanh), cfg, rng);
    for (int it = 0; it < 5; ++it) {
        std::vector<Transition> batch;
        for (int i = 0; i < 8; ++i)
            batch.push_back({{rng.uniform01(), rng.uniform01()}, i % 3, -1.0, {rng.uniform01(), rng.uniform01()}, false});
        train_step(agent, batch);
    }
    agent.env_steps = 1234;
    const auto path = std::filesystem::temp_directory_path() / "ddqn_test_checkpoint.bin";
    save_checkpoint(path, agent);
    AgentConfig other;
    const Agent back = load_checkpoint(path, other);
    EXPECT_EQ(back, agent);
    std::filesystem::remove(path);
    EXPECT_THROW(load_checkpoint(path, other), IoError);
}

TEST(MakeAgent, TargetStartsAsCopy) {
    Rng rng(11);
    const Agent agent = make_agent(nn::q_network(6, 3, {128, 128}, Activation::ReLU), AgentConfig{}, rng);
    EXPECT_EQ(agent.online, agent.target);
    EXPECT_EQ(agent.env_steps, 0u);
    EXPECT_THROW(make_agent({{2, 3, Activation::ReLU}}, AgentConfig{}, rng), ConfigError);
}

}  // namespace
