#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "ddqn/analysis/phase_space.hpp"
#include "ddqn/experiment/training.hpp"
#include "support/reference_dynamics.hpp"

namespace {

using namespace ddqn;
using namespace ddqn::analysis;
using experiment::RunLog;

RunLog synthetic_log(std::uint64_t steps) {
    RunLog log;
    for (std::uint64_t k = 1; k <= steps; ++k) {
        const double p = -0.5 + 1e-6 * static_cast<double>(k);
        log.trace.push_back({k, {{p, 0.0}, 1, -1.0, {p, 0.0}, false}, false});
    }
    return log;
}

// ---- transition windows ----

TEST(TransitionWindow, CheckpointWindowCoversPrecedingSteps) {
    const auto log = synthetic_log(12000);
    const auto w = transition_window(log, 10000, 1000);
    ASSERT_EQ(w.size(), 1000u);
    EXPECT_EQ(w.front().step, 9001u);
    EXPECT_EQ(w.back().step, 10000u);
    for (std::size_t i = 1; i < w.size(); ++i) EXPECT_EQ(w[i].step, w[i - 1].step + 1);
}

TEST(TransitionWindow, SingleTransition) {
    const auto log = synthetic_log(50);
    const auto w = transition_window(log, 37, 1);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].step, 37u);
}

TEST(TransitionWindow, ErrorsNameTheMissingRange) {
    const auto log = synthetic_log(2000);
    try {
        transition_window(log, 500, 1000);
        FAIL() << "expected AnalysisError";
    } catch (const AnalysisError& e) {
        EXPECT_NE(std::string(e.what()).find("500"), std::string::npos);
    }
    EXPECT_THROW(transition_window(log, 2500, 1000), AnalysisError);
    // A ring-trimmed trace no longer covers early windows.
    RunLog trimmed = log;
    trimmed.trace.erase(trimmed.trace.begin(), trimmed.trace.begin() + 1500);
    EXPECT_THROW(transition_window(trimmed, 1000, 1000), AnalysisError);
}

// ---- histograms ----

TEST(PhaseHistogramTest, EmptyTraceGivesZeroGrid) {
    const auto h = phase_histogram({}, 100, 100);
    EXPECT_EQ(h.counts.size(), 10000u);
    EXPECT_EQ(h.total(), 0u);
    EXPECT_EQ(h.position_min, -1.2);
    EXPECT_EQ(h.position_max, 0.6);
    EXPECT_EQ(h.velocity_max, 0.07);
}

TEST(PhaseHistogramTest, RepeatedStateSaturatesToWhite) {
    std::vector<TraceRow> trace;
    for (std::uint64_t k = 1; k <= 150; ++k) trace.push_back({k, {{-0.5, 0.0}, 1, -1.0, {-0.5, 0.0}, false}, false});
    const auto h = phase_histogram(trace, 100, 100);
    std::uint64_t nonzero = 0, top = 0;
    for (auto c : h.counts)
        if (c) {
            ++nonzero;
            top = c;
        }
    EXPECT_EQ(nonzero, 1u);
    EXPECT_EQ(top, 150u);
    // (-0.5 + 1.2) / 1.8 * 100 = 38.9 -> column 38; velocity 0 sits on the row 50 boundary.
    EXPECT_EQ(h.at(50, 38), 150u);
    EXPECT_EQ(gray_level(150), 255);
    EXPECT_EQ(gray_level(100), 255);
    EXPECT_EQ(gray_level(50), 128);
    EXPECT_EQ(gray_level(0), 0);
}

TEST(PhaseHistogramTest, CountsAreConserved) {
    Rng rng(1);
    std::vector<TraceRow> trace;
    for (std::uint64_t k = 0; k < 5000; ++k) {
        const double p = rng.uniform(-1.2, 0.6), v = rng.uniform(-0.07, 0.07);
        trace.push_back({k, {{p, v}, 0, -1.0, {p, v}, false}, false});
    }
    trace.push_back({5000, {{0.6, 0.07}, 0, -1.0, {0.6, 0.07}, false}, false});
    trace.push_back({5001, {{-1.2, -0.07}, 0, -1.0, {-1.2, -0.07}, false}, false});
    EXPECT_EQ(phase_histogram(trace, 100, 100).total(), trace.size());
    EXPECT_EQ(phase_histogram(trace, 7, 13).total(), trace.size());
}

TEST(PhaseHistogramTest, OutOfBoxStateIsAnAnalysisError) {
    std::vector<TraceRow> trace{{1, {{0.7, 0.0}, 0, -1.0, {0.7, 0.0}, false}, false}};
    EXPECT_THROW(phase_histogram(trace), AnalysisError);
}

TEST(PhaseHistogramTest, PgmHasHighVelocityOnTop) {
    auto h = empty_histogram(2, 3);
    add_visit(h, -1.2, 0.07);
    for (int i = 0; i < 120; ++i) add_visit(h, 0.6, -0.07);
    std::stringstream ss;
    write_pgm(ss, h);
    EXPECT_EQ(ss.str(), "P2\n3 2\n255\n3 0 0\n0 0 255\n");
}

// ---- vector fields ----

const FieldPoint& nearest(const VectorField& f, double p, double v) {
    return *std::min_element(f.points.begin(), f.points.end(), [&](const auto& a, const auto& b) {
        return std::hypot((a.position - p) / 1.8, (a.velocity - v) / 0.14) <
               std::hypot((b.position - p) / 1.8, (b.velocity - v) / 0.14);
    });
}

TEST(VectorFieldTest, UncontrolledEquilibriumAndOracle) {
    const auto f = vector_field(Policy::uncontrolled(), 40, 40);
    ASSERT_EQ(f.points.size(), 1600u);
    for (const auto& pt : f.points) EXPECT_EQ(pt.action, 1);

    // Direct evaluation at off-grid points.
    auto at = [](double p, double v) {
        const auto next = envs::step(envs::mountain_car_state(p, v), 1).next;
        return std::array<double, 2>{next.physics[0] - p, next.physics[1] - v};
    };
    const auto eq = at(-std::numbers::pi / 6, 0.0);
    EXPECT_NEAR(eq[0], 0.0, 1e-15);
    EXPECT_NEAR(eq[1], 0.0, 1e-15);

    const auto d = at(0.0, 0.05);
    const auto o = oracle::mountain_car({0.0, 0.05}, 1);
    EXPECT_GT(d[0], 0.0);
    EXPECT_DOUBLE_EQ(d[0], o[0] - 0.0);
    EXPECT_DOUBLE_EQ(d[1], o[1] - 0.05);
}

TEST(VectorFieldTest, GridIncludesBoxCorners) {
    const auto f = vector_field(Policy::uncontrolled(), 3, 4);
    EXPECT_EQ(f.points.front().position, -1.2);
    EXPECT_EQ(f.points.front().velocity, -0.07);
    EXPECT_EQ(f.points.back().position, 0.6);
    EXPECT_EQ(f.points.back().velocity, 0.07);
    EXPECT_THROW(vector_field(Policy::uncontrolled(), 1, 4), UsageError);
}

TEST(VectorFieldTest, ConstantNetworkActsLikeActionZero) {
    auto net = nn::zeros(nn::q_network(2, 3, {}, nn::Activation::Identity));
    net.layers[0].bias.setConstant(4.2);
    const auto f = vector_field(Policy::greedy(net), 20, 20);
    EXPECT_TRUE(f.controlled);
    for (const auto& pt : f.points) {
        EXPECT_EQ(pt.action, 0);
        const auto next = envs::step(envs::mountain_car_state(pt.position, pt.velocity), 0).next;
        EXPECT_EQ(pt.dp, next.physics[0] - pt.position);
        EXPECT_EQ(pt.dv, next.physics[1] - pt.velocity);
    }
}

TEST(VectorFieldTest, DeltasStayInsideTheBox) {
    Rng rng(4);
    const auto net = nn::glorot_init(nn::q_network(2, 3, {128, 128}, nn::Activation::ReLU), rng);
    for (const auto& policy : {Policy::uncontrolled(), Policy::greedy(net)}) {
        for (const auto& pt : vector_field(policy, 40, 40).points) {
            const double p = pt.position + pt.dp, v = pt.velocity + pt.dv;
            EXPECT_GE(p, -1.2);
            EXPECT_LE(p, 0.6);
            EXPECT_LE(std::abs(v), 0.07 + 1e-17);
        }
    }
}

TEST(VectorFieldTest, CsvColumns) {
    std::stringstream ss;
    write_field_csv(ss, vector_field(Policy::uncontrolled(), 2, 2));
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "p,v,dp,dv");
}

// ---- rollouts ----

TEST(Rollouts, ZeroStepsKeepsOnlyInitialStates) {
    Rng rng(5);
    const auto trajs = rollout_random_inits(Policy::uncontrolled(), 4, 0, rng);
    ASSERT_EQ(trajs.size(), 4u);
    for (const auto& t : trajs) {
        EXPECT_EQ(t.states.size(), 1u);
        EXPECT_GE(t.states[0][0], -0.6);
        EXPECT_LT(t.states[0][0], -0.4);
        EXPECT_FALSE(t.reached_goal);
    }
}

TEST(Rollouts, SameSeedSameTrajectories) {
    Rng init(6);
    const auto net = nn::glorot_init(nn::q_network(2, 3, {128, 128}, nn::Activation::ReLU), init);
    Rng a(7), b(7);
    const auto x = rollout_random_inits(Policy::greedy(net), 10, 200, a);
    const auto y = rollout_random_inits(Policy::greedy(net), 10, 200, b);
    ASSERT_EQ(x.size(), 10u);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].states, y[i].states);
        EXPECT_EQ(x[i].reached_goal, y[i].reached_goal);
        EXPECT_EQ(x[i].states.size(), 201u);
    }
}

TEST(Rollouts, UncontrolledCarNeverEscapes) {
    Rng rng(8);
    EXPECT_EQ(goal_count(rollout_random_inits(Policy::uncontrolled(), 10, 200, rng)), 0);
}

TEST(Rollouts, CsvRowsPerState) {
    Rng rng(9);
    const auto trajs = rollout_random_inits(Policy::uncontrolled(), 2, 3, rng);
    std::stringstream ss;
    write_trajectories_csv(ss, trajs);
    int lines = 0;
    for (std::string l; std::getline(ss, l);) ++lines;
    EXPECT_EQ(lines, 1 + 2 * 4);
}

// ---- goal detection ----

TEST(FirstGoalStep, NoneWhenGoalNeverReached) {
    EXPECT_FALSE(first_goal_step(synthetic_log(300)).has_value());
}

TEST(FirstGoalStep, FindsEarliestGoalTransition) {
    auto log = synthetic_log(40000);
    log.trace[37411].t.s_next = {0.5, 0.01};
    log.trace[39000].t.s_next = {0.55, 0.01};
    EXPECT_EQ(first_goal_step(log), 37412u);
}

TEST(FirstGoalStep, AgreesWithRecordedEpisodesOnRealRun) {
    auto c = experiment::defaults_for(envs::EnvId::MountainCar);
    c.total_env_steps = 1000;
    c.architecture = nn::q_network(2, 3, {16}, nn::Activation::ReLU);
    c.batch_size = 16;
    c.learn_start = 16;
    const auto log = experiment::run_training(c);
    const auto g = first_goal_step(log);
    const bool any_short = std::any_of(log.episodes.begin(), log.episodes.end(), [](const auto& e) { return e.length < 200; });
    EXPECT_EQ(g.has_value(), any_short);
}

}  // namespace
