#include <gtest/gtest.h>

#include <cmath>

#include "ddqn/replay.hpp"

namespace {

using namespace ddqn;

Transition tagged(double tag, int obs_dim = 2) {
    Transition t;
    t.s.assign(static_cast<std::size_t>(obs_dim), tag);
    t.s_next.assign(static_cast<std::size_t>(obs_dim), tag + 0.5);
    t.a = static_cast<int>(tag) % 3;
    t.r = -tag;
    t.done = static_cast<long>(tag) % 2 == 0;
    return t;
}

bool same(const Transition& a, const Transition& b) {
    return a.s == b.s && a.a == b.a && a.r == b.r && a.s_next == b.s_next && a.done == b.done;
}

TEST(Replay, FifoEviction) {
    ReplayBuffer buf(2, 2);
    buf.push(tagged(1));
    buf.push(tagged(2));
    buf.push(tagged(3));
    ASSERT_EQ(buf.size(), 2u);
    EXPECT_TRUE(same(buf.at(0), tagged(2)));
    EXPECT_TRUE(same(buf.at(1), tagged(3)));
    EXPECT_EQ(buf.insert_count(), 3u);
}

TEST(Replay, FirstPushGivesLengthOne) {
    ReplayBuffer buf(10, 2);
    EXPECT_TRUE(buf.empty());
    buf.push(tagged(7));
    EXPECT_EQ(buf.size(), 1u);
    EXPECT_TRUE(same(buf.at(0), tagged(7)));
    EXPECT_THROW(buf.at(1), UsageError);
}

TEST(Replay, FullSizeBufferStaysAtCapacity) {
    ReplayBuffer buf(200000, 2);
    for (int i = 0; i < 200000; ++i) buf.push(tagged(i));
    EXPECT_EQ(buf.size(), 200000u);
    buf.push(tagged(200000));
    EXPECT_EQ(buf.size(), 200000u);
    EXPECT_EQ(buf.insert_count(), 200001u);
    EXPECT_TRUE(same(buf.at(0), tagged(1)));
    EXPECT_TRUE(same(buf.at(199999), tagged(200000)));

    Rng rng(1);
    EXPECT_EQ(buf.sample(256, rng).size(), 256u);
}

TEST(Replay, LengthIsMinOfInsertsAndCapacity) {
    ReplayBuffer buf(7, 2);
    for (int i = 0; i < 30; ++i) {
        buf.push(tagged(i));
        EXPECT_EQ(buf.size(), std::min<std::size_t>(static_cast<std::size_t>(i) + 1, 7));
        // Contents are the last min(i+1, 7) pushes, oldest first.
        for (std::size_t k = 0; k < buf.size(); ++k)
            EXPECT_TRUE(same(buf.at(k), tagged(static_cast<double>(i + 1 - static_cast<int>(buf.size()) + static_cast<int>(k)))));
    }
}

TEST(Replay, SingleTransitionSampledWithReplacement) {
    ReplayBuffer buf(100, 2);
    buf.push(tagged(4));
    Rng rng(2);
    const auto batch = buf.sample(1, rng);
    EXPECT_TRUE(same(batch[0], tagged(4)));
}

TEST(Replay, BatchLargerThanContentsIsAUsageError) {
    ReplayBuffer buf(1000, 2);
    buf.push(tagged(4));
    Rng rng(2);
    EXPECT_THROW(buf.sample(256, rng), UsageError);
    EXPECT_THROW(buf.sample(0, rng), UsageError);
}

TEST(Replay, SingleTransitionFillsWholeBatch) {
    // With replacement: a one-item population yields 256 copies once sampling is legal.
    ReplayBuffer buf(1000, 2);
    for (int i = 0; i < 256; ++i) buf.push(tagged(4));
    Rng rng(3);
    const auto batch = buf.sample(256, rng);
    ASSERT_EQ(batch.size(), 256u);
    for (const auto& t : batch) EXPECT_TRUE(same(t, tagged(4)));
}

TEST(Replay, SamplingIsUniformOverSlots) {
    constexpr std::size_t n = 16;
    constexpr int trials = 4000;
    ReplayBuffer buf(n, 1);
    for (std::size_t i = 0; i < n + 5; ++i) buf.push(tagged(static_cast<double>(i), 1));
    Rng rng(4);
    std::vector<double> counts(n, 0.0);
    for (int t = 0; t < trials; ++t)
        for (auto i : buf.sample_indices(n, rng)) counts[i] += 1;
    const double draws = static_cast<double>(trials) * n;
    const double expected = draws / n;
    const double sigma = std::sqrt(draws * (1.0 / n) * (1.0 - 1.0 / n));
    double chi2 = 0;
    for (double c : counts) {
        EXPECT_LT(std::abs(c - expected), 3 * sigma);
        chi2 += (c - expected) * (c - expected) / expected;
    }
    // 99.9% quantile of chi-squared with 15 degrees of freedom.
    EXPECT_LT(chi2, 37.70);
}

TEST(Replay, SamplingDoesNotMutate) {
    ReplayBuffer buf(50, 2);
    for (int i = 0; i < 80; ++i) buf.push(tagged(i));
    std::vector<Transition> before;
    for (std::size_t k = 0; k < buf.size(); ++k) before.push_back(buf.at(k));
    Rng rng(5);
    for (int i = 0; i < 100; ++i) (void)buf.sample(32, rng);
    EXPECT_EQ(buf.size(), 50u);
    EXPECT_EQ(buf.insert_count(), 80u);
    for (std::size_t k = 0; k < buf.size(); ++k) EXPECT_TRUE(same(buf.at(k), before[k]));
}

TEST(Replay, SameRngStateGivesSameSample) {
    ReplayBuffer buf(500, 2);
    for (int i = 0; i < 500; ++i) buf.push(tagged(i));
    Rng a(6), b(6);
    const auto x = buf.sample(64, a), y = buf.sample(64, b);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_TRUE(same(x[i], y[i]));
}

TEST(Replay, SampleIntoMatchesSample) {
    ReplayBuffer buf(300, 2);
    for (int i = 0; i < 400; ++i) buf.push(tagged(i));
    Rng a(7), b(7);
    const auto list = buf.sample(40, a);
    Batch batch;
    buf.sample_into(batch, 40, b);
    const Batch expected = to_batch(list);
    EXPECT_EQ(batch.states, expected.states);
    EXPECT_EQ(batch.next_states, expected.next_states);
    EXPECT_EQ(batch.actions, expected.actions);
    EXPECT_EQ(batch.rewards, expected.rewards);
    EXPECT_EQ(batch.dones, expected.dones);
}

TEST(Replay, RejectsWrongObservationSize) {
    ReplayBuffer buf(10, 2);
    EXPECT_THROW(buf.push(tagged(1, 4)), ShapeError);
    EXPECT_THROW(ReplayBuffer(0, 2), ConfigError);
}

}  // namespace
