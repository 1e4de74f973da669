#include "pilotidx/instances.hpp"
#include "pilotidx/reward.hpp"

#include <gtest/gtest.h>

using namespace pilotidx;

namespace {

ChannelModel p1_model() {
    Matrix P(3, 3);
    P << 0.3, 0.4, 0.3, 0.2, 0.2, 0.6, 0.5, 0.4, 0.1;
    return make_channel(P, Vector{{1.0, 2.0, 4.5}});
}

}  // namespace

TEST(MaxBeliefReward, ActiveRewardIsMeanRateWhenUniform) {
    ChannelModel m = p1_model();
    RewardModel rm = max_belief_reward(m, belief_table(m, 30));
    EXPECT_NEAR(rm.R1, (1.0 + 2.0 + 4.5) / 3.0, 1e-12);
}

TEST(MaxBeliefReward, UniformMatrix) {
    Matrix P = Matrix::Constant(3, 3, 1.0 / 3.0);
    ChannelModel m = make_channel(P, Vector{{1.0, 2.0, 3.0}});
    RewardModel rm = max_belief_reward(m, belief_table(m, 4));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(rm.at(j, 1), rm.R1 / 3.0, 1e-12);
}

TEST(MaxBeliefReward, SecondStepOfFirstChannel) {
    ChannelModel m = p1_model();
    RewardModel rm = max_belief_reward(m, belief_table(m, 30));
    EXPECT_NEAR(rm.at(0, 2), 0.36 * rm.R1, 1e-14);
    EXPECT_NEAR(rm.steady(), rm.R1 / 3.0, 1e-10);
}

TEST(AssumptionA2, MaxBeliefOverDoublyStochasticPasses) {
    ChannelModel m = p1_model();
    RewardModel rm = max_belief_reward(m, belief_table(m, 40));
    EXPECT_TRUE(check_a2(rm).pass);
    // exhaustive: non-increasing in tau, bounded by R1
    for (int j = 0; j < 3; ++j)
        for (int t = 1; t < 40; ++t) {
            EXPECT_LE(rm.at(j, t + 1), rm.at(j, t) + 1e-12);
            EXPECT_LE(rm.at(j, t), rm.R1);
        }
}

TEST(AssumptionA2, ConstantPasses) {
    StateSpace sp{2, 3};
    RewardModel rm = constant_reward(sp, 2.0, 0.5);
    EXPECT_TRUE(check_a2(rm).pass);
}

TEST(AssumptionA2, ConstructedViolation) {
    StateSpace sp{2, 3};
    std::vector<double> t(sp.size(), 0.2);
    t[sp.index(0, 2)] = 0.5;  // R(pi_1^2) > R(pi_1^1)
    EXPECT_THROW(table_reward(sp, 1.0, t), A2Violation);
    RewardModel raw;
    raw.kind = RewardKind::Table;
    raw.space = sp;
    raw.R1 = 1.0;
    raw.passive = t;
    A2Report r = check_a2(raw);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.j, 0);
    EXPECT_EQ(r.tau, 1);
}

TEST(AssumptionA2, PassiveAboveActiveFails) {
    StateSpace sp{1, 2};
    EXPECT_THROW(table_reward(sp, 1.0, {1.5, 1.0, 1.0}), A2Violation);
}

TEST(Reward, ScalingIsLinear) {
    ChannelModel m = p1_model();
    RewardModel rm = max_belief_reward(m, belief_table(m, 10));
    RewardModel s = rm.scaled(2.5);
    EXPECT_DOUBLE_EQ(s.R1, 2.5 * rm.R1);
    for (std::size_t i = 0; i < rm.passive.size(); ++i) EXPECT_DOUBLE_EQ(s.passive[i], 2.5 * rm.passive[i]);
}
