#include "pilotidx/index.hpp"
#include "pilotidx/instances.hpp"
#include "pilotidx/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace pilotidx;

namespace {

ChannelModel p1_model() {
    Matrix P(3, 3);
    P << 0.3, 0.4, 0.3, 0.2, 0.2, 0.6, 0.5, 0.4, 0.1;
    return make_channel(P, Vector{{1.0, 2.0, 4.5}});
}

struct Inst {
    ChannelModel m;
    BeliefTable bt;
    RewardModel rm;
    Vector om;
};

Inst inst(const ChannelModel& m, int tb) {
    BeliefTable bt = belief_table(m, tb);
    RewardModel rm = max_belief_reward(m, bt);
    return {m, bt, rm, omega(m)};
}

}  // namespace

TEST(Omega, Examples) {
    Vector a = omega(p1_model());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(a(k), 1.0 / 3.0, 1e-10);
    Vector one = omega(make_channel(Matrix::Ones(1, 1), Vector::Ones(1)));
    EXPECT_DOUBLE_EQ(one(0), 1.0);
    Matrix P(2, 2);
    P << 0.9, 0.1, 0.3, 0.7;
    Vector b = omega(make_channel(P, Vector::Ones(2)));
    EXPECT_NEAR(b(0), 0.75, 1e-12);
    EXPECT_NEAR(b(1), 0.25, 1e-12);
}

TEST(Occupancy, AlwaysActive) {
    Vector om{{0.2, 0.5, 0.3}};
    OccupancyMeasure o = occupancy(always_active(3), om, 5);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(o.alpha[o.space.index(j, 1)], om(j), 1e-15);
}

TEST(Occupancy, TwoChannelHandValue) {
    OccupancyMeasure o = occupancy({{1, 0}}, Vector{{0.5, 0.5}}, 4);
    // 0.5 / (2*0.5 + 1*0.5)
    EXPECT_NEAR(o.alpha[o.space.index(0, 1)], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(o.alpha[o.space.index(0, 2)], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(o.alpha[o.space.index(1, 1)], 1.0 / 3.0, 1e-15);
    EXPECT_EQ(o.alpha[o.space.index(1, 2)], 0.0);
}

TEST(Occupancy, Normalized) {
    Vector om = Vector::Constant(3, 1.0 / 3.0);
    OccupancyMeasure o = occupancy({{3, 1, 2}}, om, 6);
    double s = 0.0;
    for (double a : o.alpha) s += a;
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Occupancy, RandomizedReducesToThreshold) {
    const int tb = 5;
    StateSpace sp{3, tb};
    ThresholdPolicy pol{{2, 0, 4}};
    std::vector<double> act(sp.size());
    for (int s = 0; s < sp.size(); ++s) act[s] = pol.passive(sp, s) ? 0.0 : 1.0;
    Vector om{{0.2, 0.5, 0.3}};
    OccupancyMeasure a = occupancy(pol, om, tb), b = occupancy_randomized(act, om, tb);
    for (int s = 0; s < sp.size(); ++s) EXPECT_NEAR(a.alpha[s], b.alpha[s], 1e-14);
    EXPECT_NEAR(a.activation_rate, b.activation_rate, 1e-14);
}

TEST(AverageReward, AlwaysActiveIsR1) {
    Inst I = inst(p1_model(), 8);
    for (double W : {-1.0, 0.0, 3.0}) EXPECT_NEAR(avg_reward_for_threshold(always_active(3), W, I.rm, I.om), I.rm.R1, 1e-14);
}

TEST(AverageReward, SlopeIsPassiveMass) {
    Inst I = inst(p1_model(), 8);
    ThresholdPolicy pol{{3, 1, 2}};
    double g0 = avg_reward_for_threshold(pol, 0.0, I.rm, I.om);
    double g1 = avg_reward_for_threshold(pol, 1.0, I.rm, I.om);
    // sum_j Gamma_j w_j / sum_k (Gamma_k+1) w_k with uniform w
    EXPECT_NEAR(g1 - g0, 6.0 / 9.0, 1e-14);
    EXPECT_NEAR(passive_slope(pol, I.om, 8), 6.0 / 9.0, 1e-14);
}

TEST(AverageReward, MatchesSimulatedApproximatedChain) {
    Inst I = inst(p1_model(), 8);
    ThresholdPolicy pol{{1, 0, 0}};
    const double W = 1.0;
    // independent Monte Carlo of the approximated single-arm chain
    SplitMix g(2024);
    int j = 0, tau = 1;
    double total = 0.0;
    const long T = 1'000'000;
    for (long t = 0; t < T; ++t) {
        if (tau <= pol.gamma[j]) {
            total += I.rm.at(j, tau) + W;
            ++tau;
        } else {
            total += I.rm.R1;
            double u = g.uniform();
            j = u < 1.0 / 3.0 ? 0 : (u < 2.0 / 3.0 ? 1 : 2);
            tau = 1;
        }
    }
    EXPECT_NEAR(total / T, avg_reward_for_threshold(pol, W, I.rm, I.om), 1e-2);
}

TEST(WhittleClosedForm, FirstBreakpoint) {
    Inst I = inst(p1_model(), 10);
    WhittleIndexTable t = whittle_closed_form(I.rm, I.om);
    double mx = std::max({I.rm.at(0, 1), I.rm.at(1, 1), I.rm.at(2, 1)});
    ASSERT_FALSE(t.breakpoints.empty());
    EXPECT_NEAR(t.breakpoints.front(), I.rm.R1 - mx, 1e-14);
    EXPECT_NEAR(*std::min_element(t.W.begin(), t.W.end()), I.rm.R1 - mx, 1e-14);
}

TEST(WhittleClosedForm, ConstantRewardGivesConstantIndex) {
    StateSpace sp{3, 6};
    RewardModel rm = constant_reward(sp, 2.0, 0.7);
    WhittleIndexTable t = whittle_closed_form(rm, Vector{{0.2, 0.3, 0.5}});
    for (double w : t.W) EXPECT_NEAR(w, 1.3, 1e-12);
    WhittleIndexTable o = whittle_envelope_oracle(rm, Vector{{0.2, 0.3, 0.5}});
    for (double w : o.W) EXPECT_NEAR(w, 1.3, 1e-12);
}

TEST(WhittleClosedForm, AssignmentOrderOfFigureInstance) {
    // seeded doubly stochastic instance with the ordering pi_2^1, pi_2^2, pi_3^1, pi_1^1, pi_2^3
    Inst I = inst(random_user(3, 521), 10);
    WhittleIndexTable t = whittle_closed_form(I.rm, I.om);
    const int want[5][2] = {{1, 1}, {1, 2}, {2, 1}, {0, 1}, {1, 3}};
    ASSERT_GE(t.sequence.size(), 5u);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(t.sequence[i].channel, want[i][0]);
        EXPECT_EQ(t.sequence[i].tau, want[i][1]);
    }
    for (std::size_t i = 1; i < t.sequence.size(); ++i) EXPECT_GE(t.sequence[i].W, t.sequence[i - 1].W - 1e-12);
}

TEST(WhittleClosedForm, BreakpointsIncrease) {
    for (std::uint64_t s = 1; s <= 10; ++s) {
        Inst I = inst(random_user(3, s), 12);
        WhittleIndexTable t = whittle_closed_form(I.rm, I.om);
        for (std::size_t i = 1; i < t.breakpoints.size(); ++i) EXPECT_GT(t.breakpoints[i], t.breakpoints[i - 1]);
    }
}

TEST(WhittleClosedForm, ScaleEquivariance) {
    Inst I = inst(random_user(3, 99), 10);
    WhittleIndexTable a = whittle_closed_form(I.rm, I.om);
    WhittleIndexTable b = whittle_closed_form(I.rm.scaled(3.0), I.om);
    for (std::size_t s = 0; s < a.W.size(); ++s) EXPECT_NEAR(b.W[s], 3.0 * a.W[s], 1e-12);
    ASSERT_EQ(a.sequence.size(), b.sequence.size());
    for (std::size_t i = 0; i < a.sequence.size(); ++i) {
        EXPECT_EQ(a.sequence[i].channel, b.sequence[i].channel);
        EXPECT_EQ(a.sequence[i].tau, b.sequence[i].tau);
    }
}

TEST(WhittleClosedForm, EnvelopePiecesMeetAtBreakpoints) {
    Inst I = inst(random_user(3, 17), 8);
    WhittleIndexTable t = whittle_closed_form(I.rm, I.om);
    ThresholdPolicy prev = always_active(3);
    for (const IndexStep& st : t.sequence) {
        if (st.channel < 0) break;
        ThresholdPolicy next{st.gamma};
        double a = avg_reward_for_threshold(prev, st.W, I.rm, I.om);
        double b = avg_reward_for_threshold(next, st.W, I.rm, I.om);
        EXPECT_NEAR(a, b, 1e-9);
        prev = next;
    }
}

TEST(WhittleEnvelope, MatchesClosedFormTwoChannels) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        Inst I = inst(random_user(2, 40 + s), 6);
        WhittleIndexTable a = whittle_closed_form(I.rm, I.om);
        WhittleIndexTable b = whittle_envelope_oracle(I.rm, I.om);
        for (std::size_t k = 0; k < a.W.size(); ++k) EXPECT_NEAR(a.W[k], b.W[k], 1e-9);
    }
}

TEST(WhittleEnvelope, FirstStepIsUnitIncrement) {
    Inst I = inst(random_user(3, 8), 6);
    WhittleIndexTable b = whittle_envelope_oracle(I.rm, I.om);
    ASSERT_FALSE(b.sequence.empty());
    int total = 0;
    for (int g : b.sequence.front().gamma) total += g;
    EXPECT_EQ(total, 1);
}

TEST(WhittleEnvelope, BudgetAndBounds) {
    Inst I = inst(random_user(3, 8), 6);
    EnvelopeOptions small;
    small.budget = 10;
    EXPECT_THROW(whittle_envelope_oracle(I.rm, I.om, small), SearchSpaceTooLarge);
    EnvelopeOptions low;
    low.gamma_max = 3;
    EXPECT_THROW(whittle_envelope_oracle(I.rm, I.om, low), InvalidModel);
}

TEST(Indexability, ExtremesAndMonotone) {
    Inst I = inst(p1_model(), 10);
    WhittleIndexTable t = whittle_closed_form(I.rm, I.om);
    double lo = *std::min_element(t.W.begin(), t.W.end());
    double hi = *std::max_element(t.W.begin(), t.W.end());
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(lo - 0.2 + (hi - lo + 0.4) * i / 49.0);
    IndexabilityReport r = indexability_check(I.m, I.bt, I.rm, grid, 1e-11, &t);
    EXPECT_TRUE(r.monotone) << r.first_violation;
    EXPECT_TRUE(r.matches_index) << r.first_violation;
    EXPECT_EQ(r.policies.front(), always_active(3));
    EXPECT_FALSE(r.policies.back().steady_active);
    for (int g : r.policies.back().gamma) EXPECT_EQ(g, 10);
    for (std::size_t i = 1; i < r.passive_set_size.size(); ++i)
        EXPECT_GE(r.passive_set_size[i], r.passive_set_size[i - 1]);
}
