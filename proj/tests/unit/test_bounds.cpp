#include "pilotidx/bounds.hpp"
#include "pilotidx/instances.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace pilotidx;

TEST(Bounds, SingleChannelCollapses) {
    ChannelModel m = make_channel(Matrix::Ones(1, 1), Vector{{2.0}});
    BeliefTable bt = belief_table(m, 4);
    RewardModel rm = max_belief_reward(m, bt);
    BoundReport r = error_bound(m, bt, rm, 0.5, 1e-11);
    EXPECT_NEAR(r.g_max, r.g_app, 1e-9);
    EXPECT_NEAR(r.g_min, r.g_app, 1e-9);
    EXPECT_NEAR(r.D, 0.0, 1e-9);
}

TEST(Bounds, SandwichOnRandomInstance) {
    ChannelModel m = random_user(3, 42);
    BeliefTable bt = belief_table(m, 10);
    RewardModel rm = max_belief_reward(m, bt);
    WhittleIndexTable t = whittle_closed_form(rm, omega(m));
    for (double W : {t.W.front(), 0.5 * (t.W.front() + t.steady()), t.steady()}) {
        BoundReport r = error_bound(m, bt, rm, W, 1e-11);
        EXPECT_LE(r.g_min, r.g_app + 1e-9);
        EXPECT_LE(r.g_app, r.g_max + 1e-9);
        EXPECT_LE(r.g_min, r.g_orig + 1e-9);
        EXPECT_LE(r.g_orig, r.g_max + 1e-9);
        EXPECT_LE(r.rel_err, r.D + 2e-11);
    }
}

TEST(Bounds, LargeSubsidyAllEqual) {
    ChannelModel m = random_user(3, 43);
    BeliefTable bt = belief_table(m, 10);
    RewardModel rm = max_belief_reward(m, bt);
    WhittleIndexTable t = whittle_closed_form(rm, omega(m));
    const double W = *std::max_element(t.W.begin(), t.W.end()) + 1.0;
    BoundReport r = error_bound(m, bt, rm, W, 1e-11);
    const double v = rm.steady() + W;
    EXPECT_NEAR(r.g_app, v, 1e-6);
    EXPECT_NEAR(r.g_orig, v, 1e-6);
    EXPECT_NEAR(r.g_max, v, 1e-6);
    EXPECT_NEAR(r.g_min, v, 1e-6);
}

TEST(Bounds, ClosedFormsAgreeWithVI) {
    for (std::uint64_t s = 1; s <= 6; ++s) {
        ChannelModel m = random_user(2 + s % 2, 500 + s);
        BeliefTable bt = belief_table(m, 10);
        RewardModel rm = max_belief_reward(m, bt);
        WhittleIndexTable t = whittle_closed_form(rm, omega(m));
        double lo = *std::min_element(t.W.begin(), t.W.end()), hi = t.steady();
        for (int i = 0; i < 50; ++i) {
            double W = lo - 0.1 + (hi - lo + 0.2) * i / 49.0;
            BoundReport r = error_bound(m, bt, rm, W, 1e-11);
            EXPECT_NEAR(r.g_app_cf, r.g_app, 1e-6);
            if (r.max_threshold) EXPECT_NEAR(r.g_max_cf, r.g_max, 1e-6);
            if (r.min_threshold) EXPECT_NEAR(r.g_min_cf, r.g_min, 1e-6);
        }
    }
}

TEST(Bounds, GainSlopeIsPassiveMass) {
    ChannelModel m = random_user(3, 44);
    BeliefTable bt = belief_table(m, 10);
    RewardModel rm = max_belief_reward(m, bt);
    ThresholdPolicy pol{{2, 1, 3}};
    double a = g_app_closed_form(0.0, rm, m.steady, pol), b = g_app_closed_form(1.0, rm, m.steady, pol);
    EXPECT_NEAR(b - a, passive_slope(pol, m.steady, 10), 1e-14);
    EXPECT_NEAR(g_app_closed_form(0.7, rm, m.steady, always_active(3)), rm.R1, 1e-14);
}

TEST(Bounds, SteadyRowedIsExact) {
    Vector p{{0.2, 0.5, 0.3}};
    ChannelModel m = steady_rowed(p, Vector{{1.0, 2.0, 3.0}});
    BeliefTable bt = belief_table(m, 6);
    RewardModel rm = max_belief_reward(m, bt);
    for (double W : {0.0, 0.5, 1.0, 2.0}) EXPECT_NEAR(error_bound(m, bt, rm, W, 1e-11).rel_err, 0.0, 1e-9);
}

TEST(Bounds, DegenerateGain) {
    Matrix P(2, 2);
    P << 0.6, 0.4, 0.4, 0.6;
    ChannelModel m = make_channel(P, Vector::Zero(2));
    BeliefTable bt = belief_table(m, 4);
    RewardModel rm = max_belief_reward(m, bt);
    EXPECT_THROW(error_bound(m, bt, rm, 0.0, 1e-10), DegenerateGain);
}

TEST(Bounds, SweepRows) {
    ChannelModel m = random_user(3, 45);
    BeliefTable bt = belief_table(m, 8);
    RewardModel rm = max_belief_reward(m, bt);
    auto rows = bound_sweep(m, bt, rm, {0.2, 0.4, 0.6}, 1e-10);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rows[1].W, 0.4);
}
