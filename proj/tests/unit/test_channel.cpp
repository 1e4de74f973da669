#include "pilotidx/channel.hpp"
#include "pilotidx/instances.hpp"

#include <gtest/gtest.h>

using namespace pilotidx;

namespace {

Matrix p1() {
    Matrix P(3, 3);
    P << 0.3, 0.4, 0.3, 0.2, 0.2, 0.6, 0.5, 0.4, 0.1;
    return P;
}

Vector rates3() { return Vector::Constant(3, 1.0); }

// e_j P^n by repeated dense multiplication
Vector power_row(const Matrix& P, int j, int n) {
    Vector v = Vector::Zero(P.rows());
    v(j) = 1.0;
    for (int i = 0; i < n; ++i) v = (v.transpose() * P).transpose();
    return v;
}

}  // namespace

TEST(SteadyState, DoublyStochasticIsUniform) {
    Vector ps = steady_state(p1());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(ps(k), 1.0 / 3.0, 1e-10);
}

TEST(SteadyState, TwoStateHandSolved) {
    Matrix P(2, 2);
    P << 0.9, 0.1, 0.3, 0.7;
    // 0.1 x = 0.3 (1 - x)
    Vector ps = steady_state(P);
    EXPECT_NEAR(ps(0), 0.75, 1e-12);
    EXPECT_NEAR(ps(1), 0.25, 1e-12);
    Vector pw = steady_state_power(P);
    EXPECT_NEAR((ps - pw).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(SteadyState, IdentityIsNotErgodic) {
    EXPECT_THROW(steady_state(Matrix::Identity(2, 2)), NonErgodic);
    EXPECT_THROW(make_channel(Matrix::Identity(2, 2), Vector::Ones(2)), NonErgodic);
}

TEST(SteadyState, PeriodicIsNotErgodic) {
    Matrix P(2, 2);
    P << 0, 1, 1, 0;
    EXPECT_FALSE(is_ergodic(P));
    EXPECT_THROW(make_channel(P, Vector::Ones(2)), NonErgodic);
}

TEST(Channel, RejectsNonStochasticRows) {
    Matrix P(2, 2);
    P << 0.5, 0.6, 0.5, 0.5;
    EXPECT_THROW(make_channel(P, Vector::Ones(2)), InvalidModel);
}

TEST(Belief, FirstRowAndSquare) {
    ChannelModel m = make_channel(p1(), rates3());
    BeliefState b = belief_initial(m, 0);
    EXPECT_NEAR((b.vec - Vector{{0.3, 0.4, 0.3}}).cwiseAbs().maxCoeff(), 0.0, 0.0);
    BeliefState b2 = belief_propagate(b, m, 50);
    EXPECT_EQ(b2.tau, 2);
    EXPECT_NEAR(b2.vec(0), 0.32, 1e-15);
    EXPECT_NEAR(b2.vec(1), 0.32, 1e-15);
    EXPECT_NEAR(b2.vec(2), 0.36, 1e-15);
}

TEST(Belief, SteadyIsFixedPoint) {
    ChannelModel m = random_user(3, 4);
    BeliefState s = belief_steady(m);
    BeliefState t = belief_propagate(s, m, 5);
    EXPECT_TRUE(t.steady());
    EXPECT_NEAR((t.vec - s.vec).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Belief, TableMatchesMatrixPowers) {
    ChannelModel m = random_user(3, 11);
    const int tb = 20;
    BeliefTable bt = belief_table(m, tb);
    for (int j = 0; j < 3; ++j) {
        EXPECT_EQ(bt.at(j, 1), Vector(m.P.row(j).transpose()));
        for (int tau = 1; tau <= tb; ++tau) {
            EXPECT_NEAR((bt.at(j, tau) - power_row(m.P, j, tau)).cwiseAbs().maxCoeff(), 0.0, 1e-10);
            EXPECT_NEAR(bt.at(j, tau).sum(), 1.0, 1e-10);
        }
    }
}

TEST(Belief, TailGapWarning) {
    Matrix P(2, 2);
    P << 0.99, 0.01, 0.01, 0.99;  // slow mixing
    ChannelModel m = make_channel(P, Vector::Ones(2));
    BeliefTable bt = belief_table(m, 5);
    EXPECT_GT(bt.tail_gap, 1e-3);
    EXPECT_FALSE(bt.warnings.empty());
    BeliefTable fast = belief_table(make_channel(p1(), rates3()), 64);
    EXPECT_LT(fast.tail_gap, 1e-3);
    EXPECT_TRUE(fast.warnings.empty());
}

TEST(AssumptionA1, DoublyStochasticPasses) {
    A1Report r = check_a1(make_channel(p1(), rates3()), 50);
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.doubly_stochastic);
}

TEST(AssumptionA1, BruteForceAgreement) {
    Matrix P(2, 2);
    P << 0.5, 0.5, 0.9, 0.1;
    ChannelModel m = make_channel(P, Vector::Ones(2));
    // brute force: max_i p^(tau)_ji must be non-increasing in tau
    bool expect = true;
    for (int j = 0; j < 2; ++j)
        for (int t = 1; t < 10; ++t)
            if (power_row(P, j, t + 1).maxCoeff() > power_row(P, j, t).maxCoeff() + 1e-12) expect = false;
    A1Report r = check_a1(m, 10);
    EXPECT_EQ(r.pass, expect);
    EXPECT_FALSE(r.doubly_stochastic);
}

TEST(DoublyStochastic, TwoByTwoShape) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Matrix P = generate_doubly_stochastic(2, seed);
        EXPECT_NEAR(P(0, 0), P(1, 1), 1e-12);
        EXPECT_NEAR(P(0, 1), P(1, 0), 1e-12);
    }
}

TEST(DoublyStochastic, RowsColumnsAndDeterminism) {
    Matrix P = generate_doubly_stochastic(3, 7);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(P.row(i).sum(), 1.0, 1e-12);
        EXPECT_NEAR(P.col(i).sum(), 1.0, 1e-12);
    }
    EXPECT_EQ(P, generate_doubly_stochastic(3, 7));
    EXPECT_TRUE(is_doubly_stochastic(P));
}
