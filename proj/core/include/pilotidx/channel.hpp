#pragma once

#include "pilotidx/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pilotidx {

struct ChannelModel {
    int K = 0;
    Matrix P;
    Vector rates;
    Vector steady;
    std::string label;
};

// Validates P (stochastic, ergodic) and solves for the steady state.
ChannelModel make_channel(const Matrix& P, const Vector& rates, std::string label = {},
                          const Tolerances& tol = default_tolerances());

bool is_ergodic(const Matrix& P, double positive_tol = 1e-14);
bool is_doubly_stochastic(const Matrix& P, double tol = 1e-12);

// Dense LU on (P^T - I) with one balance row replaced by the normalization row.
Vector steady_state(const Matrix& P, const Tolerances& tol = default_tolerances());
// Power iteration, only used as a cross-check.
Vector steady_state_power(const Matrix& P, double tol = 1e-14, int max_iter = 1000000);

struct BeliefState {
    int j = 0;    // 0-based observed channel; ignored for the steady entry
    int tau = 0;  // 1..tau_bar, or 0 for the steady entry
    Vector vec;
    bool steady() const { return tau == 0; }
};

BeliefState belief_initial(const ChannelModel& m, int j);
BeliefState belief_steady(const ChannelModel& m);
BeliefState belief_propagate(const BeliefState& b, const ChannelModel& m, int tau_bar);

struct BeliefTable {
    StateSpace space;
    std::vector<Vector> vec;  // indexed by StateSpace::index, steady last
    double tail_gap = 0.0;    // max_j |pi_j^taubar - p^s|_inf
    std::vector<std::string> warnings;

    const Vector& at(int j, int tau) const { return vec[space.index(j, tau)]; }
    const Vector& steady() const { return vec[space.steady()]; }
};

BeliefTable belief_table(const ChannelModel& m, int tau_bar,
                         const Tolerances& tol = default_tolerances());

struct A1Report {
    bool pass = true;
    int j = -1, tau = -1, tau2 = -1;  // first violation (0-based j)
    bool doubly_stochastic = false;
};

A1Report check_a1(const ChannelModel& m, int tau_bar,
                  const Tolerances& tol = default_tolerances());

Matrix generate_doubly_stochastic(int K, std::uint64_t seed);

}  // namespace pilotidx
