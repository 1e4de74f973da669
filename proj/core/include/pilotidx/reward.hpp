#pragma once

#include "pilotidx/channel.hpp"

#include <string>
#include <vector>

namespace pilotidx {

enum class RewardKind { MaxBelief, Table };

struct RewardModel {
    RewardKind kind = RewardKind::MaxBelief;
    StateSpace space;
    double R1 = 0.0;              // active reward
    std::vector<double> passive;  // R(pi,0) per dense state, steady last

    double at(int j, int tau) const { return passive[space.index(j, tau)]; }
    double steady() const { return passive[space.steady()]; }
    double state(int s) const { return passive[s]; }
    RewardModel scaled(double c) const;
};

struct A2Report {
    bool pass = true;
    int j = -1, tau = -1;  // first violation (0-based j); tau = 0 flags R1 < R(pi,0)
};

A2Report check_a2(const RewardModel& rm, const Tolerances& tol = default_tolerances());

// R1 = sum_k p^s_k r_k, R(pi,0) = max_i(pi_i) * R1. Throws A2Violation.
RewardModel max_belief_reward(const ChannelModel& m, const BeliefTable& bt,
                              const Tolerances& tol = default_tolerances());

// Table given per (j,tau) in dense order plus the steady entry. Throws A2Violation.
RewardModel table_reward(const StateSpace& space, double R1, std::vector<double> passive,
                         const Tolerances& tol = default_tolerances());

// Every passive entry equal to R0.
RewardModel constant_reward(const StateSpace& space, double R1, double R0);

}  // namespace pilotidx
