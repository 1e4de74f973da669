#pragma once

#include "pilotidx/oracle.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pilotidx {

// One user's dynamics stripped of the subsidy.
struct Arm {
    StateSpace space;
    std::vector<double> r_passive;
    double R1 = 0.0;
    Matrix q1;  // S x K
};

Arm make_arm(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm, Kernel kernel);

struct JointMDP {
    std::vector<Arm> arms;
    int M = 1;
    long states = 0;
    std::vector<long> stride;
    std::vector<std::uint32_t> actions;  // bitmask over users, |mask| <= M, idle included

    int N() const { return static_cast<int>(arms.size()); }
    int label(long x, int n) const { return static_cast<int>(x / stride[n] % arms[n].space.size()); }
    long encode(const std::vector<int>& labels) const;
};

constexpr double kDefaultJointBudget = 5e6;

// Throws BudgetExceeded when states * actions > budget.
JointMDP build_joint(std::vector<Arm> arms, int M, double budget = kDefaultJointBudget);

struct JointOptions {
    long max_sweeps = 10'000;
    double aperiodicity = 0.5;
    int threads = 1;
};

struct JointResult {
    double gain = 0.0;
    std::vector<double> bias;
    std::vector<std::uint32_t> policy;  // chosen mask per joint state (ties: fewer/lower users)
    long sweeps = 0;
};

JointResult vi_joint_average(const JointMDP& jm, double tol, JointOptions opt = {});

// Stationary (possibly randomized) policy: fills (mask, probability) pairs for
// the given per-user labels.
using JointPolicyFn =
    std::function<void(const std::vector<int>& labels, std::vector<std::pair<std::uint32_t, double>>& out)>;

// Long-run average reward of a fixed policy (relative value iteration on the chain).
double evaluate_joint_policy(const JointMDP& jm, const JointPolicyFn& pol, double tol,
                             JointOptions opt = {});

// "1:2|3:1" style tuple of 1-based labels
std::string joint_state_label(const JointMDP& jm, long x);

}  // namespace pilotidx
