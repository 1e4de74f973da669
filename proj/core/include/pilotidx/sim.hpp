#pragma once

#include "pilotidx/fluid.hpp"
#include "pilotidx/joint.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pilotidx {

struct SimUser {
    ChannelModel channel;
    BeliefTable beliefs;
    RewardModel reward;
    WhittleIndexTable index;
    int rel_class = 0;  // class used by the REL policy
};

SimUser make_sim_user(const ChannelModel& m, int tau_bar);

enum class PolicyKind { WIP, Myopic, Random, REL, Optimal, Threshold };
// Realized: active users earn r of the observed channel. Expected: active users
// earn R1 (the model's active reward); passive users always earn R(pi,0).
enum class RewardMode { Realized, Expected };
// Original: observed channel follows the true chain. Approximated: the channel
// revealed by a pilot is drawn from p^s (the model the index is derived for).
enum class Dynamics { Original, Approximated };

std::string to_string(PolicyKind k);
PolicyKind policy_from_string(const std::string& s);

struct SimConfig {
    int M = 1;
    long T = 10'000;
    long warmup = -1;  // -1: 10% of T
    int replications = 10;
    std::uint64_t seed = 1;
    RewardMode reward = RewardMode::Realized;
    Dynamics dynamics = Dynamics::Original;
    bool myopic_plain = false;  // rank by R1 instead of R1 - R(pi,0)
    int threads = 1;
    bool check_beliefs = false;
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::WIP;
    std::string name;                 // defaults to to_string(kind)
    const RelPolicy* rel = nullptr;   // REL
    const JointMDP* joint = nullptr;  // Optimal
    const JointResult* optimal = nullptr;
    std::vector<ThresholdPolicy> thresholds;  // Threshold (per user)
};

struct PolicyResult {
    std::string name;
    double mean = 0.0;     // throughput per slot (sum over users)
    double stderr_ = 0.0;  // across replications
    std::vector<double> replication_means;
    long max_selected = 0;
    double mean_selected = 0.0;
    double belief_error = 0.0;  // max tracked-belief deviation (when checked)
};

struct SimResult {
    std::vector<PolicyResult> per_policy;
    std::vector<double> gap_pct;  // (g_base - g)/g_base * 100, aligned with per_policy
    std::string baseline;
};

// Per-user simulation state.
struct SimState {
    std::vector<int> channel;  // true channel
    std::vector<int> label;    // dense belief label
    std::vector<Vector> belief;
};

SimState initial_state(const std::vector<SimUser>& users, const SimConfig& cfg, std::uint64_t rep);

// One slot: select, collect reward, update beliefs and true channels.
double step(SimState& st, const std::vector<SimUser>& users, const SimConfig& cfg, const PolicySpec& pol,
            std::uint64_t rep, long slot, std::vector<int>& selected);

PolicyResult simulate(const std::vector<SimUser>& users, const SimConfig& cfg, const PolicySpec& pol);

// Runs every policy; gaps are taken against the policy named `baseline`
// (first policy if empty).
SimResult run(const std::vector<SimUser>& users, const SimConfig& cfg, const std::vector<PolicySpec>& pols,
              const std::string& baseline = {});

// top-M by score, ties by lower user id
void select_top(const std::vector<double>& score, int M, std::vector<int>& out);

// Stationary policies over joint labels for exact evaluation on a JointMDP.
JointPolicyFn joint_policy_wip(const std::vector<SimUser>& users, int M);
JointPolicyFn joint_policy_myopic(const std::vector<SimUser>& users, int M, bool plain = false);
JointPolicyFn joint_policy_random(int N, int M);

// REL for a heterogeneous user set: one class per user, weight 1/N, lambda = M/N.
RelPolicy rel_for_users(std::vector<SimUser>& users, int M);

}  // namespace pilotidx
