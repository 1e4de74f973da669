#pragma once

#include "pilotidx/reward.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pilotidx {

// Passive for tau <= gamma[j], active at tau = gamma[j]+1. gamma[j] == tau_bar
// means the activation happens at the steady entry. steady_active == false is
// the never-activate policy (steady entry absorbs under passivity).
struct ThresholdPolicy {
    std::vector<int> gamma;
    bool steady_active = true;

    bool passive(const StateSpace& sp, int s) const {
        if (sp.is_steady(s)) return !steady_active;
        return sp.age(s) <= gamma[sp.channel(s)];
    }
    bool operator==(const ThresholdPolicy&) const = default;
    // componentwise order; never-activate is the top element
    bool leq(const ThresholdPolicy& o) const;
    std::string str() const;
};

ThresholdPolicy always_active(int K);
ThresholdPolicy never_active(int K, int tau_bar);

Vector omega(const ChannelModel& m);

struct OccupancyMeasure {
    StateSpace space;
    std::vector<double> alpha;  // per dense state
    Vector omega;
    double passive_mass = 0.0;
    double activation_rate = 0.0;  // mass of active decisions per slot
};

OccupancyMeasure occupancy(const ThresholdPolicy& pol, const Vector& omega, int tau_bar);

// Renewal occupancy for an arbitrary per-state activation probability; used for
// randomized threshold policies. Cycles start at (k,1) with weight omega_k.
OccupancyMeasure occupancy_randomized(const std::vector<double>& act_prob, const Vector& omega,
                                      int tau_bar);

double avg_reward_for_threshold(const ThresholdPolicy& pol, double W, const RewardModel& rm,
                                const Vector& omega);
double passive_slope(const ThresholdPolicy& pol, const Vector& omega, int tau_bar);

struct IndexStep {
    int channel = -1;  // 0-based; -1 for the steady entry
    int tau = 0;
    double W = 0.0;
    std::vector<int> gamma;  // thresholds after this step
};

struct WhittleIndexTable {
    StateSpace space;
    std::vector<double> W;  // per dense state, steady last
    std::vector<double> breakpoints;
    std::vector<IndexStep> sequence;
    std::vector<std::string> warnings;

    double at(int j, int tau) const { return W[space.index(j, tau)]; }
    double steady() const { return W[space.steady()]; }
};

WhittleIndexTable whittle_closed_form(const RewardModel& rm, const Vector& omega,
                                      const Tolerances& tol = default_tolerances());

struct EnvelopeOptions {
    int gamma_max = -1;                     // defaults to tau_bar
    std::uint64_t budget = 20'000'000;      // max size of {0..gamma_max}^K
};

WhittleIndexTable whittle_envelope_oracle(const RewardModel& rm, const Vector& omega,
                                          EnvelopeOptions opt = {},
                                          const Tolerances& tol = default_tolerances());

// Optimal threshold for W read off an index table (passive iff W >= index).
ThresholdPolicy threshold_from_index(const WhittleIndexTable& t, double W);

struct IndexabilityReport {
    bool monotone = true;
    bool matches_index = true;  // VI thresholds agree with threshold_from_index
    std::vector<double> grid;
    std::vector<ThresholdPolicy> policies;
    std::vector<double> passive_set_size;  // number of passive states per W
    std::string first_violation;
};

// Average-reward VI on the approximated single-arm model at every grid point.
IndexabilityReport indexability_check(const ChannelModel& m, const BeliefTable& bt,
                                      const RewardModel& rm, const std::vector<double>& grid,
                                      double vi_tol = 1e-11,
                                      const WhittleIndexTable* index = nullptr);

}  // namespace pilotidx
