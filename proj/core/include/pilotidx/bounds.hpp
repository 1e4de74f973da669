#pragma once

#include "pilotidx/oracle.hpp"

#include <vector>

namespace pilotidx {

struct BoundReport {
    double W = 0.0;
    double g_app = 0.0, g_max = 0.0, g_min = 0.0, g_orig = 0.0;
    double D = 0.0;
    double rel_err = 0.0;
    // closed forms evaluated at the thresholds recovered from the VI policies
    double g_app_cf = 0.0, g_max_cf = 0.0, g_min_cf = 0.0;
    int sigma_max = -1, sigma_min = -1;  // 0-based; -1 when the policy never activates
    ThresholdPolicy pol_app, pol_max, pol_min;
    bool max_threshold = true, min_threshold = true;  // bounding policies of threshold type
};

// [R1 + sum_k p^s_k sum_{i<=tau_k}(R(pi_k^i,0)+W)] / sum_k (tau_k+1) p^s_k
double g_app_closed_form(double W, const RewardModel& rm, const Vector& ps, const ThresholdPolicy& pol);

// Per-channel cycle average [R1 + sum_{i<=G}(R(pi_j^i,0)+W)] / (G+1).
double cycle_average(double W, const RewardModel& rm, int j, int G);

struct BoundGains {
    double g_max = 0.0, g_min = 0.0;
    AverageResult vi_max, vi_min;
};

BoundGains bound_mdps(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm, double W,
                      double tol);

// Throws DegenerateGain when g_min <= 0.
BoundReport error_bound(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm, double W,
                        double tol);

std::vector<BoundReport> bound_sweep(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm,
                                     const std::vector<double>& grid, double tol);

}  // namespace pilotidx
