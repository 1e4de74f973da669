#pragma once

#include "pilotidx/index.hpp"

#include <vector>

namespace pilotidx {

enum class Kernel { Approximated, Original };

// How the continuation after an active decision is formed.
//  Expected: sum_i q1(s, i) V(i,1)   (approximated or original kernel)
//  Max/Min:  max_i / min_i V(i,1)    (bounding models)
enum class ActiveRule { Expected, Max, Min };

struct SingleArmMDP {
    StateSpace space;
    double W = 0.0;
    std::vector<double> r_passive;  // R(pi,0) + W
    double r_active = 0.0;          // R1
    Matrix q1;                      // S x K: probability of landing in (i,1)
    ActiveRule rule = ActiveRule::Expected;
    Kernel kernel = Kernel::Approximated;
};

SingleArmMDP build_single_arm(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm,
                              double W, Kernel kernel);
SingleArmMDP build_bounding_arm(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm,
                                double W, ActiveRule rule);

// Action codes
constexpr int kPassive = 0;
constexpr int kActive = 1;

struct DiscountedResult {
    std::vector<double> V;
    std::vector<int> action;
    long iterations = 0;
};

DiscountedResult vi_discounted(const SingleArmMDP& mdp, double beta, double tol,
                               long max_iter = 1'000'000);

struct AverageOptions {
    long max_iter = 1'000'000;
    double aperiodicity = 0.5;  // P -> kappa P + (1-kappa) I, same gain/bias
    int reference = 0;          // dense state index of the reference (pi_1^1)
};

struct AverageResult {
    double gain = 0.0;
    std::vector<double> bias;
    std::vector<int> action;
    long iterations = 0;
};

AverageResult vi_average(const SingleArmMDP& mdp, double tol, AverageOptions opt = {});

// Per-state greedy action for a given value/bias vector (ties go passive).
std::vector<int> greedy_actions(const SingleArmMDP& mdp, const std::vector<double>& V, double beta,
                                double tie_eps);

ThresholdPolicy extract_threshold(const StateSpace& sp, const std::vector<int>& action);

// Analytic value of a threshold policy under the approximated kernel.
// Returns V for every dense state (values at (j,1) are the closed-form display).
std::vector<double> closed_form_value(const ThresholdPolicy& pol, double W, double beta,
                                      const RewardModel& rm, const Vector& ps);

}  // namespace pilotidx
