#pragma once

#include "pilotidx/index.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <string>
#include <vector>

namespace pilotidx {

struct FluidClass {
    ChannelModel channel;
    BeliefTable beliefs;
    RewardModel reward;
    WhittleIndexTable index;
};

// Max-belief reward and closed-form index for one class.
FluidClass make_fluid_class(const ChannelModel& m, int tau_bar);

struct FluidConfig {
    std::vector<FluidClass> classes;  // two in the fluid analysis; any count for REL bounds
    std::vector<double> delta;        // class fractions, sum to 1
    double lambda = 0.5;              // pilot fraction
};

// Randomized index-threshold policy meeting the pilot fraction on average.
struct RelPolicy {
    double W_star = 0.0;
    double rho = 0.0;
    int critical = -1;        // flat index of the randomized state
    double lambda = 0.0;      // pilot fraction actually used (perturbed off boundaries)
    std::vector<std::vector<double>> act;  // per class, per local state activation probability
    Vector theta;             // stationary occupancy (flat layout)
    double reward = 0.0;      // per-user long-run reward R^REL
    double activation = 0.0;  // per-user activation fraction
};

struct LinearFluid {
    Matrix Qbar;
    Vector dbar;
    Matrix Qhat;  // critical coordinate eliminated through its class mass
    Vector dhat;
    int eliminated = -1;
    Vector theta;  // solution of Qbar theta + dbar = 0 with class masses fixed
    double fixed_point_residual = 0.0;
    double max_agreement_error = 0.0;  // |drift - (Qbar y + dbar)| over sampled region points
};

struct SpectrumReport {
    Eigen::VectorXcd eigenvalues;
    double max_dev_from_minus_one = 0.0;
    int count_far = 0;                 // eigenvalues farther than 1e-3 from -1
    double nilpotency_residual = 0.0;  // max |(Qhat+I)^n|
};

struct TrajectoryPoint {
    int t = 0;
    double dist = 0.0;  // |y(t) - theta|_inf
    Vector y;
};

class FluidModel {
public:
    explicit FluidModel(FluidConfig cfg);

    int dim() const { return dim_; }
    int tau_bar() const { return tau_bar_; }
    const FluidConfig& config() const { return cfg_; }
    double lambda() const { return cfg_.lambda; }
    int class_of(int i) const { return cls_[i]; }
    int local_of(int i) const { return loc_[i]; }
    int offset(int c) const { return off_[c]; }
    double index_of(int i) const { return W_[i]; }
    // flat indices in decreasing priority (index value, then class, age, channel)
    const std::vector<int>& order() const { return order_; }
    int rank(int i) const { return rank_[i]; }
    std::string state_label(int i) const;

    Vector activation_fractions(const Vector& y) const;
    Vector drift(const Vector& y) const;
    Matrix drift_matrix(const Vector& y) const;  // Q(y) with drift = Q(y) y

    // May nudge lambda off an activation boundary (recorded in the result).
    // With check_steady, every class's steady entry must rank at or above the
    // critical state (Infeasible otherwise); the upper bound for a finite user
    // set does not need it.
    RelPolicy solve_rel_policy(bool check_steady = true);
    RelPolicy rel_from_critical(int critical, double rho, bool check_steady = true) const;

    bool in_region(const Vector& y, const RelPolicy& rel) const;
    std::vector<Vector> sample_region(const RelPolicy& rel, int n, std::uint64_t seed, double radius) const;
    LinearFluid linearize(const RelPolicy& rel, int agreement_points = 100, std::uint64_t seed = 1) const;
    std::vector<TrajectoryPoint> integrate(Vector y, int T, const Vector& theta) const;
    Vector class_masses(const Vector& y) const;

private:
    FluidConfig cfg_;
    int tau_bar_ = 0;
    int dim_ = 0;
    std::vector<int> off_, cls_, loc_, next_, order_, rank_;
    std::vector<double> W_;
};

SpectrumReport spectrum(const Matrix& Qhat);

// Eliminate one coordinate per class (the invariant class-mass subspace).
Matrix restrict_to_masses(const FluidModel& fm, const LinearFluid& lf);

}  // namespace pilotidx
