#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace pilotidx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define PILOTIDX_ERROR(Name)                 \
    struct Name : Error {                    \
        using Error::Error;                  \
    }

PILOTIDX_ERROR(NonErgodic);
PILOTIDX_ERROR(InvalidModel);
PILOTIDX_ERROR(A2Violation);
PILOTIDX_ERROR(SearchSpaceTooLarge);
PILOTIDX_ERROR(NonThresholdPolicy);
PILOTIDX_ERROR(NoConvergence);
PILOTIDX_ERROR(BudgetExceeded);
PILOTIDX_ERROR(DegenerateGain);
PILOTIDX_ERROR(DegenerateBelief);
PILOTIDX_ERROR(Infeasible);
PILOTIDX_ERROR(RegionEmpty);
PILOTIDX_ERROR(OptimalUnavailable);
PILOTIDX_ERROR(ConfigError);

#undef PILOTIDX_ERROR

// Tolerances live in one place so callers (and the CLI) can override them.
struct Tolerances {
    double stochastic = 1e-12;    // row sums
    double steady = 1e-10;        // p^s P = p^s
    double positive = 1e-14;      // "positive entry" for the ergodicity digraph
    double tail_warn = 1e-3;      // |pi_j^taubar - p^s|_inf warning threshold
    double tie = 1e-12;           // argmax / index comparisons
    double monotone = 1e-12;      // slack for A1/A2 checks
};

Tolerances& default_tolerances();

// Dense single-arm state layout: s = j*tau_bar + (tau-1), steady entry last.
// j is 0-based internally; exports use 1-based labels.
struct StateSpace {
    int K = 0;
    int tau_bar = 0;

    int size() const { return K * tau_bar + 1; }
    int index(int j, int tau) const { return j * tau_bar + (tau - 1); }
    int steady() const { return K * tau_bar; }
    bool is_steady(int s) const { return s == steady(); }
    int channel(int s) const { return s / tau_bar; }
    int age(int s) const { return s % tau_bar + 1; }
    // passive successor: age+1, tau_bar -> steady, steady -> steady
    int next_passive(int s) const {
        if (s == steady()) return s;
        return age(s) == tau_bar ? steady() : s + 1;
    }
    std::string label(int s) const;
};

}  // namespace pilotidx
