#include "pilotidx/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace pilotidx {

double g_app_closed_form(double W, const RewardModel& rm, const Vector& ps, const ThresholdPolicy& pol) {
    const StateSpace& sp = rm.space;
    if (!pol.steady_active) {
        for (int k = 0; k < sp.K; ++k)
            if (pol.gamma[k] >= sp.tau_bar && ps(k) > 0.0) return rm.steady() + W;
    }
    double num = rm.R1, den = 0.0;
    for (int k = 0; k < sp.K; ++k) {
        double part = 0.0;
        for (int i = 1; i <= pol.gamma[k]; ++i) part += rm.at(k, i) + W;
        num += ps(k) * part;
        den += (pol.gamma[k] + 1) * ps(k);
    }
    return num / den;
}

double cycle_average(double W, const RewardModel& rm, int j, int G) {
    double num = rm.R1;
    for (int i = 1; i <= G; ++i) num += rm.at(j, i) + W;
    return num / (G + 1);
}

BoundGains bound_mdps(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm, double W,
                      double tol) {
    BoundGains b;
    b.vi_max = vi_average(build_bounding_arm(m, bt, rm, W, ActiveRule::Max), tol);
    b.vi_min = vi_average(build_bounding_arm(m, bt, rm, W, ActiveRule::Min), tol);
    b.g_max = b.vi_max.gain;
    b.g_min = b.vi_min.gain;
    return b;
}

namespace {

// Closed form of a bounding model's gain from its solved policy: the chain ends
// up cycling in one channel, picked as argmax/argmin of the cycle averages.
double bound_closed_form(double W, const RewardModel& rm, const ThresholdPolicy& pol, bool upper, int& sigma) {
    const StateSpace& sp = rm.space;
    sigma = -1;
    if (!pol.steady_active) return rm.steady() + W;
    double best = upper ? -INFINITY : INFINITY;
    for (int j = 0; j < sp.K; ++j) {
        double c = cycle_average(W, rm, j, pol.gamma[j]);
        if (upper ? c > best : c < best) {
            best = c;
            sigma = j;
        }
    }
    return best;
}

}  // namespace

BoundReport error_bound(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm, double W,
                        double tol) {
    BoundReport r;
    r.W = W;
    const StateSpace& sp = bt.space;
    AverageResult app = vi_average(build_single_arm(m, bt, rm, W, Kernel::Approximated), tol);
    AverageResult orig = vi_average(build_single_arm(m, bt, rm, W, Kernel::Original), tol);
    BoundGains bg = bound_mdps(m, bt, rm, W, tol);
    r.g_app = app.gain;
    r.g_orig = orig.gain;
    r.g_max = bg.g_max;
    r.g_min = bg.g_min;
    r.pol_app = extract_threshold(sp, app.action);
    r.g_app_cf = g_app_closed_form(W, rm, m.steady, r.pol_app);
    try {
        r.pol_max = extract_threshold(sp, bg.vi_max.action);
        r.g_max_cf = bound_closed_form(W, rm, r.pol_max, true, r.sigma_max);
    } catch (const NonThresholdPolicy&) {
        r.max_threshold = false;
        r.g_max_cf = NAN;
    }
    try {
        r.pol_min = extract_threshold(sp, bg.vi_min.action);
        r.g_min_cf = bound_closed_form(W, rm, r.pol_min, false, r.sigma_min);
    } catch (const NonThresholdPolicy&) {
        r.min_threshold = false;
        r.g_min_cf = NAN;
    }
    if (!(r.g_min > 0.0)) throw DegenerateGain("minimum-bound gain is not positive");
    r.D = std::max(1.0 - r.g_app / r.g_max, r.g_app / r.g_min - 1.0);
    r.rel_err = std::abs(1.0 - r.g_app / r.g_orig);
    return r;
}

std::vector<BoundReport> bound_sweep(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm,
                                     const std::vector<double>& grid, double tol) {
    std::vector<BoundReport> out;
    out.reserve(grid.size());
    for (double W : grid) out.push_back(error_bound(m, bt, rm, W, tol));
    return out;
}

}  // namespace pilotidx
