#include "pilotidx/index.hpp"

#include "pilotidx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pilotidx {

bool ThresholdPolicy::leq(const ThresholdPolicy& o) const {
    if (!o.steady_active) return true;
    if (!steady_active) return false;
    for (size_t j = 0; j < gamma.size(); ++j)
        if (gamma[j] > o.gamma[j]) return false;
    return true;
}

std::string ThresholdPolicy::str() const {
    if (!steady_active) return "never";
    std::ostringstream os;
    os << '(';
    for (size_t j = 0; j < gamma.size(); ++j) os << (j ? "," : "") << gamma[j];
    os << ')';
    return os.str();
}

ThresholdPolicy always_active(int K) { return {std::vector<int>(K, 0), true}; }
ThresholdPolicy never_active(int K, int tau_bar) { return {std::vector<int>(K, tau_bar), false}; }

Vector omega(const ChannelModel& m) { return m.steady; }

OccupancyMeasure occupancy(const ThresholdPolicy& pol, const Vector& om, int tau_bar) {
    const int K = static_cast<int>(om.size());
    OccupancyMeasure occ;
    occ.space = {K, tau_bar};
    occ.omega = om;
    occ.alpha.assign(occ.space.size(), 0.0);
    const StateSpace& sp = occ.space;
    if (!pol.steady_active) {
        bool absorbed = false;
        for (int k = 0; k < K; ++k) absorbed |= pol.gamma[k] >= tau_bar && om(k) > 0.0;
        if (absorbed) {
            occ.alpha[sp.steady()] = 1.0;
            occ.passive_mass = 1.0;
            return occ;
        }
    }
    double den = 0.0;
    for (int k = 0; k < K; ++k) den += (pol.gamma[k] + 1) * om(k);
    for (int j = 0; j < K; ++j) {
        const double a = om(j) / den;
        for (int r = 1; r <= pol.gamma[j] + 1; ++r) {
            int s = r <= tau_bar ? sp.index(j, r) : sp.steady();
            occ.alpha[s] += a;
        }
        occ.passive_mass += pol.gamma[j] * a;
    }
    occ.activation_rate = 1.0 / den;
    return occ;
}

OccupancyMeasure occupancy_randomized(const std::vector<double>& act, const Vector& om, int tau_bar) {
    const int K = static_cast<int>(om.size());
    OccupancyMeasure occ;
    occ.space = {K, tau_bar};
    occ.omega = om;
    const StateSpace& sp = occ.space;
    std::vector<double> visits(sp.size(), 0.0);
    for (int k = 0; k < K; ++k) {
        double mass = om(k);
        int s = sp.index(k, 1);
        while (mass > 0.0) {
            if (sp.is_steady(s)) {
                if (act[s] <= 0.0) {
                    // absorbed: all long-run mass sits at the steady entry
                    occ.alpha.assign(sp.size(), 0.0);
                    occ.alpha[sp.steady()] = 1.0;
                    occ.passive_mass = 1.0;
                    return occ;
                }
                visits[s] += mass / act[s];
                break;
            }
            visits[s] += mass;
            mass *= 1.0 - act[s];
            s = sp.next_passive(s);
        }
    }
    double den = 0.0;
    for (double v : visits) den += v;
    occ.alpha.resize(sp.size());
    for (int s = 0; s < sp.size(); ++s) {
        occ.alpha[s] = visits[s] / den;
        occ.passive_mass += occ.alpha[s] * (1.0 - act[s]);
    }
    occ.activation_rate = 1.0 / den;
    return occ;
}

double avg_reward_for_threshold(const ThresholdPolicy& pol, double W, const RewardModel& rm,
                                const Vector& om) {
    const StateSpace& sp = rm.space;
    OccupancyMeasure occ = occupancy(pol, om, sp.tau_bar);
    double g = 0.0;
    for (int s = 0; s < sp.size(); ++s) {
        if (occ.alpha[s] == 0.0) continue;
        g += occ.alpha[s] * (pol.passive(sp, s) ? rm.state(s) + W : rm.R1);
    }
    return g;
}

double passive_slope(const ThresholdPolicy& pol, const Vector& om, int tau_bar) {
    return occupancy(pol, om, tau_bar).passive_mass;
}

namespace {

void finish_table(WhittleIndexTable& t, double tie) {
    for (const auto& st : t.sequence) {
        if (t.breakpoints.empty() || st.W > t.breakpoints.back() + tie * (1.0 + std::abs(st.W)))
            t.breakpoints.push_back(st.W);
    }
}

}  // namespace

WhittleIndexTable whittle_closed_form(const RewardModel& rm, const Vector& om, const Tolerances& tol) {
    const StateSpace& sp = rm.space;
    const int K = sp.K;
    if (om.size() != K) throw InvalidModel("omega length must equal K");
    A2Report a2 = check_a2(rm, tol);
    if (!a2.pass) throw A2Violation("index construction requires monotone passive rewards");

    WhittleIndexTable t;
    t.space = sp;
    t.W.assign(sp.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<int> gamma(K, 0);
    double acc = 0.0;  // sum_k sum_{r<=Gamma_k} R(pi_k^r,0) omega_k
    double den = om.sum();  // sum_k (Gamma_k+1) omega_k

    for (;;) {
        int u = -1;
        double best = -std::numeric_limits<double>::infinity();
        bool tied = false;
        for (int k = 0; k < K; ++k) {
            if (gamma[k] >= sp.tau_bar) continue;
            double c = rm.at(k, gamma[k] + 1);
            if (u < 0 || c > best + tol.tie) {
                u = k;
                best = c;
                tied = false;
            } else if (std::abs(c - best) <= tol.tie) {
                tied = true;
            }
        }
        if (u < 0) break;
        if (tied) {
            std::ostringstream os;
            os << "argmax tie at step " << t.sequence.size() << "; channel " << u + 1
               << " taken first";
            t.warnings.push_back(os.str());
        }
        const double W = rm.R1 + acc - best * den;
        const int tau = gamma[u] + 1;
        t.W[sp.index(u, tau)] = W;
        gamma[u] = tau;
        acc += best * om(u);
        den += om(u);
        t.sequence.push_back({u, tau, W, gamma});
    }
    // every channel exhausted: the steady entry is activated last
    const double Ws = rm.R1 + acc - rm.steady() * den;
    t.W[sp.steady()] = Ws;
    t.sequence.push_back({-1, 0, Ws, gamma});
    finish_table(t, tol.tie);
    return t;
}

WhittleIndexTable whittle_envelope_oracle(const RewardModel& rm, const Vector& om,
                                          EnvelopeOptions opt, const Tolerances& tol) {
    const StateSpace& sp = rm.space;
    const int K = sp.K;
    if (opt.gamma_max < 0) opt.gamma_max = sp.tau_bar;
    if (opt.gamma_max < sp.tau_bar) throw InvalidModel("gamma_max must be at least tau_bar");
    // thresholds beyond tau_bar coincide with activation at the steady entry
    const int G = sp.tau_bar;
    double size = std::pow(static_cast<double>(opt.gamma_max) + 1.0, K);
    if (size > static_cast<double>(opt.budget))
        throw SearchSpaceTooLarge("threshold search space exceeds budget");

    // enumerate {0..G}^K once: expected reward g^Gamma(0) and passive mass
    const int radix = G + 1;
    long total = 1;
    for (int k = 0; k < K; ++k) total *= radix;
    std::vector<std::vector<int>> gam(total, std::vector<int>(K));
    std::vector<double> ER(total), PM(total);
    for (long c = 0; c < total; ++c) {
        long x = c;
        for (int k = 0; k < K; ++k) {
            gam[c][k] = static_cast<int>(x % radix);
            x /= radix;
        }
        ThresholdPolicy p{gam[c], true};
        OccupancyMeasure occ = occupancy(p, om, sp.tau_bar);
        ER[c] = avg_reward_for_threshold(p, 0.0, rm, om);
        PM[c] = occ.passive_mass;
    }
    const double ER_inf = rm.steady();  // never activate
    const double PM_inf = 1.0;

    WhittleIndexTable t;
    t.space = sp;
    t.W.assign(sp.size(), std::numeric_limits<double>::quiet_NaN());
    long cur = 0;  // all-active
    for (;;) {
        const auto& g0 = gam[cur];
        double best = std::numeric_limits<double>::infinity();
        std::vector<long> arg;  // -1 encodes never-activate
        auto consider = [&](long c, double er, double pm) {
            double r = (ER[cur] - er) / (pm - PM[cur]);
            double eps = tol.tie * (1.0 + std::abs(r));
            if (r < best - eps) {
                best = r;
                arg.assign(1, c);
            } else if (std::abs(r - best) <= eps) {
                arg.push_back(c);
            }
        };
        for (long c = 0; c < total; ++c) {
            if (c == cur) continue;
            bool ge = true;
            for (int k = 0; k < K && ge; ++k) ge = gam[c][k] >= g0[k];
            if (ge) consider(c, ER[c], PM[c]);
        }
        consider(-1, ER_inf, PM_inf);

        // largest minimizer
        long next;
        if (std::find(arg.begin(), arg.end(), -1L) != arg.end()) {
            next = -1;
        } else {
            std::vector<int> top(K, 0);
            for (long c : arg)
                for (int k = 0; k < K; ++k) top[k] = std::max(top[k], gam[c][k]);
            next = -2;
            for (long c : arg)
                if (gam[c] == top) next = c;
            if (next == -2) {
                // not a lattice: fall back to the minimizer with the largest total threshold
                next = arg.front();
                for (long c : arg) {
                    long s1 = 0, s0 = 0;
                    for (int k = 0; k < K; ++k) s1 += gam[c][k], s0 += gam[next][k];
                    if (s1 > s0) next = c;
                }
                t.warnings.push_back("envelope minimizers do not form a lattice");
            }
        }
        if (next == -1) {
            for (int s = 0; s < sp.size(); ++s)
                if (std::isnan(t.W[s])) t.W[s] = best;
            for (int j = 0; j < K; ++j)
                for (int tau = g0[j] + 1; tau <= sp.tau_bar; ++tau)
                    t.sequence.push_back({j, tau, best, std::vector<int>(K, sp.tau_bar)});
            t.sequence.push_back({-1, 0, best, std::vector<int>(K, sp.tau_bar)});
            break;
        }
        for (int j = 0; j < K; ++j)
            for (int tau = g0[j] + 1; tau <= gam[next][j]; ++tau) {
                t.W[sp.index(j, tau)] = best;
                t.sequence.push_back({j, tau, best, gam[next]});
            }
        cur = next;
    }
    finish_table(t, tol.tie);
    return t;
}

ThresholdPolicy threshold_from_index(const WhittleIndexTable& t, double W) {
    const StateSpace& sp = t.space;
    ThresholdPolicy p;
    p.gamma.assign(sp.K, 0);
    for (int j = 0; j < sp.K; ++j) {
        int g = 0;
        while (g < sp.tau_bar && t.at(j, g + 1) <= W) ++g;
        p.gamma[j] = g;
    }
    p.steady_active = W < t.steady();
    return p;
}

IndexabilityReport indexability_check(const ChannelModel& m, const BeliefTable& bt,
                                      const RewardModel& rm, const std::vector<double>& grid,
                                      double vi_tol, const WhittleIndexTable* index) {
    IndexabilityReport rep;
    rep.grid = grid;
    const StateSpace& sp = bt.space;
    for (size_t g = 0; g < grid.size(); ++g) {
        if (g > 0 && !(grid[g] > grid[g - 1])) throw InvalidModel("W grid must be increasing");
        SingleArmMDP mdp = build_single_arm(m, bt, rm, grid[g], Kernel::Approximated);
        AverageResult ar = vi_average(mdp, vi_tol);
        ThresholdPolicy pol = extract_threshold(sp, ar.action);
        int npass = 0;
        for (int s = 0; s < sp.size(); ++s) npass += ar.action[s] == kPassive;
        rep.passive_set_size.push_back(npass);
        if (!rep.policies.empty() && !rep.policies.back().leq(pol) && rep.monotone) {
            rep.monotone = false;
            std::ostringstream os;
            os << "threshold " << rep.policies.back().str() << " at W=" << grid[g - 1] << " exceeds "
               << pol.str() << " at W=" << grid[g];
            rep.first_violation = os.str();
        }
        if (index) {
            // knife-edge grid points (within 1e-7 of an index value) are not compared
            bool edge = false;
            for (double w : index->W) edge |= std::abs(w - grid[g]) < 1e-7;
            if (!edge && !(threshold_from_index(*index, grid[g]) == pol)) {
                if (rep.matches_index && rep.first_violation.empty()) {
                    std::ostringstream os;
                    os << "VI threshold " << pol.str() << " differs from index threshold "
                       << threshold_from_index(*index, grid[g]).str() << " at W=" << grid[g];
                    rep.first_violation = os.str();
                }
                rep.matches_index = false;
            }
        }
        rep.policies.push_back(pol);
    }
    return rep;
}

}  // namespace pilotidx
