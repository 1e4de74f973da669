#include "pilotidx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pilotidx {

SingleArmMDP build_single_arm(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm,
                              double W, Kernel kernel) {
    const StateSpace& sp = bt.space;
    if (rm.space.K != sp.K || rm.space.tau_bar != sp.tau_bar || m.K != sp.K)
        throw InvalidModel("channel, belief table and reward model disagree on dimensions");
    SingleArmMDP mdp;
    mdp.space = sp;
    mdp.W = W;
    mdp.kernel = kernel;
    mdp.r_active = rm.R1;
    mdp.r_passive.resize(sp.size());
    for (int s = 0; s < sp.size(); ++s) mdp.r_passive[s] = rm.state(s) + W;
    mdp.q1.resize(sp.size(), sp.K);
    for (int s = 0; s < sp.size(); ++s) {
        // the steady entry uses p^s under both kernels
        if (kernel == Kernel::Approximated || sp.is_steady(s))
            mdp.q1.row(s) = m.steady.transpose();
        else
            mdp.q1.row(s) = bt.vec[s].transpose();
    }
    return mdp;
}

SingleArmMDP build_bounding_arm(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm,
                                double W, ActiveRule rule) {
    SingleArmMDP mdp = build_single_arm(m, bt, rm, W, Kernel::Approximated);
    mdp.rule = rule;
    return mdp;
}

namespace {

// Continuation after activation from state s given values at the (i,1) states.
inline double active_cont(const SingleArmMDP& mdp, int s, const std::vector<double>& V) {
    const StateSpace& sp = mdp.space;
    switch (mdp.rule) {
        case ActiveRule::Max: {
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < sp.K; ++i) best = std::max(best, V[sp.index(i, 1)]);
            return best;
        }
        case ActiveRule::Min: {
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < sp.K; ++i) best = std::min(best, V[sp.index(i, 1)]);
            return best;
        }
        default: {
            double acc = 0.0;
            for (int i = 0; i < sp.K; ++i) acc += mdp.q1(s, i) * V[sp.index(i, 1)];
            return acc;
        }
    }
}

}  // namespace

std::vector<int> greedy_actions(const SingleArmMDP& mdp, const std::vector<double>& V, double beta,
                                double tie_eps) {
    const StateSpace& sp = mdp.space;
    std::vector<int> a(sp.size());
    for (int s = 0; s < sp.size(); ++s) {
        double qp = mdp.r_passive[s] + beta * V[sp.next_passive(s)];
        double qa = mdp.r_active + beta * active_cont(mdp, s, V);
        a[s] = qa > qp + tie_eps ? kActive : kPassive;
    }
    return a;
}

DiscountedResult vi_discounted(const SingleArmMDP& mdp, double beta, double tol, long max_iter) {
    if (!(beta >= 0.0 && beta < 1.0)) throw InvalidModel("discount factor must lie in [0,1)");
    const StateSpace& sp = mdp.space;
    const int S = sp.size();
    std::vector<double> V(S, 0.0), Vn(S);
    const double stop = beta > 0.0 ? tol * (1.0 - beta) / (2.0 * beta) : 0.0;
    DiscountedResult res;
    for (long it = 1; it <= max_iter; ++it) {
        double diff = 0.0;
        for (int s = 0; s < S; ++s) {
            double qp = mdp.r_passive[s] + beta * V[sp.next_passive(s)];
            double qa = mdp.r_active + beta * active_cont(mdp, s, V);
            Vn[s] = std::max(qp, qa);
            diff = std::max(diff, std::abs(Vn[s] - V[s]));
        }
        V.swap(Vn);
        res.iterations = it;
        if (beta == 0.0 || diff < stop) {
            res.V = V;
            double scale = 1.0;
            for (double v : V) scale = std::max(scale, std::abs(v));
            res.action = greedy_actions(mdp, V, beta, 1e-12 * scale);
            return res;
        }
    }
    throw NoConvergence("discounted value iteration hit the iteration cap");
}

AverageResult vi_average(const SingleArmMDP& mdp, double tol, AverageOptions opt) {
    const StateSpace& sp = mdp.space;
    const int S = sp.size();
    const double k = opt.aperiodicity;
    if (!(k > 0.0 && k <= 1.0)) throw InvalidModel("aperiodicity factor must lie in (0,1]");
    if (opt.reference < 0 || opt.reference >= S) throw InvalidModel("reference state out of range");
    std::vector<double> h(S, 0.0), Th(S);
    AverageResult res;
    for (long it = 1; it <= opt.max_iter; ++it) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int s = 0; s < S; ++s) {
            double qp = mdp.r_passive[s] + h[sp.next_passive(s)];
            double qa = mdp.r_active + active_cont(mdp, s, h);
            Th[s] = k * std::max(qp, qa) + (1.0 - k) * h[s];
            double d = Th[s] - h[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        const double ref = Th[opt.reference];
        for (int s = 0; s < S; ++s) h[s] = Th[s] - ref;
        res.iterations = it;
        if (hi - lo < k * tol) {
            res.gain = 0.5 * (hi + lo) / k;
            res.bias = h;
            res.action = greedy_actions(mdp, h, 1.0, 10.0 * tol);
            return res;
        }
    }
    throw NoConvergence("relative value iteration hit the iteration cap");
}

ThresholdPolicy extract_threshold(const StateSpace& sp, const std::vector<int>& action) {
    ThresholdPolicy pol;
    pol.gamma.assign(sp.K, 0);
    for (int j = 0; j < sp.K; ++j) {
        int g = 0;
        while (g < sp.tau_bar && action[sp.index(j, g + 1)] == kPassive) ++g;
        for (int tau = g + 1; tau <= sp.tau_bar; ++tau)
            if (action[sp.index(j, tau)] != kActive)
                throw NonThresholdPolicy("policy is not of threshold type at channel " +
                                         std::to_string(j + 1) + ", age " + std::to_string(tau));
        pol.gamma[j] = g;
    }
    pol.steady_active = action[sp.steady()] == kActive;
    return pol;
}

std::vector<double> closed_form_value(const ThresholdPolicy& pol, double W, double beta,
                                      const RewardModel& rm, const Vector& ps) {
    const StateSpace& sp = rm.space;
    const int K = sp.K;
    // A_k: discounted reward of one cycle started at (k,1) up to and including
    // the activation; c_k: discount applied to the restart (0 if absorbed).
    std::vector<double> A(K), c(K);
    double num = 0.0, den = 1.0;
    for (int k = 0; k < K; ++k) {
        const int G = pol.gamma[k];
        double a = 0.0, b = 1.0;
        for (int i = 1; i <= G; ++i) {
            a += b * (rm.at(k, i) + W);
            b *= beta;
        }
        if (G == sp.tau_bar && !pol.steady_active) {
            if (beta >= 1.0) throw DegenerateBelief("never-activate value diverges for beta = 1");
            a += b * (rm.steady() + W) / (1.0 - beta);
            c[k] = 0.0;
        } else {
            a += b * rm.R1;
            c[k] = b * beta;
        }
        A[k] = a;
        num += ps(k) * a;
        den -= ps(k) * c[k];
    }
    if (std::abs(den) < 1e-300) throw DegenerateBelief("closed-form denominator vanishes");
    const double S = num / den;  // sum_k p^s_k V(pi_k^1)

    std::vector<double> V(sp.size());
    const double restart = rm.R1 + beta * S;
    for (int j = 0; j < K; ++j) {
        const int G = pol.gamma[j];
        for (int tau = sp.tau_bar; tau >= 1; --tau) {
            const int s = sp.index(j, tau);
            if (tau > G) {
                V[s] = restart;
            } else {
                double next = tau < sp.tau_bar ? V[sp.index(j, tau + 1)] : 0.0;
                if (tau == sp.tau_bar)
                    next = pol.steady_active ? restart : (rm.steady() + W) / (1.0 - beta);
                V[s] = rm.at(j, tau) + W + beta * next;
            }
        }
        // V(pi_j^1) equals A_j + c_j S by construction
    }
    V[sp.steady()] = pol.steady_active ? restart : (rm.steady() + W) / (1.0 - beta);
    return V;
}

}  // namespace pilotidx
