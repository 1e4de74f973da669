#include "pilotidx/joint.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace pilotidx {

Arm make_arm(const ChannelModel& m, const BeliefTable& bt, const RewardModel& rm, Kernel kernel) {
    SingleArmMDP mdp = build_single_arm(m, bt, rm, 0.0, kernel);
    return {mdp.space, mdp.r_passive, mdp.r_active, mdp.q1};
}

long JointMDP::encode(const std::vector<int>& labels) const {
    long x = 0;
    for (int n = 0; n < N(); ++n) x += stride[n] * labels[n];
    return x;
}

JointMDP build_joint(std::vector<Arm> arms, int M, double budget) {
    if (arms.empty()) throw InvalidModel("joint model needs at least one user");
    if (arms.size() > 16) throw BudgetExceeded("joint model limited to 16 users");
    const int N = static_cast<int>(arms.size());
    if (M < 0 || M > N) throw InvalidModel("pilot count must satisfy 0 <= M <= N");
    JointMDP jm;
    jm.M = M;
    jm.stride.resize(N);
    double states = 1.0;
    for (int n = 0; n < N; ++n) states *= arms[n].space.size();
    for (std::uint32_t mask = 0; mask < (1u << N); ++mask)
        if (std::popcount(mask) <= M) jm.actions.push_back(mask);
    std::stable_sort(jm.actions.begin(), jm.actions.end(), [](std::uint32_t a, std::uint32_t b) {
        return std::popcount(a) < std::popcount(b);
    });
    if (states * jm.actions.size() > budget)
        throw BudgetExceeded("joint state-action count " + std::to_string(states * jm.actions.size()) +
                             " exceeds budget");
    long s = 1;
    for (int n = 0; n < N; ++n) {
        jm.stride[n] = s;
        s *= arms[n].space.size();
    }
    jm.states = s;
    jm.arms = std::move(arms);
    return jm;
}

namespace {

struct Decoded {
    int lab[16];
    long pass_base = 0;  // index with every user's passive successor
    double r_pass_all = 0.0;
};

inline void decode(const JointMDP& jm, long x, Decoded& d) {
    d.pass_base = 0;
    d.r_pass_all = 0.0;
    for (int n = 0; n < jm.N(); ++n) {
        const Arm& a = jm.arms[n];
        int l = static_cast<int>(x / jm.stride[n] % a.space.size());
        d.lab[n] = l;
        d.pass_base += jm.stride[n] * a.space.next_passive(l);
        d.r_pass_all += a.r_passive[l];
    }
}

// reward + expected h(next) for one action
inline double backup(const JointMDP& jm, const Decoded& d, std::uint32_t mask, const double* h) {
    double r = d.r_pass_all;
    long base = d.pass_base;
    int act[16];
    int na = 0;
    for (int n = 0; n < jm.N(); ++n) {
        if (mask >> n & 1u) {
            const Arm& a = jm.arms[n];
            r += a.R1 - a.r_passive[d.lab[n]];
            base -= jm.stride[n] * a.space.next_passive(d.lab[n]);
            act[na++] = n;
        }
    }
    if (na == 0) return r + h[base];
    // enumerate landing channels of the active users
    double acc = 0.0;
    int idx[16] = {0};
    for (;;) {
        double p = 1.0;
        long y = base;
        for (int t = 0; t < na; ++t) {
            const Arm& a = jm.arms[act[t]];
            p *= a.q1(d.lab[act[t]], idx[t]);
            y += jm.stride[act[t]] * a.space.index(idx[t], 1);
        }
        if (p != 0.0) acc += p * h[y];
        int t = 0;
        while (t < na && ++idx[t] == jm.arms[act[t]].space.K) idx[t++] = 0;
        if (t == na) break;
    }
    return r + acc;
}

}  // namespace

JointResult vi_joint_average(const JointMDP& jm, double tol, JointOptions opt) {
    const long S = jm.states;
    const double k = opt.aperiodicity;
    std::vector<double> h(S, 0.0), Th(S);
    const int nthreads = std::max(1, opt.threads);
    std::vector<double> lo_t(nthreads), hi_t(nthreads);
    JointResult res;
    for (long sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        auto body = [&](long a, long b) {
            double l = std::numeric_limits<double>::infinity(), u = -l;
            Decoded d;
            for (long x = a; x < b; ++x) {
                decode(jm, x, d);
                double best = -std::numeric_limits<double>::infinity();
                for (std::uint32_t mask : jm.actions) best = std::max(best, backup(jm, d, mask, h.data()));
                Th[x] = k * best + (1.0 - k) * h[x];
                double diff = Th[x] - h[x];
                l = std::min(l, diff);
                u = std::max(u, diff);
            }
            return std::pair{l, u};
        };
        if (nthreads == 1) {
            auto [l, u] = body(0, S);
            lo = l, hi = u;
        } else {
            std::vector<std::pair<double, double>> parts(nthreads,
                {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
            const long chunk = (S + nthreads - 1) / nthreads;
            detail::parallel_for(nthreads, nthreads, [&](long t0, long t1) {
                for (long t = t0; t < t1; ++t) {
                    long a = t * chunk, b = std::min(S, a + chunk);
                    if (a < b) parts[t] = body(a, b);
                }
            });
            for (auto& [l, u] : parts) lo = std::min(lo, l), hi = std::max(hi, u);
        }
        const double ref = Th[0];
        for (long x = 0; x < S; ++x) h[x] = Th[x] - ref;
        res.sweeps = sweep;
        if (hi - lo < k * tol) {
            res.gain = 0.5 * (hi + lo) / k;
            res.policy.resize(S);
            Decoded d;
            std::vector<double> q(jm.actions.size());
            for (long x = 0; x < S; ++x) {
                decode(jm, x, d);
                double best = -std::numeric_limits<double>::infinity();
                for (size_t a = 0; a < jm.actions.size(); ++a) {
                    q[a] = backup(jm, d, jm.actions[a], h.data());
                    best = std::max(best, q[a]);
                }
                // first action within the tie band: fewest active users, lowest mask
                for (size_t a = 0; a < jm.actions.size(); ++a)
                    if (q[a] >= best - 10.0 * tol) {
                        res.policy[x] = jm.actions[a];
                        break;
                    }
            }
            res.bias = std::move(h);
            return res;
        }
    }
    throw NoConvergence("joint relative value iteration hit the sweep cap");
}

double evaluate_joint_policy(const JointMDP& jm, const JointPolicyFn& pol, double tol, JointOptions opt) {
    const long S = jm.states;
    // materialize the policy once
    std::vector<long> start(S + 1, 0);
    std::vector<std::pair<std::uint32_t, double>> acts, tmp;
    std::vector<int> labels(jm.N());
    for (long x = 0; x < S; ++x) {
        for (int n = 0; n < jm.N(); ++n) labels[n] = jm.label(x, n);
        tmp.clear();
        pol(labels, tmp);
        for (auto& a : tmp)
            if (std::popcount(a.first) > jm.M || (a.first >> jm.N()) != 0)
                throw InvalidModel("policy selects more users than pilots");
        acts.insert(acts.end(), tmp.begin(), tmp.end());
        start[x + 1] = static_cast<long>(acts.size());
    }
    const double k = opt.aperiodicity;
    std::vector<double> h(S, 0.0), Th(S);
    for (long sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        Decoded d;
        for (long x = 0; x < S; ++x) {
            decode(jm, x, d);
            double v = 0.0;
            for (long a = start[x]; a < start[x + 1]; ++a) v += acts[a].second * backup(jm, d, acts[a].first, h.data());
            Th[x] = k * v + (1.0 - k) * h[x];
            double diff = Th[x] - h[x];
            lo = std::min(lo, diff);
            hi = std::max(hi, diff);
        }
        const double ref = Th[0];
        for (long x = 0; x < S; ++x) h[x] = Th[x] - ref;
        if (hi - lo < k * tol) return 0.5 * (hi + lo) / k;
    }
    throw NoConvergence("policy evaluation hit the sweep cap");
}

std::string joint_state_label(const JointMDP& jm, long x) {
    std::ostringstream os;
    for (int n = 0; n < jm.N(); ++n) os << (n ? "|" : "") << jm.arms[n].space.label(jm.label(x, n));
    return os.str();
}

}  // namespace pilotidx
