#include "pilotidx/sim.hpp"

#include "parallel.hpp"
#include "pilotidx/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace pilotidx {

namespace {

enum Stream : std::uint64_t { kInit = 0, kEvolve = 1, kPolicy = 2, kObserve = 3 };

int sample(const Vector& p, double u) {
    double c = 0.0;
    for (int k = 0; k < p.size(); ++k) {
        c += p(k);
        if (u < c) return k;
    }
    // u landed in rounding slack: last state with positive mass
    for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
        if (p(k) > 0.0) return k;
    return 0;
}

int sample_row(const Matrix& P, int j, double u) {
    double c = 0.0;
    for (int k = 0; k < P.cols(); ++k) {
        c += P(j, k);
        if (u < c) return k;
    }
    for (int k = static_cast<int>(P.cols()) - 1; k >= 0; --k)
        if (P(j, k) > 0.0) return k;
    return 0;
}

double myopic_score(const SimUser& u, int label, bool plain) {
    return plain ? u.reward.R1 : u.reward.R1 - u.reward.state(label);
}

// Pairwise sum with a fixed split, independent of thread schedule.
double pairwise_sum(const double* x, long n) {
    if (n <= 8) {
        double s = 0.0;
        for (long i = 0; i < n; ++i) s += x[i];
        return s;
    }
    long h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace

SimUser make_sim_user(const ChannelModel& m, int tau_bar) {
    SimUser u;
    u.channel = m;
    u.beliefs = belief_table(m, tau_bar);
    u.reward = max_belief_reward(m, u.beliefs);
    u.index = whittle_closed_form(u.reward, omega(m));
    return u;
}

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::WIP: return "wip";
        case PolicyKind::Myopic: return "myopic";
        case PolicyKind::Random: return "random";
        case PolicyKind::REL: return "rel";
        case PolicyKind::Optimal: return "optimal";
        case PolicyKind::Threshold: return "threshold";
    }
    return "?";
}

PolicyKind policy_from_string(const std::string& s) {
    for (PolicyKind k : {PolicyKind::WIP, PolicyKind::Myopic, PolicyKind::Random, PolicyKind::REL,
                         PolicyKind::Optimal, PolicyKind::Threshold})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown policy '" + s + "'");
}

void select_top(const std::vector<double>& score, int M, std::vector<int>& out) {
    const int N = static_cast<int>(score.size());
    out.resize(N);
    std::iota(out.begin(), out.end(), 0);
    M = std::clamp(M, 0, N);
    auto better = [&](int a, int b) { return score[a] > score[b] || (score[a] == score[b] && a < b); };
    if (M < N) std::nth_element(out.begin(), out.begin() + M, out.end(), better);
    out.resize(M);
    std::sort(out.begin(), out.end());
}

SimState initial_state(const std::vector<SimUser>& users, const SimConfig& cfg, std::uint64_t rep) {
    SimState st;
    const int N = static_cast<int>(users.size());
    st.channel.resize(N);
    st.label.resize(N);
    for (int n = 0; n < N; ++n) {
        const SimUser& u = users[n];
        st.channel[n] = sample(u.channel.steady, counter_uniform(cfg.seed, rep, n, 0, kInit));
        st.label[n] = u.reward.space.steady();
        if (cfg.check_beliefs) st.belief.push_back(u.channel.steady);
    }
    return st;
}

double step(SimState& st, const std::vector<SimUser>& users, const SimConfig& cfg, const PolicySpec& pol,
            std::uint64_t rep, long slot, std::vector<int>& selected) {
    const int N = static_cast<int>(users.size());
    const std::uint64_t cslot = static_cast<std::uint64_t>(slot) + 1;
    selected.clear();
    switch (pol.kind) {
        case PolicyKind::WIP:
        case PolicyKind::Myopic:
        case PolicyKind::Random: {
            std::vector<double> score(N);
            for (int n = 0; n < N; ++n) {
                if (pol.kind == PolicyKind::WIP)
                    score[n] = users[n].index.W[st.label[n]];
                else if (pol.kind == PolicyKind::Myopic)
                    score[n] = myopic_score(users[n], st.label[n], cfg.myopic_plain);
                else
                    score[n] = counter_uniform(cfg.seed, rep, n, cslot, kPolicy);
            }
            select_top(score, cfg.M, selected);
            break;
        }
        case PolicyKind::REL: {
            if (!pol.rel) throw ConfigError("REL policy needs a solved relaxation");
            for (int n = 0; n < N; ++n) {
                double a = pol.rel->act[users[n].rel_class][st.label[n]];
                if (a >= 1.0 || (a > 0.0 && counter_uniform(cfg.seed, rep, n, cslot, kPolicy) < a))
                    selected.push_back(n);
            }
            break;
        }
        case PolicyKind::Optimal: {
            if (!pol.joint || !pol.optimal) throw OptimalUnavailable("no joint solution for the optimal policy");
            if (pol.joint->N() != N) throw ConfigError("joint solution has a different user count");
            std::uint32_t mask = pol.optimal->policy[pol.joint->encode(st.label)];
            for (int n = 0; n < N; ++n)
                if (mask >> n & 1u) selected.push_back(n);
            break;
        }
        case PolicyKind::Threshold: {
            if (static_cast<int>(pol.thresholds.size()) != N) throw ConfigError("one threshold policy per user");
            for (int n = 0; n < N; ++n)
                if (!pol.thresholds[n].passive(users[n].reward.space, st.label[n])) selected.push_back(n);
            break;
        }
    }

    double reward = 0.0;
    std::size_t next_sel = 0;
    for (int n = 0; n < N; ++n) {
        const SimUser& u = users[n];
        const StateSpace& sp = u.reward.space;
        const bool active = next_sel < selected.size() && selected[next_sel] == n;
        if (active) {
            ++next_sel;
            int obs = st.channel[n];
            if (cfg.dynamics == Dynamics::Approximated)
                obs = sample(u.channel.steady, counter_uniform(cfg.seed, rep, n, cslot, kObserve));
            reward += cfg.reward == RewardMode::Realized ? u.channel.rates(obs) : u.reward.R1;
            st.label[n] = sp.index(obs, 1);
            if (cfg.check_beliefs) st.belief[n] = u.channel.P.row(obs).transpose();
        } else {
            reward += u.reward.state(st.label[n]);
            st.label[n] = sp.next_passive(st.label[n]);
            if (cfg.check_beliefs) st.belief[n] = (st.belief[n].transpose() * u.channel.P).transpose();
        }
        st.channel[n] = sample_row(u.channel.P, st.channel[n], counter_uniform(cfg.seed, rep, n, cslot, kEvolve));
    }
    return reward;
}

PolicyResult simulate(const std::vector<SimUser>& users, const SimConfig& cfg, const PolicySpec& pol) {
    const int N = static_cast<int>(users.size());
    if (N == 0) throw ConfigError("simulation needs at least one user");
    if (cfg.M < 0 || cfg.M > N) throw ConfigError("pilot count must satisfy 0 <= M <= N");
    const long warmup = cfg.warmup < 0 ? cfg.T / 10 : cfg.warmup;
    if (cfg.T <= warmup) throw ConfigError("horizon must exceed the warmup");
    if (cfg.replications < 1) throw ConfigError("at least one replication");

    const int R = cfg.replications;
    std::vector<double> means(R), sel_mean(R), berr(R);
    std::vector<long> sel_max(R);
    detail::parallel_for(R, cfg.threads, [&](long lo, long hi) {
        std::vector<int> selected;
        for (long r = lo; r < hi; ++r) {
            SimState st = initial_state(users, cfg, r);
            double total = 0.0, sel_total = 0.0, err = 0.0;
            long smax = 0;
            for (long t = 0; t < cfg.T; ++t) {
                double g = step(st, users, cfg, pol, r, t, selected);
                long k = static_cast<long>(selected.size());
                smax = std::max(smax, k);
                if (t >= warmup) {
                    total += g;
                    sel_total += static_cast<double>(k);
                }
                if (cfg.check_beliefs && t % 1000 == 999) {
                    for (int n = 0; n < N; ++n) {
                        const auto& sp = users[n].reward.space;
                        if (sp.is_steady(st.label[n])) continue;
                        err = std::max(err, (st.belief[n] - users[n].beliefs.vec[st.label[n]]).cwiseAbs().maxCoeff());
                    }
                }
            }
            const double len = static_cast<double>(cfg.T - warmup);
            means[r] = total / len;
            sel_mean[r] = sel_total / len;
            sel_max[r] = smax;
            berr[r] = err;
        }
    });

    PolicyResult res;
    res.name = pol.name.empty() ? to_string(pol.kind) : pol.name;
    res.replication_means = means;
    res.mean = pairwise_sum(means.data(), R) / R;
    if (R > 1) {
        std::vector<double> sq(R);
        for (int r = 0; r < R; ++r) sq[r] = (means[r] - res.mean) * (means[r] - res.mean);
        res.stderr_ = std::sqrt(pairwise_sum(sq.data(), R) / (R - 1) / R);
    }
    res.mean_selected = pairwise_sum(sel_mean.data(), R) / R;
    res.max_selected = *std::max_element(sel_max.begin(), sel_max.end());
    res.belief_error = *std::max_element(berr.begin(), berr.end());
    return res;
}

SimResult run(const std::vector<SimUser>& users, const SimConfig& cfg, const std::vector<PolicySpec>& pols,
              const std::string& baseline) {
    SimResult out;
    for (const auto& p : pols) out.per_policy.push_back(simulate(users, cfg, p));
    if (out.per_policy.empty()) return out;
    std::size_t b = 0;
    if (!baseline.empty()) {
        b = out.per_policy.size();
        for (std::size_t i = 0; i < out.per_policy.size(); ++i)
            if (out.per_policy[i].name == baseline) b = i;
        if (b == out.per_policy.size()) throw ConfigError("baseline policy '" + baseline + "' was not run");
    }
    out.baseline = out.per_policy[b].name;
    const double gb = out.per_policy[b].mean;
    for (const auto& p : out.per_policy) out.gap_pct.push_back((gb - p.mean) / gb * 100.0);
    return out;
}

JointPolicyFn joint_policy_wip(const std::vector<SimUser>& users, int M) {
    return [users, M](const std::vector<int>& labels, std::vector<std::pair<std::uint32_t, double>>& out) {
        std::vector<double> score(labels.size());
        for (std::size_t n = 0; n < labels.size(); ++n) score[n] = users[n].index.W[labels[n]];
        std::vector<int> sel;
        select_top(score, M, sel);
        std::uint32_t mask = 0;
        for (int n : sel) mask |= 1u << n;
        out.emplace_back(mask, 1.0);
    };
}

JointPolicyFn joint_policy_myopic(const std::vector<SimUser>& users, int M, bool plain) {
    return [users, M, plain](const std::vector<int>& labels, std::vector<std::pair<std::uint32_t, double>>& out) {
        std::vector<double> score(labels.size());
        for (std::size_t n = 0; n < labels.size(); ++n) score[n] = myopic_score(users[n], labels[n], plain);
        std::vector<int> sel;
        select_top(score, M, sel);
        std::uint32_t mask = 0;
        for (int n : sel) mask |= 1u << n;
        out.emplace_back(mask, 1.0);
    };
}

JointPolicyFn joint_policy_random(int N, int M) {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 0; m < (1u << N); ++m)
        if (std::popcount(m) == std::min(M, N)) masks.push_back(m);
    const double p = 1.0 / static_cast<double>(masks.size());
    return [masks, p](const std::vector<int>&, std::vector<std::pair<std::uint32_t, double>>& out) {
        for (auto m : masks) out.emplace_back(m, p);
    };
}

RelPolicy rel_for_users(std::vector<SimUser>& users, int M) {
    const int N = static_cast<int>(users.size());
    FluidConfig fc;
    for (int n = 0; n < N; ++n) {
        users[n].rel_class = n;
        fc.classes.push_back({users[n].channel, users[n].beliefs, users[n].reward, users[n].index});
        fc.delta.push_back(1.0 / N);
    }
    // class fractions must sum to one exactly
    double s = std::accumulate(fc.delta.begin(), fc.delta.end(), 0.0);
    fc.delta.back() += 1.0 - s;
    fc.lambda = static_cast<double>(M) / N;
    FluidModel fm(fc);
    RelPolicy rel = fm.solve_rel_policy(false);
    if (fm.lambda() != fc.lambda) {
        // lambda sat on an activation boundary and was nudged; as a bound we want
        // the exact value there, i.e. the critical state fully active
        rel = fm.rel_from_critical(rel.critical, 1.0, false);
        rel.lambda = fc.lambda;
    }
    return rel;
}

}  // namespace pilotidx
