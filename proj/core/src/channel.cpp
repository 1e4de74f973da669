#include "pilotidx/channel.hpp"

#include "pilotidx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace pilotidx {

Tolerances& default_tolerances() {
    static Tolerances t;
    return t;
}

std::string StateSpace::label(int s) const {
    if (is_steady(s)) return "s";
    std::ostringstream os;
    os << (channel(s) + 1) << ':' << age(s);
    return os.str();
}

namespace {

void check_stochastic(const Matrix& P, double tol) {
    if (P.rows() == 0 || P.rows() != P.cols())
        throw InvalidModel("transition matrix must be square and non-empty");
    for (int i = 0; i < P.rows(); ++i) {
        for (int j = 0; j < P.cols(); ++j) {
            double v = P(i, j);
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw InvalidModel("transition matrix entry outside [0,1]");
        }
        if (std::abs(P.row(i).sum() - 1.0) > tol)
            throw InvalidModel("transition matrix row " + std::to_string(i + 1) +
                               " does not sum to 1");
    }
}

std::vector<int> bfs_levels(const Matrix& P, double eps, bool reverse) {
    const int n = static_cast<int>(P.rows());
    std::vector<int> level(n, -1);
    std::queue<int> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v) {
            double w = reverse ? P(v, u) : P(u, v);
            if (w > eps && level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            }
        }
    }
    return level;
}

}  // namespace

bool is_ergodic(const Matrix& P, double eps) {
    const int n = static_cast<int>(P.rows());
    auto fwd = bfs_levels(P, eps, false);
    auto bwd = bfs_levels(P, eps, true);
    for (int i = 0; i < n; ++i)
        if (fwd[i] < 0 || bwd[i] < 0) return false;
    // period = gcd over edges of level(u) + 1 - level(v)
    int g = 0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (P(u, v) > eps) g = std::gcd(g, std::abs(fwd[u] + 1 - fwd[v]));
    return g == 1;
}

bool is_doubly_stochastic(const Matrix& P, double tol) {
    for (int j = 0; j < P.cols(); ++j)
        if (std::abs(P.col(j).sum() - 1.0) > tol) return false;
    return true;
}

Vector steady_state(const Matrix& P, const Tolerances& tol) {
    check_stochastic(P, tol.stochastic);
    if (!is_ergodic(P, tol.positive))
        throw NonErgodic("chain is not irreducible and aperiodic; stationary law not unique");
    const int K = static_cast<int>(P.rows());
    Matrix A = P.transpose() - Matrix::Identity(K, K);
    A.row(K - 1).setOnes();
    Vector b = Vector::Zero(K);
    b(K - 1) = 1.0;
    Vector ps = A.partialPivLu().solve(b);
    for (int i = 0; i < K; ++i) ps(i) = std::max(ps(i), 0.0);
    ps /= ps.sum();
    if ((ps.transpose() * P - ps.transpose()).cwiseAbs().maxCoeff() > tol.steady)
        throw NonErgodic("steady-state residual above tolerance");
    return ps;
}

Vector steady_state_power(const Matrix& P, double tol, int max_iter) {
    const int K = static_cast<int>(P.rows());
    Vector x = Vector::Constant(K, 1.0 / K);
    for (int it = 0; it < max_iter; ++it) {
        Vector y = P.transpose() * x;
        y /= y.sum();
        double d = (y - x).cwiseAbs().maxCoeff();
        x = y;
        if (d < tol) return x;
    }
    throw NoConvergence("power iteration did not converge");
}

ChannelModel make_channel(const Matrix& P, const Vector& rates, std::string label,
                          const Tolerances& tol) {
    if (rates.size() != P.rows())
        throw InvalidModel("rates length must equal K");
    for (int k = 0; k < rates.size(); ++k)
        if (!std::isfinite(rates(k)) || rates(k) < 0.0)
            throw InvalidModel("rates must be finite and nonnegative");
    ChannelModel m;
    m.K = static_cast<int>(P.rows());
    m.P = P;
    m.rates = rates;
    m.steady = steady_state(P, tol);
    m.label = std::move(label);
    return m;
}

BeliefState belief_initial(const ChannelModel& m, int j) {
    return {j, 1, m.P.row(j).transpose()};
}

BeliefState belief_steady(const ChannelModel& m) { return {0, 0, m.steady}; }

BeliefState belief_propagate(const BeliefState& b, const ChannelModel& m, int tau_bar) {
    if (b.steady() || b.tau >= tau_bar) return belief_steady(m);
    return {b.j, b.tau + 1, (b.vec.transpose() * m.P).transpose()};
}

BeliefTable belief_table(const ChannelModel& m, int tau_bar, const Tolerances& tol) {
    if (tau_bar < 1) throw InvalidModel("truncation must be positive");
    BeliefTable t;
    t.space = {m.K, tau_bar};
    t.vec.resize(t.space.size());
    for (int j = 0; j < m.K; ++j) {
        Vector v = m.P.row(j).transpose();
        for (int tau = 1; tau <= tau_bar; ++tau) {
            t.vec[t.space.index(j, tau)] = v;
            v = (v.transpose() * m.P).transpose();
        }
        t.tail_gap = std::max(t.tail_gap, (t.at(j, tau_bar) - m.steady).cwiseAbs().maxCoeff());
    }
    t.vec[t.space.steady()] = m.steady;
    if (t.tail_gap > tol.tail_warn) {
        std::ostringstream os;
        os << "belief at truncation is " << t.tail_gap
           << " away from steady state; consider a larger tau_bar";
        t.warnings.push_back(os.str());
    }
    return t;
}

A1Report check_a1(const ChannelModel& m, int tau_bar, const Tolerances& tol) {
    A1Report r;
    r.doubly_stochastic = is_doubly_stochastic(m.P, tol.stochastic);
    BeliefTable t = belief_table(m, tau_bar, tol);
    for (int j = 0; j < m.K && r.pass; ++j) {
        for (int tau = 1; tau <= tau_bar && r.pass; ++tau) {
            double a = t.at(j, tau).maxCoeff();
            for (int t2 = tau + 1; t2 <= tau_bar; ++t2) {
                if (a < t.at(j, t2).maxCoeff() - tol.monotone) {
                    r = {false, j, tau, t2, r.doubly_stochastic};
                    break;
                }
            }
        }
    }
    return r;
}

Matrix generate_doubly_stochastic(int K, std::uint64_t seed) {
    if (K < 2) throw InvalidModel("doubly stochastic generator needs K >= 2");
    for (std::uint64_t attempt = 0;; ++attempt) {
        SplitMix rng(splitmix64(seed) ^ splitmix64(attempt + 0x5eed));
        Matrix P = Matrix::Zero(K, K);
        double total = 0.0;
        std::vector<int> perm(K);
        for (int m = 0; m < K * K; ++m) {
            std::iota(perm.begin(), perm.end(), 0);
            for (int i = K - 1; i > 0; --i)
                std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
            double w = -std::log(1.0 - rng.uniform());
            for (int i = 0; i < K; ++i) P(i, perm[i]) += w;
            total += w;
        }
        P /= total;
        // re-normalize rows so row sums are exact to rounding
        for (int i = 0; i < K; ++i) P.row(i) /= P.row(i).sum();
        if (is_ergodic(P)) return P;
    }
}

}  // namespace pilotidx
