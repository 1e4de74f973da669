#include "pilotidx/fluid.hpp"

#include "pilotidx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace pilotidx {

FluidClass make_fluid_class(const ChannelModel& m, int tau_bar) {
    FluidClass c;
    c.channel = m;
    c.beliefs = belief_table(m, tau_bar);
    c.reward = max_belief_reward(m, c.beliefs);
    c.index = whittle_closed_form(c.reward, omega(m));
    return c;
}

FluidModel::FluidModel(FluidConfig cfg) : cfg_(std::move(cfg)) {
    const int C = static_cast<int>(cfg_.classes.size());
    if (C == 0) throw InvalidModel("fluid model needs at least one class");
    if (static_cast<int>(cfg_.delta.size()) != C) throw InvalidModel("one class fraction per class");
    double dsum = 0.0;
    for (double d : cfg_.delta) {
        if (!(d > 0.0)) throw InvalidModel("class fractions must be positive");
        dsum += d;
    }
    if (std::abs(dsum - 1.0) > 1e-12) throw InvalidModel("class fractions must sum to 1");
    if (!(cfg_.lambda >= 0.0 && cfg_.lambda <= 1.0)) throw InvalidModel("pilot fraction must lie in [0,1]");
    tau_bar_ = cfg_.classes[0].reward.space.tau_bar;
    for (const auto& c : cfg_.classes)
        if (c.reward.space.tau_bar != tau_bar_) throw InvalidModel("classes must share the truncation");

    for (int c = 0; c < C; ++c) {
        const StateSpace& sp = cfg_.classes[c].reward.space;
        off_.push_back(dim_);
        for (int s = 0; s < sp.size(); ++s) {
            cls_.push_back(c);
            loc_.push_back(s);
            next_.push_back(dim_ + sp.next_passive(s));
            W_.push_back(cfg_.classes[c].index.W[s]);
        }
        dim_ += sp.size();
    }

    // priority: index value (descending), ties by class, then older age, then channel
    order_.resize(dim_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return W_[a] > W_[b]; });
    auto key = [&](int i) {
        const StateSpace& sp = cfg_.classes[cls_[i]].reward.space;
        int s = loc_[i];
        int age = sp.is_steady(s) ? tau_bar_ + 1 : sp.age(s);
        int ch = sp.is_steady(s) ? -1 : sp.channel(s);
        return std::tuple{cls_[i], -age, ch};
    };
    for (int a = 0; a < dim_;) {
        int b = a + 1;
        while (b < dim_ && std::abs(W_[order_[b]] - W_[order_[a]]) <= 1e-12 * (1.0 + std::abs(W_[order_[a]])))
            ++b;
        std::sort(order_.begin() + a, order_.begin() + b, [&](int x, int y) { return key(x) < key(y); });
        a = b;
    }
    rank_.resize(dim_);
    for (int r = 0; r < dim_; ++r) rank_[order_[r]] = r;
}

std::string FluidModel::state_label(int i) const {
    std::ostringstream os;
    os << 'c' << cls_[i] + 1 << ':' << cfg_.classes[cls_[i]].reward.space.label(loc_[i]);
    return os.str();
}

Vector FluidModel::class_masses(const Vector& y) const {
    Vector m = Vector::Zero(static_cast<int>(cfg_.classes.size()));
    for (int i = 0; i < dim_; ++i) m(cls_[i]) += y(i);
    return m;
}

Vector FluidModel::activation_fractions(const Vector& y) const {
    Vector g = Vector::Zero(dim_);
    double above = 0.0;  // mass strictly ahead in priority
    for (int i : order_) {
        if (y(i) != 0.0)
            g(i) = std::clamp((cfg_.lambda - above) / y(i), 0.0, 1.0);
        else
            g(i) = cfg_.lambda > above ? 1.0 : 0.0;
        above += y(i);
    }
    return g;
}

Matrix FluidModel::drift_matrix(const Vector& y) const {
    Vector g = activation_fractions(y);
    Matrix Q = Matrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        const FluidClass& fc = cfg_.classes[cls_[i]];
        const StateSpace& sp = fc.reward.space;
        Q(i, i) -= 1.0;
        Q(next_[i], i) += 1.0 - g(i);
        for (int r = 0; r < sp.K; ++r) Q(off_[cls_[i]] + sp.index(r, 1), i) += g(i) * fc.channel.steady(r);
    }
    return Q;
}

Vector FluidModel::drift(const Vector& y) const {
    Vector g = activation_fractions(y);
    Vector d = Vector::Zero(dim_);
    for (int i = 0; i < dim_; ++i) {
        if (y(i) == 0.0) continue;
        const FluidClass& fc = cfg_.classes[cls_[i]];
        const StateSpace& sp = fc.reward.space;
        const double a = g(i) * y(i);
        d(i) -= y(i);
        d(next_[i]) += y(i) - a;
        for (int r = 0; r < sp.K; ++r) d(off_[cls_[i]] + sp.index(r, 1)) += a * fc.channel.steady(r);
    }
    return d;
}

namespace {

struct RelEval {
    std::vector<std::vector<double>> act;
    std::vector<OccupancyMeasure> occ;
    double activation = 0.0;
};

}  // namespace

static RelEval evaluate_rel(const FluidModel& fm, int critical, double rho) {
    const auto& cfg = fm.config();
    const int C = static_cast<int>(cfg.classes.size());
    RelEval e;
    e.act.resize(C);
    for (int c = 0; c < C; ++c) e.act[c].assign(cfg.classes[c].reward.space.size(), 0.0);
    const int rc = fm.rank(critical);
    for (int i = 0; i < fm.dim(); ++i) {
        double a = fm.rank(i) < rc ? 1.0 : (i == critical ? rho : 0.0);
        e.act[fm.class_of(i)][fm.local_of(i)] = a;
    }
    for (int c = 0; c < C; ++c) {
        e.occ.push_back(occupancy_randomized(e.act[c], omega(cfg.classes[c].channel), fm.tau_bar()));
        e.activation += cfg.delta[c] * e.occ.back().activation_rate;
    }
    return e;
}

RelPolicy FluidModel::rel_from_critical(int critical, double rho, bool check_steady) const {
    if (critical < 0 || critical >= dim_) throw InvalidModel("critical state out of range");
    const int C = static_cast<int>(cfg_.classes.size());
    for (int c = 0; c < C && check_steady; ++c) {
        int s = off_[c] + cfg_.classes[c].reward.space.steady();
        if (rank_[s] > rank_[critical])
            throw Infeasible("steady entry of class " + std::to_string(c + 1) +
                             " has index below the critical level (Assumption 2 fails)");
    }
    RelEval e = evaluate_rel(*this, critical, rho);
    RelPolicy r;
    r.critical = critical;
    r.rho = rho;
    r.W_star = W_[critical];
    r.lambda = cfg_.lambda;
    r.act = e.act;
    r.activation = e.activation;
    r.theta = Vector::Zero(dim_);
    for (int c = 0; c < C; ++c) {
        const RewardModel& rm = cfg_.classes[c].reward;
        for (int s = 0; s < rm.space.size(); ++s) {
            double th = cfg_.delta[c] * e.occ[c].alpha[s];
            r.theta(off_[c] + s) = th;
            r.reward += th * (e.act[c][s] * rm.R1 + (1.0 - e.act[c][s]) * rm.state(s));
        }
    }
    return r;
}

RelPolicy FluidModel::solve_rel_policy(bool check_steady) {
    if (!(cfg_.lambda > 0.0 && cfg_.lambda < 1.0)) throw InvalidModel("pilot fraction must lie in (0,1)");
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double lam = cfg_.lambda;
        int p = 0;
        RelEval full;
        for (; p < dim_; ++p) {
            full = evaluate_rel(*this, order_[p], 1.0);
            if (full.activation >= lam) break;
        }
        if (p == dim_) throw Infeasible("pilot fraction exceeds the all-active activation");
        const int crit = order_[p];
        const int c = cls_[crit];
        const StateSpace& sp = cfg_.classes[c].reward.space;
        const double other = full.activation - cfg_.delta[c] * full.occ[c].activation_rate;
        const double target_rate = (lam - other) / cfg_.delta[c];
        const double D1 = 1.0 / full.occ[c].activation_rate;
        const double Dstar = 1.0 / target_rate;
        const double visits = full.occ[c].alpha[loc_[crit]] * D1;
        double rho = sp.is_steady(loc_[crit]) ? visits / (Dstar - D1 + visits) : 1.0 - (Dstar - D1) / visits;
        if (rho >= 1.0 - 1e-9) {
            // exactly on an activation boundary: move lambda into the interior
            cfg_.lambda = lam - 1e-9;
            continue;
        }
        rho = std::clamp(rho, 0.0, 1.0);
        RelPolicy r = rel_from_critical(crit, rho, check_steady);
        if (std::abs(r.activation - lam) > 1e-10)
            throw Infeasible("randomized fill did not meet the pilot fraction");
        return r;
    }
    throw Infeasible("could not place the pilot fraction off an activation boundary");
}

bool FluidModel::in_region(const Vector& y, const RelPolicy& rel) const {
    double above = 0.0;
    for (int i : order_) {
        if (i == rel.critical) break;
        above += y(i);
    }
    return above < rel.lambda && above + y(rel.critical) >= rel.lambda;
}

std::vector<Vector> FluidModel::sample_region(const RelPolicy& rel, int n, std::uint64_t seed, double radius) const {
    SplitMix rng(seed);
    std::vector<Vector> pts;
    const int C = static_cast<int>(cfg_.classes.size());
    int tries = 0;
    while (static_cast<int>(pts.size()) < n) {
        if (++tries > 1000 * n) throw RegionEmpty("could not sample the linear region");
        Vector d(dim_);
        for (int i = 0; i < dim_; ++i) {
            d(i) = 2.0 * rng.uniform() - 1.0;
            if (rel.theta(i) <= 0.0) d(i) = std::abs(d(i));  // stay nonnegative off the support
        }
        // zero net mass per class, taken from the support of theta
        Vector sum = Vector::Zero(C), cnt = Vector::Zero(C);
        for (int i = 0; i < dim_; ++i) {
            sum(cls_[i]) += d(i);
            if (rel.theta(i) > 0.0) cnt(cls_[i]) += 1.0;
        }
        for (int i = 0; i < dim_; ++i)
            if (rel.theta(i) > 0.0) d(i) -= sum(cls_[i]) / cnt(cls_[i]);
        double r = radius * rng.uniform();
        Vector y = rel.theta + r * d;
        // shrink until nonnegative
        for (int k = 0; k < 60 && y.minCoeff() < 0.0; ++k) {
            r *= 0.5;
            y = rel.theta + r * d;
        }
        if (y.minCoeff() < 0.0 || !in_region(y, rel)) continue;
        pts.push_back(y);
    }
    return pts;
}

LinearFluid FluidModel::linearize(const RelPolicy& rel, int agreement_points, std::uint64_t seed) const {
    if (!(rel.rho > 0.0 && rel.rho < 1.0)) throw RegionEmpty("randomization must lie strictly inside (0,1)");
    const int n = dim_;
    const int c = rel.critical;
    const int rc = rank_[c];
    auto active_col = [&](int i) {
        Vector t = Vector::Zero(n);
        const FluidClass& fc = cfg_.classes[cls_[i]];
        const StateSpace& sp = fc.reward.space;
        for (int r = 0; r < sp.K; ++r) t(off_[cls_[i]] + sp.index(r, 1)) += fc.channel.steady(r);
        return t;
    };
    auto passive_col = [&](int i) {
        Vector t = Vector::Zero(n);
        t(next_[i]) = 1.0;
        return t;
    };
    const Vector jump = active_col(c) - passive_col(c);  // extra flow per unit activated at c

    LinearFluid lf;
    lf.Qbar = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        Vector col = (i == c || rank_[i] > rc) ? passive_col(i) : active_col(i);
        col(i) -= 1.0;
        if (rank_[i] < rc) col -= jump;  // g_c y_c = lambda - sum_{ahead} y
        lf.Qbar.col(i) = col;
    }
    lf.dbar = rel.lambda * jump;

    // fixed point with class masses pinned
    const int C = static_cast<int>(cfg_.classes.size());
    Matrix A = Matrix::Zero(n + C, n);
    Vector b = Vector::Zero(n + C);
    A.topRows(n) = lf.Qbar;
    b.head(n) = -lf.dbar;
    for (int i = 0; i < n; ++i) A(n + cls_[i], i) = 1.0;
    for (int k = 0; k < C; ++k) b(n + k) = cfg_.delta[k];
    lf.theta = A.colPivHouseholderQr().solve(b);
    lf.fixed_point_residual = (lf.Qbar * lf.theta + lf.dbar).cwiseAbs().maxCoeff();

    // eliminate the critical coordinate via its class mass
    lf.eliminated = c;
    const int cc = cls_[c];
    lf.Qhat.resize(n - 1, n - 1);
    lf.dhat.resize(n - 1);
    for (int r = 0, rr = 0; r < n; ++r) {
        if (r == c) continue;
        lf.dhat(rr) = lf.dbar(r) + lf.Qbar(r, c) * cfg_.delta[cc];
        for (int i = 0, ii = 0; i < n; ++i) {
            if (i == c) continue;
            lf.Qhat(rr, ii) = lf.Qbar(r, i) - (cls_[i] == cc ? lf.Qbar(r, c) : 0.0);
            ++ii;
        }
        ++rr;
    }

    if (agreement_points > 0) {
        for (const Vector& y : sample_region(rel, agreement_points, seed, 1e-3)) {
            double e = (drift(y) - (lf.Qbar * y + lf.dbar)).cwiseAbs().maxCoeff();
            lf.max_agreement_error = std::max(lf.max_agreement_error, e);
        }
    }
    return lf;
}

std::vector<TrajectoryPoint> FluidModel::integrate(Vector y, int T, const Vector& theta) const {
    std::vector<TrajectoryPoint> out;
    out.push_back({0, (y - theta).cwiseAbs().maxCoeff(), y});
    for (int t = 1; t <= T; ++t) {
        y += drift(y);
        out.push_back({t, (y - theta).cwiseAbs().maxCoeff(), y});
    }
    return out;
}

SpectrumReport spectrum(const Matrix& Qhat) {
    SpectrumReport r;
    Eigen::EigenSolver<Matrix> es(Qhat, false);
    r.eigenvalues = es.eigenvalues();
    for (int i = 0; i < r.eigenvalues.size(); ++i) {
        double d = std::abs(r.eigenvalues(i) + 1.0);
        r.max_dev_from_minus_one = std::max(r.max_dev_from_minus_one, d);
        r.count_far += d > 1e-3;
    }
    const int n = static_cast<int>(Qhat.rows());
    Matrix N = Qhat + Matrix::Identity(n, n);
    Matrix P = Matrix::Identity(n, n);
    for (int k = 0; k < n; ++k) P = P * N;
    r.nilpotency_residual = n ? P.cwiseAbs().maxCoeff() : 0.0;
    return r;
}

Matrix restrict_to_masses(const FluidModel& fm, const LinearFluid& lf) {
    const int n = fm.dim();
    const int C = static_cast<int>(fm.config().classes.size());
    std::vector<int> elim(C, -1);
    elim[fm.class_of(lf.eliminated)] = lf.eliminated;
    for (int c = 0; c < C; ++c)
        if (elim[c] < 0) elim[c] = fm.offset(c) + fm.config().classes[c].reward.space.steady();
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (elim[fm.class_of(i)] != i) keep.push_back(i);
    const int m = static_cast<int>(keep.size());
    Matrix Q(m, m);
    for (int r = 0; r < m; ++r)
        for (int k = 0; k < m; ++k) {
            int i = keep[k];
            Q(r, k) = lf.Qbar(keep[r], i) - lf.Qbar(keep[r], elim[fm.class_of(i)]);
        }
    return Q;
}

}  // namespace pilotidx
