#include "pilotidx/reward.hpp"

#include <cmath>

namespace pilotidx {

RewardModel RewardModel::scaled(double c) const {
    RewardModel r = *this;
    r.R1 *= c;
    for (double& v : r.passive) v *= c;
    return r;
}

A2Report check_a2(const RewardModel& rm, const Tolerances& tol) {
    const auto& sp = rm.space;
    for (int j = 0; j < sp.K; ++j) {
        for (int tau = 1; tau <= sp.tau_bar; ++tau) {
            double cur = rm.at(j, tau);
            if (cur > rm.R1 + tol.monotone) return {false, j, 0};
            double next = tau < sp.tau_bar ? rm.at(j, tau + 1) : rm.steady();
            if (next > cur + tol.monotone) return {false, j, tau};
        }
    }
    if (rm.steady() > rm.R1 + tol.monotone) return {false, -1, 0};
    return {};
}

namespace {

void enforce(const RewardModel& rm, const Tolerances& tol) {
    if (!std::isfinite(rm.R1) || rm.R1 < 0.0) throw A2Violation("active reward must be finite and >= 0");
    for (double v : rm.passive)
        if (!std::isfinite(v) || v < 0.0) throw A2Violation("passive rewards must be finite and >= 0");
    A2Report a = check_a2(rm, tol);
    if (!a.pass) {
        std::string where = a.j < 0 ? std::string("steady entry")
                                    : "(" + std::to_string(a.j + 1) + "," + std::to_string(a.tau) + ")";
        throw A2Violation("reward table violates monotonicity at " + where);
    }
}

}  // namespace

RewardModel max_belief_reward(const ChannelModel& m, const BeliefTable& bt, const Tolerances& tol) {
    RewardModel rm;
    rm.kind = RewardKind::MaxBelief;
    rm.space = bt.space;
    rm.R1 = m.steady.dot(m.rates);
    rm.passive.resize(bt.space.size());
    for (int s = 0; s < bt.space.size(); ++s) rm.passive[s] = bt.vec[s].maxCoeff() * rm.R1;
    enforce(rm, tol);
    return rm;
}

RewardModel table_reward(const StateSpace& space, double R1, std::vector<double> passive,
                         const Tolerances& tol) {
    if (static_cast<int>(passive.size()) != space.size())
        throw InvalidModel("reward table size must be K*tau_bar + 1");
    RewardModel rm;
    rm.kind = RewardKind::Table;
    rm.space = space;
    rm.R1 = R1;
    rm.passive = std::move(passive);
    enforce(rm, tol);
    return rm;
}

RewardModel constant_reward(const StateSpace& space, double R1, double R0) {
    return table_reward(space, R1, std::vector<double>(space.size(), R0));
}

}  // namespace pilotidx
