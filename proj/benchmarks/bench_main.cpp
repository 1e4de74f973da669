#include "pilotidx/instances.hpp"
#include "pilotidx/sim.hpp"

#include <benchmark/benchmark.h>

using namespace pilotidx;

static void BM_ClosedFormIndex(benchmark::State& st) {
    const int tau_bar = static_cast<int>(st.range(0));
    ChannelModel m = random_user(3, 1);
    BeliefTable bt = belief_table(m, tau_bar);
    RewardModel rm = max_belief_reward(m, bt);
    Vector w = omega(m);
    for (auto _ : st) benchmark::DoNotOptimize(whittle_closed_form(rm, w));
}
BENCHMARK(BM_ClosedFormIndex)->Arg(8)->Arg(32)->Arg(128);

static void BM_EnvelopeOracle(benchmark::State& st) {
    const int tau_bar = static_cast<int>(st.range(0));
    ChannelModel m = random_user(3, 1);
    BeliefTable bt = belief_table(m, tau_bar);
    RewardModel rm = max_belief_reward(m, bt);
    Vector w = omega(m);
    for (auto _ : st) benchmark::DoNotOptimize(whittle_envelope_oracle(rm, w));
}
BENCHMARK(BM_EnvelopeOracle)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_AverageVI(benchmark::State& st) {
    ChannelModel m = random_user(3, 2);
    BeliefTable bt = belief_table(m, static_cast<int>(st.range(0)));
    RewardModel rm = max_belief_reward(m, bt);
    SingleArmMDP mdp = build_single_arm(m, bt, rm, 0.5 * rm.R1, Kernel::Original);
    for (auto _ : st) benchmark::DoNotOptimize(vi_average(mdp, 1e-10));
}
BENCHMARK(BM_AverageVI)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);

static void BM_JointVI(benchmark::State& st) {
    std::vector<Arm> arms;
    for (int n = 0; n < st.range(0); ++n) {
        ChannelModel m = random_user(3, 10 + n);
        BeliefTable bt = belief_table(m, 8);
        arms.push_back(make_arm(m, bt, max_belief_reward(m, bt), Kernel::Original));
    }
    JointMDP jm = build_joint(arms, 1);
    for (auto _ : st) benchmark::DoNotOptimize(vi_joint_average(jm, 1e-10));
}
BENCHMARK(BM_JointVI)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_SimulateSlots(benchmark::State& st) {
    std::vector<SimUser> users;
    for (int n = 0; n < st.range(0); ++n) users.push_back(make_sim_user(random_user(3, 100 + n), 12));
    SimConfig c;
    c.M = std::max<int>(1, static_cast<int>(st.range(0)) / 10);
    c.T = 10000;
    c.replications = 1;
    for (auto _ : st) benchmark::DoNotOptimize(simulate(users, c, {PolicyKind::WIP}));
    st.SetItemsProcessed(st.iterations() * c.T);
}
BENCHMARK(BM_SimulateSlots)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
