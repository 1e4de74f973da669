// pilotctl: batch runner emitting CSV/JSON figure data plus a metadata record.
//
// Precedence: built-in defaults < --config file < command-line flags.
// The output directory falls back to $PILOTIDX_OUT, then "out".

#include "pilotidx/instances.hpp"
#include "pilotidx/io.hpp"
#include "pilotidx/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace pilotidx;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Param {
    const char* name;
    json def;
    const char* help;
};

const std::vector<Param>& params() {
    static const std::vector<Param> p = {
        {"seed", 1, "master seed (instances and simulation)"},
        {"tol", 1e-10, "value-iteration tolerance"},
        {"tau-bar", -1, "age truncation (-1: 64; randsuite: 20 for two users, 10 for more)"},
        {"threads", 1, "worker threads"},
        {"out", "", "output directory"},
        {"instance", "", "comma-separated channel JSON files"},
        {"example", false, "use the two built-in example users"},
        {"users", 1, "number of random users when no instance is given"},
        {"k", 3, "channel states of random users"},
        {"W", 0.0, "subsidy for solve"},
        {"beta", 0.0, "discount factor for solve (0: average reward)"},
        {"kernel", "original", "joint kernel: original | approximated"},
        {"w-min", nullptr, "W grid start (default: around the index range)"},
        {"w-max", nullptr, "W grid end"},
        {"w-points", 101, "W grid size"},
        {"oracle", false, "cross-check the index against the envelope oracle"},
        {"M", 1, "pilots per slot"},
        {"T", 10000, "slots per replication"},
        {"warmup", -1, "discarded slots (-1: T/10)"},
        {"reps", 10, "replications"},
        {"policies", "wip,myopic,random", "comma-separated: wip,myopic,random,rel,optimal"},
        {"reward", "realized", "realized | expected"},
        {"dynamics", "original", "original | approximated"},
        {"delta", 0.5, "fraction of class 1 (fluid)"},
        {"lambda", 0.3, "pilot fraction (fluid)"},
        {"horizon", 50, "fluid trajectory length"},
        {"instances", 40, "random instances for randsuite"},
        {"budget", 5e6, "joint state-action budget"},
    };
    return p;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');)
        if (!x.empty()) out.push_back(x);
    return out;
}

json typed(const json& def, const std::string& raw, const std::string& name) {
    try {
        if (def.is_boolean()) return raw.empty() || raw == "true" || raw == "1";
        if (def.is_number_integer()) return std::stoll(raw);
        if (def.is_number() || def.is_null()) return std::stod(raw);
    } catch (const std::exception&) {
        throw ConfigError("bad value for --" + name + ": " + raw);
    }
    return raw;
}

void merge_config(json& P, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    json c;
    try {
        c = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    // a metadata record is accepted as a config (its params are replayed)
    if (c.contains("params") && c.contains("command")) c = c["params"];
    if (!c.is_object()) throw ConfigError("config must be a JSON object");
    for (auto& [k, v] : c.items()) {
        if (!P.contains(k)) throw ConfigError("unknown config key: " + k);
        const json& d = P[k];
        bool ok = v.is_null() || (d.is_boolean() && v.is_boolean()) || (d.is_string() && v.is_string()) ||
                  ((d.is_number() || d.is_null()) && v.is_number());
        if (!ok) throw ConfigError("wrong type for config key: " + k);
        P[k] = v;
    }
}

struct Run {
    json P;
    std::string command;
    std::filesystem::path dir;
    json files = json::array();
    json results = json::object();

    int i(const char* k) const { return P[k].get<int>(); }
    double d(const char* k) const { return P[k].get<double>(); }
    std::string s(const char* k) const { return P[k].get<std::string>(); }
    bool b(const char* k) const { return P[k].get<bool>(); }
    std::uint64_t seed() const { return P["seed"].get<std::uint64_t>(); }

    void emit(const std::string& name, const std::string& content) {
        io::write_atomic((dir / name).string(), content);
        files.push_back(name);
    }
};

std::vector<ChannelModel> channels(const Run& r) {
    std::vector<ChannelModel> out;
    for (const auto& path : split(r.s("instance"))) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot read instance " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        out.push_back(io::channel_from_json(ss.str()));
    }
    if (!out.empty()) return out;
    if (r.b("example")) return example_two_users();
    for (int n = 0; n < r.i("users"); ++n) out.push_back(random_user(r.i("k"), r.seed() + n));
    return out;
}

std::vector<SimUser> sim_users(const Run& r) {
    std::vector<SimUser> u;
    for (const auto& m : channels(r)) u.push_back(make_sim_user(m, r.i("tau-bar")));
    return u;
}

std::vector<double> w_grid(const Run& r, const WhittleIndexTable& t) {
    double lo, hi;
    if (!r.P["w-min"].is_null() && !r.P["w-max"].is_null()) {
        lo = r.d("w-min");
        hi = r.d("w-max");
    } else {
        auto [a, b] = std::minmax_element(t.W.begin(), t.W.end());
        double span = *b - *a;
        lo = *a - 0.1 * span - 0.05;
        hi = *b + 0.1 * span + 0.05;
    }
    const int n = std::max(2, r.i("w-points"));
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k) g[k] = lo + (hi - lo) * k / (n - 1);
    return g;
}

std::string prefix(int n, int N) { return N == 1 ? std::string() : "u" + std::to_string(n + 1) + "_"; }

void cmd_index(Run& r) {
    auto users = sim_users(r);
    const int N = static_cast<int>(users.size());
    for (int n = 0; n < N; ++n) {
        const SimUser& u = users[n];
        std::string p = prefix(n, N);
        r.emit(p + "channel.json", io::channel_to_json(u.channel));
        r.emit(p + "reward.csv", io::reward_csv(u.reward));
        r.emit(p + "index.csv", io::index_csv(u.index));
        r.emit(p + "breakpoints.csv", io::breakpoints_csv(u.index));
        r.emit(p + "index.json", io::index_json(u.index));
        if (r.b("oracle")) {
            WhittleIndexTable o = whittle_envelope_oracle(u.reward, omega(u.channel));
            double diff = 0.0;
            for (std::size_t s = 0; s < o.W.size(); ++s) diff = std::max(diff, std::abs(o.W[s] - u.index.W[s]));
            r.results[p + "oracle_max_abs_diff"] = diff;
        }
    }
}

void cmd_envelope(Run& r) {
    auto users = sim_users(r);
    const int N = static_cast<int>(users.size());
    for (int n = 0; n < N; ++n) {
        const SimUser& u = users[n];
        const int K = u.channel.K;
        std::vector<ThresholdPolicy> cand{always_active(K)};
        bool steady_active = true;
        for (const auto& st : u.index.sequence) {
            if (st.channel < 0) steady_active = false;
            cand.push_back(ThresholdPolicy{st.gamma, steady_active});
        }
        Vector w = omega(u.channel);
        std::ostringstream os;
        os << "W";
        for (const auto& c : cand) os << ",g[" << c.str() << "]";
        os << ",envelope\n";
        for (double W : w_grid(r, u.index)) {
            os << io::num(W);
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& c : cand) {
                double g = avg_reward_for_threshold(c, W, u.reward, w);
                best = std::max(best, g);
                os << ',' << io::num(g);
            }
            os << ',' << io::num(best) << '\n';
        }
        std::string p = prefix(n, N);
        r.emit(p + "envelope.csv", os.str());
        // markers: (W_i, g at the breakpoint)
        std::ostringstream bp;
        bp << "W,g\n";
        for (std::size_t k = 0; k < u.index.sequence.size(); ++k) {
            double W = u.index.sequence[k].W;
            bp << io::num(W) << ',' << io::num(avg_reward_for_threshold(cand[k + 1], W, u.reward, w)) << '\n';
        }
        r.emit(p + "envelope_breakpoints.csv", bp.str());
    }
}

void cmd_solve(Run& r) {
    auto users = sim_users(r);
    const int N = static_cast<int>(users.size());
    const double tol = r.d("tol");
    if (N == 1) {
        const SimUser& u = users[0];
        Kernel k = r.s("kernel") == "approximated" ? Kernel::Approximated : Kernel::Original;
        SingleArmMDP mdp = build_single_arm(u.channel, u.beliefs, u.reward, r.d("W"), k);
        std::vector<std::string> labels;
        for (int s = 0; s < mdp.space.size(); ++s) labels.push_back(mdp.space.label(s));
        std::vector<double> V;
        std::vector<int> act;
        if (r.d("beta") > 0.0) {
            DiscountedResult d = vi_discounted(mdp, r.d("beta"), tol);
            V = d.V;
            act = d.action;
            r.results["iterations"] = d.iterations;
        } else {
            AverageResult a = vi_average(mdp, tol);
            V = a.bias;
            act = a.action;
            r.results["gain"] = a.gain;
            r.results["iterations"] = a.iterations;
        }
        r.emit("policy.csv", io::policy_csv(mdp.space, act));
        r.emit("value.csv", io::vector_csv(labels, Eigen::Map<Vector>(V.data(), V.size()), "V"));
        try {
            r.results["threshold"] = extract_threshold(mdp.space, act).str();
        } catch (const NonThresholdPolicy&) {
            r.results["threshold"] = nullptr;
        }
        return;
    }
    Kernel k = r.s("kernel") == "approximated" ? Kernel::Approximated : Kernel::Original;
    std::vector<Arm> arms;
    for (const auto& u : users) arms.push_back(make_arm(u.channel, u.beliefs, u.reward, k));
    JointMDP jm = build_joint(arms, r.i("M"), r.d("budget"));
    JointOptions opt;
    opt.threads = r.i("threads");
    JointResult res = vi_joint_average(jm, tol, opt);
    r.results["gain"] = res.gain;
    r.results["sweeps"] = res.sweeps;
    r.results["states"] = jm.states;
    r.emit("joint_policy.csv", io::joint_policy_csv(jm, res));
    r.emit("structure_map.csv", io::structure_map_csv(jm, res.policy));
}

void cmd_bounds(Run& r) {
    auto users = sim_users(r);
    const int N = static_cast<int>(users.size());
    for (int n = 0; n < N; ++n) {
        const SimUser& u = users[n];
        auto rows = bound_sweep(u.channel, u.beliefs, u.reward, w_grid(r, u.index), r.d("tol"));
        r.emit(prefix(n, N) + "bounds.csv", io::bound_sweep_csv(rows));
    }
}

void cmd_fluid(Run& r) {
    auto users = sim_users(r);
    if (users.size() < 2) throw ConfigError("fluid needs two classes (--users 2, --example or two instances)");
    FluidConfig cfg;
    for (std::size_t c = 0; c < 2; ++c) cfg.classes.push_back({users[c].channel, users[c].beliefs, users[c].reward, users[c].index});
    cfg.delta = {r.d("delta"), 1.0 - r.d("delta")};
    cfg.lambda = r.d("lambda");
    FluidModel fm(cfg);
    RelPolicy rel = fm.solve_rel_policy();
    r.results["W_star"] = rel.W_star;
    r.results["rho"] = rel.rho;
    r.results["critical"] = fm.state_label(rel.critical);
    r.results["lambda_used"] = rel.lambda;
    r.results["reward"] = rel.reward;

    std::vector<std::string> labels;
    Vector act(fm.dim());
    for (int i = 0; i < fm.dim(); ++i) {
        labels.push_back(fm.state_label(i));
        act(i) = rel.act[fm.class_of(i)][fm.local_of(i)];
    }
    r.emit("theta.csv", io::vector_csv(labels, rel.theta, "theta"));
    r.emit("activation.csv", io::vector_csv(labels, act, "activation"));

    LinearFluid lf = fm.linearize(rel, 100, r.seed());
    r.results["fixed_point_residual"] = lf.fixed_point_residual;
    r.results["linear_agreement"] = lf.max_agreement_error;
    SpectrumReport sp = spectrum(lf.Qhat);
    r.results["max_dev_from_minus_one"] = sp.max_dev_from_minus_one;
    r.emit("spectrum.csv", io::spectrum_csv(sp));
    r.emit("spectrum_reduced.csv", io::spectrum_csv(spectrum(restrict_to_masses(fm, lf))));

    // random start with the configured class masses
    SplitMix g(r.seed());
    Vector y(fm.dim());
    for (int i = 0; i < fm.dim(); ++i) y(i) = g.uniform();
    Vector m = fm.class_masses(y);
    for (int i = 0; i < fm.dim(); ++i) y(i) *= cfg.delta[fm.class_of(i)] / m(fm.class_of(i));
    r.emit("trajectory.csv", io::trajectory_csv(fm.integrate(y, r.i("horizon"), rel.theta)));
}

SimConfig sim_config(const Run& r) {
    SimConfig c;
    c.M = r.i("M");
    c.T = r.P["T"].get<long>();
    c.warmup = r.P["warmup"].get<long>();
    c.replications = r.i("reps");
    c.seed = r.seed();
    c.threads = r.i("threads");
    const std::string rw = r.s("reward"), dy = r.s("dynamics");
    if (rw != "realized" && rw != "expected") throw ConfigError("reward must be realized or expected");
    if (dy != "original" && dy != "approximated") throw ConfigError("dynamics must be original or approximated");
    c.reward = rw == "expected" ? RewardMode::Expected : RewardMode::Realized;
    c.dynamics = dy == "approximated" ? Dynamics::Approximated : Dynamics::Original;
    return c;
}

void cmd_simulate(Run& r) {
    auto users = sim_users(r);
    SimConfig c = sim_config(r);
    std::vector<PolicySpec> pols;
    RelPolicy rel;
    JointMDP jm;
    JointResult opt;
    for (const auto& name : split(r.s("policies"))) {
        PolicySpec p{policy_from_string(name)};
        if (p.kind == PolicyKind::REL) {
            rel = rel_for_users(users, c.M);
            p.rel = &rel;
        } else if (p.kind == PolicyKind::Optimal) {
            std::vector<Arm> arms;
            Kernel k = c.dynamics == Dynamics::Approximated ? Kernel::Approximated : Kernel::Original;
            for (const auto& u : users) arms.push_back(make_arm(u.channel, u.beliefs, u.reward, k));
            jm = build_joint(arms, c.M, r.d("budget"));
            JointOptions jo;
            jo.threads = r.i("threads");
            opt = vi_joint_average(jm, r.d("tol"), jo);
            p.joint = &jm;
            p.optimal = &opt;
        }
        pols.push_back(p);
    }
    SimResult res = run(users, c, pols);
    for (const auto& p : res.per_policy) r.results[p.name] = {{"mean", p.mean}, {"stderr", p.stderr_}};
    r.emit("results.csv", io::results_csv({{"run", res}}));
}

void cmd_randsuite(Run& r) {
    const int N = r.i("users") < 2 ? 2 : r.i("users");
    const int count = r.i("instances");
    const double tol = r.d("tol");
    JointOptions jo;
    jo.threads = r.i("threads");
    std::vector<std::string> names;
    std::vector<std::vector<double>> gaps;
    for (int i = 0; i < count; ++i) {
        std::vector<SimUser> users;
        std::vector<Arm> arms;
        for (int n = 0; n < N; ++n) {
            users.push_back(make_sim_user(random_user(r.i("k"), r.seed() * 100000 + 100 * i + n), r.i("tau-bar")));
            arms.push_back(make_arm(users.back().channel, users.back().beliefs, users.back().reward, Kernel::Original));
        }
        JointMDP jm = build_joint(arms, r.i("M"), r.d("budget"));
        double g = vi_joint_average(jm, tol, jo).gain;
        auto gap = [&](const JointPolicyFn& f) { return (g - evaluate_joint_policy(jm, f, tol, jo)) / g * 100.0; };
        names.push_back("ex" + std::to_string(i + 1));
        gaps.push_back({gap(joint_policy_wip(users, jm.M)), gap(joint_policy_myopic(users, jm.M)),
                        gap(joint_policy_random(N, jm.M))});
    }
    r.emit("boxplot.csv", io::boxplot_csv({"WIP", "myopic", "random"}, names, gaps));
    for (int p = 0; p < 3; ++p) {
        double s = 0.0;
        for (const auto& row : gaps) s += row[p];
        r.results[std::vector<std::string>{"mean_gap_wip", "mean_gap_myopic", "mean_gap_random"}[p]] = s / count;
    }
}

json tolerance_record(const Run& r) {
    const Tolerances& t = default_tolerances();
    return {{"vi", r.d("tol")},       {"stochastic", t.stochastic}, {"steady", t.steady},
            {"positive", t.positive}, {"tail_warn", t.tail_warn},   {"tie", t.tie},
            {"monotone", t.monotone}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whittle-index pilot allocation toolkit"};
    app.require_subcommand(1);
    std::map<std::string, std::string> raw;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> opts;
    std::string config;
    app.add_option("--config", config, "JSON config (unknown keys rejected)");
    for (const auto& p : params()) {
        std::string name = std::string("--") + p.name;
        if (p.def.is_boolean())
            opts[p.name] = app.add_flag(name, flags[p.name], p.help);
        else
            opts[p.name] = app.add_option(name, raw[p.name], p.help);
    }
    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"index", "closed-form index table and breakpoints"},
        {"envelope", "threshold-policy gains and their upper envelope over a W grid"},
        {"solve", "value iteration (single arm at --W, or joint with --M)"},
        {"bounds", "approximation-error bounds over a W grid"},
        {"fluid", "two-class fluid fixed point, spectrum and trajectory"},
        {"simulate", "multi-user Monte Carlo comparison"},
        {"randsuite", "suboptimality gaps over random instances"}};
    for (const auto& [n, h] : cmds) app.add_subcommand(n, h)->fallthrough();
    CLI11_PARSE(app, argc, argv);

    Run r;
    r.command = app.get_subcommands().front()->get_name();
    try {
        for (const auto& p : params()) r.P[p.name] = p.def;
        if (!config.empty()) merge_config(r.P, config);
        for (const auto& p : params()) {
            if (opts[p.name]->count() == 0) continue;
            r.P[p.name] = p.def.is_boolean() ? json(flags[p.name]) : typed(p.def, raw[p.name], p.name);
        }
        std::string out = r.s("out");
        if (out.empty()) {
            const char* env = std::getenv("PILOTIDX_OUT");
            out = env && *env ? env : "out";
        }
        r.dir = out;
        if (r.i("tau-bar") == -1) {
            // resolved value is recorded so the metadata replays exactly
            if (r.command == "randsuite") r.P["tau-bar"] = r.i("users") <= 2 ? 20 : 10;
            else r.P["tau-bar"] = 64;
        }
        if (r.i("tau-bar") < 1) throw ConfigError("--tau-bar must be positive");

        if (r.command == "index") cmd_index(r);
        else if (r.command == "envelope") cmd_envelope(r);
        else if (r.command == "solve") cmd_solve(r);
        else if (r.command == "bounds") cmd_bounds(r);
        else if (r.command == "fluid") cmd_fluid(r);
        else if (r.command == "simulate") cmd_simulate(r);
        else cmd_randsuite(r);

        json meta;
        meta["command"] = r.command;
        meta["version"] = kVersion;
        meta["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
        meta["seed"] = r.seed();
        meta["tolerances"] = tolerance_record(r);
        meta["params"] = r.P;
        meta["files"] = r.files;
        meta["results"] = r.results;
        io::write_atomic((r.dir / "metadata.json").string(), meta.dump(2) + "\n");
        std::cout << r.command << ": wrote " << r.files.size() << " files to " << r.dir.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "pilotctl " << r.command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
