#include "pilotidx/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <bit>
#include <sstream>

namespace pilotidx::io {

using nlohmann::json;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string channel_to_json(const ChannelModel& m) {
    json j;
    j["K"] = m.K;
    json P = json::array();
    for (int i = 0; i < m.K; ++i) {
        json row = json::array();
        for (int k = 0; k < m.K; ++k) row.push_back(num(m.P(i, k)));
        P.push_back(row);
    }
    j["P"] = P;
    json r = json::array();
    for (int k = 0; k < m.K; ++k) r.push_back(num(m.rates(k)));
    j["rates"] = r;
    if (!m.label.empty()) j["label"] = m.label;
    return j.dump(2) + "\n";
}

namespace {

double decimal(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        std::size_t pos = 0;
        double x = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("malformed decimal '" + s + "'");
        return x;
    }
    throw ConfigError("expected a decimal string or number");
}

}  // namespace

ChannelModel channel_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("channel document: ") + e.what());
    }
    static const std::set<std::string> known{"K", "P", "rates", "label"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("unknown channel key '" + it.key() + "'");
    if (!j.contains("K") || !j.contains("P") || !j.contains("rates")) throw ConfigError("channel needs K, P, rates");
    const int K = j["K"].get<int>();
    if (K < 1 || !j["P"].is_array() || static_cast<int>(j["P"].size()) != K || static_cast<int>(j["rates"].size()) != K)
        throw ConfigError("channel dimensions do not match K");
    Matrix P(K, K);
    Vector r(K);
    for (int i = 0; i < K; ++i) {
        if (static_cast<int>(j["P"][i].size()) != K) throw ConfigError("P row has wrong length");
        for (int k = 0; k < K; ++k) P(i, k) = decimal(j["P"][i][k]);
        r(i) = decimal(j["rates"][i]);
    }
    return make_channel(P, r, j.value("label", std::string{}));
}

std::string reward_csv(const RewardModel& rm) {
    std::ostringstream os;
    os << "j,tau,reward\n";
    const StateSpace& sp = rm.space;
    for (int s = 0; s < sp.size(); ++s) {
        if (sp.is_steady(s))
            os << "s,s," << num(rm.state(s)) << '\n';
        else
            os << sp.channel(s) + 1 << ',' << sp.age(s) << ',' << num(rm.state(s)) << '\n';
    }
    return os.str();
}

std::string index_csv(const WhittleIndexTable& t) {
    std::ostringstream os;
    os << "j,tau,W\n";
    const StateSpace& sp = t.space;
    for (int s = 0; s < sp.size(); ++s) {
        if (sp.is_steady(s))
            os << "s,s," << num(t.W[s]) << '\n';
        else
            os << sp.channel(s) + 1 << ',' << sp.age(s) << ',' << num(t.W[s]) << '\n';
    }
    return os.str();
}

std::string index_json(const WhittleIndexTable& t) {
    json j;
    j["K"] = t.space.K;
    j["tau_bar"] = t.space.tau_bar;
    json rows = json::array();
    for (int s = 0; s < t.space.size(); ++s) rows.push_back({{"state", t.space.label(s)}, {"W", num(t.W[s])}});
    j["index"] = rows;
    json bp = json::array();
    for (double b : t.breakpoints) bp.push_back(num(b));
    j["breakpoints"] = bp;
    json seq = json::array();
    for (const auto& st : t.sequence) {
        json g = json::array();
        for (int x : st.gamma) g.push_back(x);
        seq.push_back({{"state", st.channel < 0 ? std::string("s") : std::to_string(st.channel + 1) + ":" +
                                                                           std::to_string(st.tau)},
                       {"W", num(st.W)},
                       {"gamma", g}});
    }
    j["sequence"] = seq;
    j["warnings"] = t.warnings;
    return j.dump(2) + "\n";
}

std::string breakpoints_csv(const WhittleIndexTable& t) {
    std::ostringstream os;
    os << "order,j,tau,W\n";
    int k = 0;
    for (const auto& st : t.sequence) {
        os << k++ << ',';
        if (st.channel < 0)
            os << "s,s,";
        else
            os << st.channel + 1 << ',' << st.tau << ',';
        os << num(st.W) << '\n';
    }
    return os.str();
}

std::string policy_csv(const StateSpace& sp, const std::vector<int>& action) {
    std::ostringstream os;
    os << "j,tau,action\n";
    for (int s = 0; s < sp.size(); ++s) {
        if (sp.is_steady(s))
            os << "s,s," << action[s] << '\n';
        else
            os << sp.channel(s) + 1 << ',' << sp.age(s) << ',' << action[s] << '\n';
    }
    return os.str();
}

namespace {

std::string users_of(std::uint32_t mask) {
    std::string s;
    for (int n = 0; mask >> n; ++n)
        if (mask >> n & 1u) {
            if (!s.empty()) s += ' ';
            s += std::to_string(n + 1);
        }
    return s.empty() ? "0" : s;
}

}  // namespace

std::string joint_policy_csv(const JointMDP& jm, const JointResult& r) {
    std::ostringstream os;
    os << "state,users\n";
    for (long x = 0; x < jm.states; ++x) os << joint_state_label(jm, x) << ',' << users_of(r.policy[x]) << '\n';
    return os.str();
}

std::string structure_map_csv(const JointMDP& jm, const std::vector<std::uint32_t>& policy) {
    if (jm.N() < 2) throw InvalidModel("structure map needs at least two users");
    std::vector<int> labels(jm.N());
    for (int n = 0; n < jm.N(); ++n) labels[n] = jm.arms[n].space.steady();
    const StateSpace& a = jm.arms[0].space;
    const StateSpace& b = jm.arms[1].space;
    std::ostringstream os;
    os << "user2\\user1";
    for (int s = 0; s < a.size(); ++s) os << ',' << a.label(s);
    os << '\n';
    for (int t = 0; t < b.size(); ++t) {
        os << b.label(t);
        labels[1] = t;
        for (int s = 0; s < a.size(); ++s) {
            labels[0] = s;
            std::uint32_t m = policy[jm.encode(labels)];
            int cell = m == 0 ? 0 : (std::popcount(m) == 1 ? std::countr_zero(m) + 1 : -1);
            os << ',' << cell;
        }
        os << '\n';
    }
    return os.str();
}

std::string bound_sweep_csv(const std::vector<BoundReport>& rows) {
    std::ostringstream os;
    os << "W,g_app,g_orig,g_max,g_min,D,relErr\n";
    for (const auto& r : rows)
        os << num(r.W) << ',' << num(r.g_app) << ',' << num(r.g_orig) << ',' << num(r.g_max) << ',' << num(r.g_min)
           << ',' << num(r.D) << ',' << num(r.rel_err) << '\n';
    return os.str();
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj) {
    std::ostringstream os;
    os << "t,dist";
    if (!traj.empty())
        for (int i = 0; i < traj[0].y.size(); ++i) os << ",y" << i + 1;
    os << '\n';
    for (const auto& p : traj) {
        os << p.t << ',' << num(p.dist);
        for (int i = 0; i < p.y.size(); ++i) os << ',' << num(p.y(i));
        os << '\n';
    }
    return os.str();
}

std::string spectrum_csv(const SpectrumReport& s) {
    std::ostringstream os;
    os << "re,im,dist_from_minus_one\n";
    for (int i = 0; i < s.eigenvalues.size(); ++i) {
        auto z = s.eigenvalues(i);
        os << num(z.real()) << ',' << num(z.imag()) << ',' << num(std::abs(z + 1.0)) << '\n';
    }
    return os.str();
}

std::string vector_csv(const std::vector<std::string>& labels, const Vector& v, const std::string& col) {
    std::ostringstream os;
    os << "state," << col << '\n';
    for (int i = 0; i < v.size(); ++i) os << labels[i] << ',' << num(v(i)) << '\n';
    return os.str();
}

std::string results_csv(const std::vector<std::pair<std::string, SimResult>>& runs) {
    std::ostringstream os;
    os << "instance_id,policy,mean,stderr,gap_pct\n";
    for (const auto& [id, r] : runs)
        for (std::size_t i = 0; i < r.per_policy.size(); ++i)
            os << id << ',' << r.per_policy[i].name << ',' << num(r.per_policy[i].mean) << ','
               << num(r.per_policy[i].stderr_) << ',' << num(r.gap_pct[i]) << '\n';
    return os.str();
}

std::string boxplot_csv(const std::vector<std::string>& policies, const std::vector<std::string>& instances,
                        const std::vector<std::vector<double>>& gaps) {
    std::ostringstream os;
    os << "instance_id";
    for (const auto& p : policies) os << ',' << p;
    os << '\n';
    for (std::size_t i = 0; i < instances.size(); ++i) {
        os << instances[i];
        for (double g : gaps[i]) os << ',' << num(g);
        os << '\n';
    }
    return os.str();
}

}  // namespace pilotidx::io
