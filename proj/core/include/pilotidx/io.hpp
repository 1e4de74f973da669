#pragma once

#include "pilotidx/bounds.hpp"
#include "pilotidx/sim.hpp"

#include <string>
#include <vector>

namespace pilotidx::io {

// 17 significant digits: round-trips every double.
std::string num(double x);

// Write to a temporary sibling, then rename over the target.
void write_atomic(const std::string& path, const std::string& content);

// {"K":..,"P":[["0.3",..],..],"rates":[..],"label":..}; entries may be decimal
// strings or numbers. Unknown keys are rejected.
std::string channel_to_json(const ChannelModel& m);
ChannelModel channel_from_json(const std::string& text);

std::string reward_csv(const RewardModel& rm);                         // j,tau,reward
std::string index_csv(const WhittleIndexTable& t);                     // j,tau,W
std::string index_json(const WhittleIndexTable& t);                    // table + breakpoints + sequence
std::string breakpoints_csv(const WhittleIndexTable& t);               // order,j,tau,W
std::string policy_csv(const StateSpace& sp, const std::vector<int>& action);  // j,tau,action
std::string joint_policy_csv(const JointMDP& jm, const JointResult& r);        // state,users
// Grid over (user-1 label, user-2 label) with the other users at their steady entry;
// cell = 1-based user chosen (0 idle, -1 several).
std::string structure_map_csv(const JointMDP& jm, const std::vector<std::uint32_t>& policy);
std::string bound_sweep_csv(const std::vector<BoundReport>& rows);     // W,g_app,g_orig,g_max,g_min,D,relErr
std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj);  // t,dist,y_1..
std::string spectrum_csv(const SpectrumReport& s);                     // re,im,dist_from_minus_one
std::string vector_csv(const std::vector<std::string>& labels, const Vector& v, const std::string& col);
std::string results_csv(const std::vector<std::pair<std::string, SimResult>>& runs);  // instance_id,policy,mean,stderr,gap_pct
// instance rows, one gap column per policy
std::string boxplot_csv(const std::vector<std::string>& policies, const std::vector<std::string>& instances,
                        const std::vector<std::vector<double>>& gaps);

}  // namespace pilotidx::io
