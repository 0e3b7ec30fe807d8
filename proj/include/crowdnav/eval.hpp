#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crowdnav/sim.hpp"

namespace crowdnav::eval {

struct EvalReport {
    int n_episodes = 0;
    double success_rate = 0.0;
    double collision_rate = 0.0;
    double goal_missing_rate = 0.0;
    double average_time_to_goal = 0.0;  // over successful episodes; NaN when none
    std::vector<sim::Outcome> outcomes;
    std::vector<double> times;
};

// Fixed-endpoint protocol: robot travels (-R,0) -> (R,0), obstacles randomized
// per episode from seed + index. Records the first `record_first_n` episodes.
EvalReport evaluate_policy(const sim::Policy& robot_policy, const sim::ScenarioConfig& scenario,
                           int n_episodes, std::uint64_t seed,
                           std::vector<sim::EpisodeRecord>* records = nullptr,
                           int record_first_n = 0);

void export_trajectories(const std::vector<sim::EpisodeRecord>& records,
                         const std::string& path);

void compare_algorithms(const std::vector<std::pair<std::string, EvalReport>>& reports,
                        const std::string& path);

}  // namespace crowdnav::eval
