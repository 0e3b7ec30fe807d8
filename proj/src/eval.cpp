#include "crowdnav/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "crowdnav/orca.hpp"

namespace crowdnav::eval {

EvalReport evaluate_policy(const sim::Policy& robot_policy, const sim::ScenarioConfig& scenario,
                           int n_episodes, std::uint64_t seed,
                           std::vector<sim::EpisodeRecord>* records, int record_first_n) {
    const auto orca_policy = orca::make_policy(orca::OrcaParams{}, scenario.dt);

    EvalReport report;
    report.n_episodes = n_episodes;
    int successes = 0, collisions = 0, missing = 0;
    double time_sum = 0.0;

    for (int i = 0; i < n_episodes; ++i) {
        sim::ScenarioConfig ep_cfg = scenario;
        ep_cfg.rng_seed = seed + static_cast<std::uint64_t>(i);
        const bool keep = records && i < record_first_n;
        const sim::EpisodeRecord rec =
            sim::run_episode(ep_cfg, robot_policy, orca_policy, keep, true);
        if (keep) records->push_back(rec);

        report.outcomes.push_back(rec.final_classification);
        report.times.push_back(rec.elapsed);
        switch (rec.final_classification) {
            case sim::Outcome::ReachedGoal:
                ++successes;
                time_sum += rec.elapsed;
                break;
            case sim::Outcome::Collision:
                ++collisions;
                break;
            default:
                ++missing;
                break;
        }
    }

    if (n_episodes > 0) {
        report.success_rate = static_cast<double>(successes) / n_episodes;
        report.collision_rate = static_cast<double>(collisions) / n_episodes;
        report.goal_missing_rate = static_cast<double>(missing) / n_episodes;
    }
    report.average_time_to_goal =
        successes > 0 ? time_sum / successes : std::numeric_limits<double>::quiet_NaN();
    return report;
}

void export_trajectories(const std::vector<sim::EpisodeRecord>& records,
                         const std::string& path) {
    if (records.empty())
        throw std::invalid_argument("export_trajectories called with no episode records");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trajectory file for writing: " + path);
    out << "episode,t,agent_id,px,py,vx,vy,radius\n";
    char buf[256];
    for (std::size_t e = 0; e < records.size(); ++e) {
        for (const auto& step : records[e].steps) {
            const auto write_agent = [&](int agent_id, const sim::AgentState& a) {
                std::snprintf(buf, sizeof buf, "%zu,%.3f,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", e,
                              step.time, agent_id, a.position.x, a.position.y, a.velocity.x,
                              a.velocity.y, a.radius);
                out << buf;
            };
            write_agent(0, step.state.robot);
            for (std::size_t i = 0; i < step.state.obstacles.size(); ++i)
                write_agent(static_cast<int>(i) + 1, step.state.obstacles[i]);
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void compare_algorithms(const std::vector<std::pair<std::string, EvalReport>>& reports,
                        const std::string& path) {
    if (reports.empty()) throw std::invalid_argument("compare_algorithms needs >= 1 report");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open comparison file for writing: " + path);
    out << "algorithm,success_rate,collision_rate,goal_missing,average_time\n";
    char buf[256];
    for (const auto& [name, r] : reports) {
        std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f,%.2f,%.1f\n", name.c_str(), r.success_rate,
                      r.collision_rate, r.goal_missing_rate, r.average_time_to_goal);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace crowdnav::eval
