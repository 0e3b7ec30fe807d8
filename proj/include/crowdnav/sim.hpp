#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/vec2.hpp"

namespace crowdnav::sim {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicyContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full state of one holonomic agent. Position, velocity and radius are the
// observable part; goal, preferred speed and heading are hidden from others.
struct AgentState {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.3;
    Vec2 goal;
    double preferred_speed = 1.0;
    double heading = 0.0;

    bool at_goal() const { return (position - goal).norm() < radius; }
};

// Robot full state followed by the observable part of every obstacle, in a
// fixed per-episode order. Flattens to 9 + 5N scalars for the network input.
struct JointState {
    AgentState robot;
    std::vector<AgentState> obstacles;

    std::vector<double> flatten() const;
    static std::size_t flat_size(std::size_t n_obstacles) { return 9 + 5 * n_obstacles; }
};

struct ScenarioConfig {
    double circle_radius = 4.0;
    int n_obstacles = 5;
    double radius_min = 0.3;
    double radius_max = 0.5;
    double preferred_speed = 1.0;
    double dt = 0.25;
    double t_max = 25.0;
    std::uint64_t rng_seed = 0;
    // +1 or -1: sign of the d/2 term in the proximity penalty branch.
    double reward_proximity_sign = -1.0;
    // when true, obstacles do not react to the robot
    bool robot_invisible = false;

    void validate() const;
};

enum class Outcome { Running, Collision, ReachedGoal, Timeout };

std::string outcome_name(Outcome o);

struct StepOutcome {
    Outcome classification = Outcome::Running;
    double reward = 0.0;
    double min_separation = 0.0;
};

struct EpisodeStep {
    double time = 0.0;       // time at which the state was observed
    JointState state;        // pre-step snapshot
    Vec2 action;             // robot action taken from that state
    double reward = 0.0;     // reward received for the step
};

struct EpisodeRecord {
    std::vector<EpisodeStep> steps;
    Outcome final_classification = Outcome::Running;
    double elapsed = 0.0;
    JointState final_state;

    double total_reward() const;
};

// maps an agent's own state plus everything it can observe to a velocity
using Policy = std::function<Vec2(const AgentState& self, const std::vector<AgentState>& others)>;

struct Scenario {
    AgentState robot;
    std::vector<AgentState> obstacles;
};

Scenario generate_scenario(const ScenarioConfig& cfg, bool fixed_robot_endpoints);

AgentState integrate_step(const AgentState& agent, const Vec2& action, double dt);

double separation_distance(const AgentState& a, const AgentState& b);

double compute_reward(double min_separation, bool at_goal, double proximity_sign = -1.0);

StepOutcome classify_step(const AgentState& robot, const std::vector<AgentState>& obstacles,
                          double elapsed, const ScenarioConfig& cfg);

EpisodeRecord run_episode(const ScenarioConfig& cfg, const Policy& robot_policy,
                          const Policy& obstacle_policy, bool record,
                          bool fixed_robot_endpoints = false);

// Variant starting from a pre-generated scenario (evaluation re-runs need this).
EpisodeRecord run_episode_from(const Scenario& scenario, const ScenarioConfig& cfg,
                               const Policy& robot_policy, const Policy& obstacle_policy,
                               bool record);

}  // namespace crowdnav::sim
