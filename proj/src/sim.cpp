#include "crowdnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace crowdnav::sim {

std::vector<double> JointState::flatten() const {
    std::vector<double> out;
    out.reserve(flat_size(obstacles.size()));
    out.push_back(robot.position.x);
    out.push_back(robot.position.y);
    out.push_back(robot.velocity.x);
    out.push_back(robot.velocity.y);
    out.push_back(robot.radius);
    out.push_back(robot.goal.x);
    out.push_back(robot.goal.y);
    out.push_back(robot.preferred_speed);
    out.push_back(robot.heading);
    for (const auto& ob : obstacles) {
        out.push_back(ob.position.x);
        out.push_back(ob.position.y);
        out.push_back(ob.velocity.x);
        out.push_back(ob.velocity.y);
        out.push_back(ob.radius);
    }
    return out;
}

void ScenarioConfig::validate() const {
    if (circle_radius <= 2.0 * radius_max)
        throw ScenarioError("circle_radius must exceed twice the maximum agent radius");
    if (dt <= 0.0) throw ScenarioError("dt must be positive");
    if (t_max < dt) throw ScenarioError("t_max must be at least dt");
    if (n_obstacles < 0) throw ScenarioError("n_obstacles must be non-negative");
    if (radius_min < 0.05 || radius_max > 2.0 || radius_min > radius_max)
        throw ScenarioError("radius range must lie within [0.05, 2.0]");
    if (preferred_speed <= 0.0) throw ScenarioError("preferred_speed must be positive");
}

double EpisodeRecord::total_reward() const {
    double sum = 0.0;
    for (const auto& s : steps) sum += s.reward;
    return sum;
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Running: return "running";
        case Outcome::Collision: return "collision";
        case Outcome::ReachedGoal: return "reached_goal";
        case Outcome::Timeout: return "timeout";
    }
    return "unknown";
}

namespace {

bool conflicts(const Vec2& candidate, double radius, const AgentState& other) {
    constexpr double kClearance = 0.1;
    return (candidate - other.position).norm() < radius + other.radius + kClearance ||
           (candidate - other.goal).norm() < radius + other.radius + kClearance;
}

// goals need the same clearance as start positions, otherwise two agents
// parked at their goals can end up overlapping
bool overlaps_any(const Vec2& pos, const Vec2& goal, double radius,
                  const std::vector<AgentState>& placed, const AgentState* robot) {
    if (robot && (conflicts(pos, radius, *robot) || conflicts(goal, radius, *robot))) return true;
    for (const auto& a : placed) {
        if (conflicts(pos, radius, a) || conflicts(goal, radius, a)) return true;
    }
    return false;
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg, bool fixed_robot_endpoints) {
    cfg.validate();
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> radius_dist(cfg.radius_min, cfg.radius_max);
    std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> jitter_dist(-0.2, 0.2);

    Scenario sc;
    sc.robot.radius = radius_dist(rng);
    sc.robot.preferred_speed = cfg.preferred_speed;
    if (fixed_robot_endpoints) {
        sc.robot.position = {-cfg.circle_radius, 0.0};
        sc.robot.goal = {cfg.circle_radius, 0.0};
    } else {
        const double phi = angle_dist(rng);
        sc.robot.position = {cfg.circle_radius * std::cos(phi), cfg.circle_radius * std::sin(phi)};
        const double goal_phi = phi + M_PI + jitter_dist(rng);
        sc.robot.goal = {cfg.circle_radius * std::cos(goal_phi), cfg.circle_radius * std::sin(goal_phi)};
    }
    sc.robot.heading = std::atan2(sc.robot.goal.y - sc.robot.position.y,
                                  sc.robot.goal.x - sc.robot.position.x);

    // all obstacles share one radius
    const double obstacle_radius = radius_dist(rng);
    for (int i = 0; i < cfg.n_obstacles; ++i) {
        AgentState ob;
        ob.radius = obstacle_radius;
        ob.preferred_speed = cfg.preferred_speed;
        bool placed = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double phi = angle_dist(rng);
            const Vec2 pos{cfg.circle_radius * std::cos(phi), cfg.circle_radius * std::sin(phi)};
            const double goal_phi = phi + M_PI + jitter_dist(rng);
            const Vec2 goal{cfg.circle_radius * std::cos(goal_phi), cfg.circle_radius * std::sin(goal_phi)};
            if (overlaps_any(pos, goal, ob.radius, sc.obstacles, &sc.robot)) continue;
            ob.position = pos;
            ob.goal = goal;
            ob.heading = std::atan2(ob.goal.y - pos.y, ob.goal.x - pos.x);
            placed = true;
            break;
        }
        if (!placed)
            throw ScenarioError("could not place obstacle " + std::to_string(i) +
                                " after 1000 attempts; scenario too crowded");
        sc.obstacles.push_back(ob);
    }
    return sc;
}

AgentState integrate_step(const AgentState& agent, const Vec2& action, double dt) {
    AgentState next = agent;
    next.position = agent.position + action * dt;
    next.velocity = action;
    if (action.norm() > 1e-9) next.heading = std::atan2(action.y, action.x);
    return next;
}

double separation_distance(const AgentState& a, const AgentState& b) {
    return (a.position - b.position).norm() - (a.radius + b.radius);
}

double compute_reward(double min_separation, bool at_goal, double proximity_sign) {
    if (min_separation < 0.0) return -0.25;
    if (min_separation < 0.2) return -0.1 + proximity_sign * min_separation / 2.0;
    if (at_goal) return 1.0;
    return 0.0;
}

StepOutcome classify_step(const AgentState& robot, const std::vector<AgentState>& obstacles,
                          double elapsed, const ScenarioConfig& cfg) {
    double min_sep = std::numeric_limits<double>::infinity();
    for (const auto& ob : obstacles) min_sep = std::min(min_sep, separation_distance(robot, ob));

    StepOutcome out;
    out.min_separation = min_sep;
    const bool at_goal = robot.at_goal();
    out.reward = compute_reward(min_sep, at_goal, cfg.reward_proximity_sign);
    if (min_sep < 0.0)
        out.classification = Outcome::Collision;
    else if (at_goal)
        out.classification = Outcome::ReachedGoal;
    else if (elapsed >= cfg.t_max - 1e-9)
        out.classification = Outcome::Timeout;
    else
        out.classification = Outcome::Running;
    return out;
}

namespace {

Vec2 checked_action(const Vec2& v, double preferred_speed, const char* who) {
    if (!v.finite())
        throw PolicyContractError(std::string(who) + " policy returned a non-finite velocity");
    if (v.norm() > preferred_speed + 1e-9)
        throw PolicyContractError(std::string(who) + " policy exceeded the preferred speed");
    return v;
}

}  // namespace

EpisodeRecord run_episode_from(const Scenario& scenario, const ScenarioConfig& cfg,
                               const Policy& robot_policy, const Policy& obstacle_policy,
                               bool record) {
    AgentState robot = scenario.robot;
    std::vector<AgentState> obstacles = scenario.obstacles;

    EpisodeRecord rec;
    double elapsed = 0.0;
    int step_index = 0;
    while (true) {
        // decisions from the pre-step snapshot, applied simultaneously
        const AgentState robot_snapshot = robot;
        const std::vector<AgentState> obstacle_snapshot = obstacles;

        const Vec2 robot_action =
            checked_action(robot_policy(robot_snapshot, obstacle_snapshot),
                           robot.preferred_speed, "robot");

        // obstacles keep running their policy after arriving: the goal-seeking
        // term vanishes there but they still yield to approaching agents
        std::vector<Vec2> obstacle_actions(obstacles.size());
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            std::vector<AgentState> others;
            others.reserve(obstacles.size());
            for (std::size_t j = 0; j < obstacle_snapshot.size(); ++j)
                if (j != i) others.push_back(obstacle_snapshot[j]);
            if (!cfg.robot_invisible) others.push_back(robot_snapshot);
            obstacle_actions[i] = checked_action(
                obstacle_policy(obstacle_snapshot[i], others),
                obstacle_snapshot[i].preferred_speed, "obstacle");
        }

        robot = integrate_step(robot, robot_action, cfg.dt);
        for (std::size_t i = 0; i < obstacles.size(); ++i)
            obstacles[i] = integrate_step(obstacles[i], obstacle_actions[i], cfg.dt);
        elapsed += cfg.dt;

        const StepOutcome outcome = classify_step(robot, obstacles, elapsed, cfg);
        if (record) {
            EpisodeStep step;
            step.time = step_index * cfg.dt;
            step.state = JointState{robot_snapshot, obstacle_snapshot};
            step.action = robot_action;
            step.reward = outcome.reward;
            rec.steps.push_back(std::move(step));
        }
        ++step_index;

        if (outcome.classification != Outcome::Running) {
            rec.final_classification = outcome.classification;
            rec.elapsed = elapsed;
            rec.final_state = JointState{robot, obstacles};
            return rec;
        }
    }
}

EpisodeRecord run_episode(const ScenarioConfig& cfg, const Policy& robot_policy,
                          const Policy& obstacle_policy, bool record,
                          bool fixed_robot_endpoints) {
    return run_episode_from(generate_scenario(cfg, fixed_robot_endpoints), cfg, robot_policy,
                            obstacle_policy, record);
}

}  // namespace crowdnav::sim
