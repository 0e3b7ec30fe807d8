#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crowdnav/actions.hpp"
#include "crowdnav/net.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav::dvl {

struct DemonstratorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DvlConfig {
    double gamma = 0.9;
    double learning_rate = 0.001;
    std::size_t batch_size = 100;
    int episodes = 0;
    double epsilon_start = 0.5;
    double epsilon_end = 0.1;
    int epsilon_decay_episodes = 0;  // 0 = first half of training
    std::size_t memory_capacity = 100000;
    int warmstart_epochs = 10;       // supervised critic pre-init from demos
    bool sample_from_demos = false;  // minibatches from D instead of E
    std::uint64_t rng_seed = 0;
};

struct DemoRecord {
    std::vector<double> state;
    std::size_t label = 0;
    double value = 0.0;
    int episode = 0;
};

using DemoMemory = std::vector<DemoRecord>;

struct DemoStats {
    int kept_episodes = 0;
    int total_episodes = 0;
};

// gamma^(dt * v_pref); the per-step discount of the lookahead target
double discount_factor(double gamma, double dt, double v_pref);

sim::JointState propagate_joint_state(const sim::JointState& s, const Vec2& robot_action,
                                      double dt);

// one-step lookahead argmax over the whole action table; ties -> lowest label
std::pair<Vec2, std::size_t> select_action_dvl(const net::NetworkParams& params,
                                               const sim::JointState& s,
                                               const actions::ActionTable& table, double gamma,
                                               double dt, double proximity_sign = -1.0);

struct TrainResult {
    net::NetworkParams params;
    std::vector<double> reward_curve;  // cumulative reward per training episode
};

TrainResult train_dvl(const DvlConfig& cfg, const sim::ScenarioConfig& scenario,
                      const DemoMemory* demos);

DemoMemory collect_demonstrations(const sim::Policy& demonstrator,
                                  const sim::ScenarioConfig& scenario, int n_episodes,
                                  const actions::ActionTable& table, double gamma,
                                  DemoStats* stats = nullptr);

void save_demos(const DemoMemory& demos, const std::string& path);
DemoMemory load_demos(const std::string& path);

}  // namespace crowdnav::dvl
