#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "crowdnav/actions.hpp"
#include "crowdnav/dvl.hpp"
#include "crowdnav/net.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav::a2cmp {

struct Experience {
    std::vector<double> state;
    std::size_t action_label = 0;
    double value_target = 0.0;
};

// Bounded FIFO; eviction is strictly oldest-first.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {}

    void push(Experience e) {
        buffer_.push_back(std::move(e));
        while (buffer_.size() > capacity_) buffer_.pop_front();
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& at(std::size_t i) const { return buffer_[i]; }

    // uniform sample of n experiences; with replacement when fewer are stored
    std::vector<const Experience*> sample(std::size_t n, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::deque<Experience> buffer_;
};

struct ImitationConfig {
    int demo_episodes = 3000;
    double learning_rate = 0.01;
    int epochs = 50;
};

struct A2cmpConfig {
    int episodes = 10000;          // M
    std::size_t batch_size = 100;  // L
    int minibatch_count = 1;       // N
    int sync_interval = 50;        // K
    double learning_rate = 0.001;
    double entropy_coeff = 0.01;  // beta
    double critic_coeff = 0.5;    // lambda
    double gamma = 0.9;
    std::size_t memory_capacity = 100000;
    ImitationConfig imitation;
    bool use_imitation = true;
    // bootstrap value targets from the current state instead of the next one
    bool bootstrap_same_state = false;
    int eval_interval = 100;
    int eval_episodes = 20;
    int checkpoint_interval = 500;
    std::string checkpoint_dir;  // empty disables periodic checkpoints
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// acting (theta) kept piecewise-constant; learning (theta') trained every episode
struct ActorCriticPair {
    net::NetworkParams acting;
    net::NetworkParams learning;
};

struct LossDiagnostics {
    double total = 0.0;
    double policy_loss = 0.0;
    double critic_loss = 0.0;
    double entropy = 0.0;
    double mean_advantage = 0.0;
};

struct EpisodeResult {
    sim::Outcome outcome = sim::Outcome::Running;
    double total_reward = 0.0;
    int steps = 0;
    std::size_t committed = 0;  // experiences admitted to memory
};

struct CurvePoint {
    int episode = 0;
    double avg_reward = 0.0;
    double policy_loss = 0.0;
    double critic_loss = 0.0;
    double entropy = 0.0;
    std::size_t memory_size = 0;
    bool has_eval = false;
    double eval_success_rate = 0.0;
};

struct EvalPoint {
    int episode = 0;
    double avg_reward = 0.0;
    double success_rate = 0.0;
};

struct TrainResult {
    net::NetworkParams params;
    std::vector<CurvePoint> curve;
    std::vector<EvalPoint> evals;
};

net::NetworkParams imitation_init(const dvl::DemoMemory& demos, std::size_t n_obstacles,
                                  const A2cmpConfig& cfg);

double target_state_value(double reward, const sim::JointState& next_state,
                          const net::NetworkParams& learning_critic, double gamma, double dt,
                          double v_pref, bool terminal);

std::pair<net::GradientSet, LossDiagnostics> compute_losses(
    const std::vector<const Experience*>& batch, const net::NetworkParams& learning, double beta,
    double lambda);

EpisodeResult run_training_episode(ActorCriticPair& pair, const actions::ActionTable& table,
                                   const sim::ScenarioConfig& scenario, ReplayMemory& memory,
                                   const A2cmpConfig& cfg, std::uint64_t episode_seed);

TrainResult train_a2cmp(const A2cmpConfig& cfg, const sim::ScenarioConfig& scenario,
                        const dvl::DemoMemory* demos);

void write_curve_csv(const TrainResult& result, const std::string& path);

}  // namespace crowdnav::a2cmp
