#include "crowdnav/a2cmp.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "crowdnav/orca.hpp"
#include "crowdnav/policies.hpp"

namespace crowdnav::a2cmp {

void A2cmpConfig::validate() const {
    if (entropy_coeff <= 0.0 || entropy_coeff > 1.0)
        throw std::invalid_argument("entropy_coeff must lie in (0, 1]");
    if (critic_coeff <= 0.0 || critic_coeff > 1.0)
        throw std::invalid_argument("critic_coeff must lie in (0, 1]");
    if (sync_interval < 1) throw std::invalid_argument("sync_interval must be at least 1");
    if (learning_rate <= 0.0 || imitation.learning_rate <= 0.0)
        throw std::invalid_argument("learning rates must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t n, std::mt19937_64& rng) const {
    if (buffer_.empty()) return {};
    std::vector<const Experience*> out;
    out.reserve(n);
    if (buffer_.size() >= n) {
        // without replacement
        std::vector<std::size_t> idx(buffer_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&buffer_[idx[i]]);
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&buffer_[pick(rng)]);
    }
    return out;
}

net::NetworkParams imitation_init(const dvl::DemoMemory& demos, std::size_t n_obstacles,
                                  const A2cmpConfig& cfg) {
    if (demos.empty()) throw std::invalid_argument("imitation_init requires non-empty demos");
    net::NetworkParams params = net::init_network(n_obstacles, cfg.rng_seed);
    std::mt19937_64 rng(cfg.rng_seed ^ 0x1717171717171717ULL);

    std::vector<std::size_t> order(demos.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.imitation.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            net::GradientSet grads = net::zero_gradients(params);
            for (std::size_t i = start; i < end; ++i) {
                const auto& rec = demos[order[i]];
                const auto trace = net::forward(params, rec.state);
                net::OutputGrad og;
                // cross-entropy on the demonstrated label
                og.d_logits = trace.probs;
                og.d_logits[rec.label] -= 1.0;
                for (auto& g : og.d_logits) g *= inv_b;
                // squared error on the stored value target
                og.d_value = 2.0 * (trace.value - rec.value) * inv_b;
                net::accumulate(grads, net::backward(params, trace, og));
            }
            net::apply_update(params, grads, cfg.imitation.learning_rate);
        }
    }
    return params;
}

double target_state_value(double reward, const sim::JointState& next_state,
                          const net::NetworkParams& learning_critic, double gamma, double dt,
                          double v_pref, bool terminal) {
    if (terminal) return reward;
    const double disc = dvl::discount_factor(gamma, dt, v_pref);
    return reward + disc * net::value_of(learning_critic, next_state.flatten());
}

std::pair<net::GradientSet, LossDiagnostics> compute_losses(
    const std::vector<const Experience*>& batch, const net::NetworkParams& learning, double beta,
    double lambda) {
    if (batch.empty()) throw std::invalid_argument("compute_losses requires a non-empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    net::GradientSet grads = net::zero_gradients(learning);
    LossDiagnostics diag;

    for (const Experience* e : batch) {
        const auto trace = net::forward(learning, e->state);
        const double advantage = e->value_target - trace.value;

        double entropy = 0.0;
        for (const double p : trace.probs)
            if (p > 0.0) entropy -= p * std::log(p);

        const double log_pi = std::log(std::max(trace.probs[e->action_label], 1e-300));
        const double policy_loss = -log_pi * advantage - beta * entropy;
        const double critic_loss = advantage * advantage;

        diag.policy_loss += policy_loss * inv_b;
        diag.critic_loss += critic_loss * inv_b;
        diag.entropy += entropy * inv_b;
        diag.mean_advantage += advantage * inv_b;

        net::OutputGrad og;
        // policy term: advantage detached, d/dz -log pi(a) = p - onehot(a);
        // entropy term: d/dz -H = p * (log p + H)
        og.d_logits.resize(trace.probs.size());
        for (std::size_t k = 0; k < trace.probs.size(); ++k) {
            const double p = trace.probs[k];
            double g = advantage * (p - (k == e->action_label ? 1.0 : 0.0));
            if (p > 0.0) g += beta * p * (std::log(p) + entropy);
            og.d_logits[k] = g * inv_b;
        }
        // critic term through lambda * A^2, advantage depends on V with dA/dV = -1
        og.d_value = lambda * (-2.0 * advantage) * inv_b;
        net::accumulate(grads, net::backward(learning, trace, og));
    }
    diag.total = diag.policy_loss + lambda * diag.critic_loss;
    return {std::move(grads), diag};
}

namespace {

struct StagedStep {
    std::vector<double> state;
    std::size_t label = 0;
    double reward = 0.0;
    sim::JointState next_state;
    bool terminal = false;
};

// rollout with softmax-sampled actions; returns outcome and staged tuples
EpisodeResult rollout(const net::NetworkParams& acting, const actions::ActionTable& table,
                      const sim::ScenarioConfig& scenario, std::uint64_t episode_seed,
                      std::vector<StagedStep>& staged) {
    sim::ScenarioConfig ep_cfg = scenario;
    ep_cfg.rng_seed = episode_seed;
    const sim::Scenario sc = sim::generate_scenario(ep_cfg, false);
    std::mt19937_64 rng(episode_seed ^ 0xa2c0a2c0a2c0a2c0ULL);
    const auto orca_policy = orca::make_policy(orca::OrcaParams{}, ep_cfg.dt);

    sim::AgentState robot = sc.robot;
    std::vector<sim::AgentState> obstacles = sc.obstacles;
    double elapsed = 0.0;

    EpisodeResult result;
    while (true) {
        const sim::JointState state{robot, obstacles};
        const auto trace = net::forward(acting, state.flatten());
        const std::size_t label = policies::sample_label(trace.probs, rng);
        const Vec2 action = table.velocity_of(label);

        std::vector<Vec2> ob_actions(obstacles.size());
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            std::vector<sim::AgentState> others;
            for (std::size_t j = 0; j < obstacles.size(); ++j)
                if (j != i) others.push_back(obstacles[j]);
            if (!ep_cfg.robot_invisible) others.push_back(robot);
            ob_actions[i] = orca_policy(obstacles[i], others);
        }

        robot = sim::integrate_step(robot, action, ep_cfg.dt);
        for (std::size_t i = 0; i < obstacles.size(); ++i)
            obstacles[i] = sim::integrate_step(obstacles[i], ob_actions[i], ep_cfg.dt);
        elapsed += ep_cfg.dt;

        const sim::StepOutcome out = sim::classify_step(robot, obstacles, elapsed, ep_cfg);
        result.total_reward += out.reward;
        ++result.steps;

        StagedStep step;
        step.state = state.flatten();
        step.label = label;
        step.reward = out.reward;
        step.next_state = sim::JointState{robot, obstacles};
        step.terminal = out.classification != sim::Outcome::Running;
        staged.push_back(std::move(step));

        if (out.classification != sim::Outcome::Running) {
            result.outcome = out.classification;
            return result;
        }
    }
}

void commit_staged(const std::vector<StagedStep>& staged, const net::NetworkParams& learning,
                   const sim::ScenarioConfig& scenario, const A2cmpConfig& cfg,
                   ReplayMemory& memory, std::size_t& committed) {
    for (const auto& step : staged) {
        Experience e;
        e.state = step.state;
        e.action_label = step.label;
        if (cfg.bootstrap_same_state && !step.terminal) {
            // alternative target: bootstrap from the current state
            const double disc =
                dvl::discount_factor(cfg.gamma, scenario.dt, scenario.preferred_speed);
            e.value_target = step.reward + disc * net::value_of(learning, step.state);
        } else {
            e.value_target =
                target_state_value(step.reward, step.next_state, learning, cfg.gamma,
                                   scenario.dt, scenario.preferred_speed, step.terminal);
        }
        memory.push(std::move(e));
        ++committed;
    }
}

}  // namespace

EpisodeResult run_training_episode(ActorCriticPair& pair, const actions::ActionTable& table,
                                   const sim::ScenarioConfig& scenario, ReplayMemory& memory,
                                   const A2cmpConfig& cfg, std::uint64_t episode_seed) {
    std::vector<StagedStep> staged;
    EpisodeResult result = rollout(pair.acting, table, scenario, episode_seed, staged);
    // only goal-reaching and colliding episodes qualify for replay
    if (result.outcome == sim::Outcome::ReachedGoal || result.outcome == sim::Outcome::Collision)
        commit_staged(staged, pair.learning, scenario, cfg, memory, result.committed);
    return result;
}

namespace {

EvalPoint evaluate_snapshot(const net::NetworkParams& acting, const actions::ActionTable& table,
                            const sim::ScenarioConfig& scenario, const A2cmpConfig& cfg,
                            int episode) {
    const auto policy = policies::greedy_actor(acting, table);
    const auto orca_policy = orca::make_policy(orca::OrcaParams{}, scenario.dt);
    EvalPoint point;
    point.episode = episode;
    int successes = 0;
    for (int i = 0; i < cfg.eval_episodes; ++i) {
        sim::ScenarioConfig ep_cfg = scenario;
        ep_cfg.rng_seed = cfg.rng_seed + 1000000ULL +
                          static_cast<std::uint64_t>(episode) * 1000ULL +
                          static_cast<std::uint64_t>(i);
        const auto rec = sim::run_episode(ep_cfg, policy, orca_policy, true, true);
        point.avg_reward += rec.total_reward();
        if (rec.final_classification == sim::Outcome::ReachedGoal) ++successes;
    }
    point.avg_reward /= cfg.eval_episodes;
    point.success_rate = static_cast<double>(successes) / cfg.eval_episodes;
    return point;
}

void initialize_memory(ActorCriticPair& pair, const actions::ActionTable& table,
                       const sim::ScenarioConfig& scenario, const A2cmpConfig& cfg,
                       ReplayMemory& memory) {
    const std::size_t wanted = std::max(cfg.batch_size, std::size_t{500});
    std::uint64_t seed = cfg.rng_seed + 500000ULL;
    for (int episode = 0; episode < 200 && memory.size() < wanted; ++episode)
        run_training_episode(pair, table, scenario, memory, cfg, seed + episode);
    if (memory.size() >= std::min(wanted, std::size_t{1})) return;

    // the initialized policy produced nothing qualified; fall back to ORCA rollouts
    const auto orca_policy = orca::make_policy(orca::OrcaParams{}, scenario.dt);
    for (int episode = 0; memory.size() < wanted && episode < 500; ++episode) {
        sim::ScenarioConfig ep_cfg = scenario;
        ep_cfg.rng_seed = seed + 200ULL + episode;
        const auto rec = sim::run_episode(ep_cfg, orca_policy, orca_policy, true);
        if (rec.final_classification != sim::Outcome::ReachedGoal &&
            rec.final_classification != sim::Outcome::Collision)
            continue;
        for (std::size_t i = 0; i < rec.steps.size(); ++i) {
            const auto& step = rec.steps[i];
            Experience e;
            e.state = step.state.flatten();
            e.action_label = actions::snap_to_grid(table, step.action);
            const bool terminal = i + 1 == rec.steps.size();
            const sim::JointState& next =
                terminal ? rec.final_state : rec.steps[i + 1].state;
            e.value_target = target_state_value(step.reward, next, pair.learning, cfg.gamma,
                                                scenario.dt, scenario.preferred_speed, terminal);
            memory.push(std::move(e));
        }
    }
}

}  // namespace

TrainResult train_a2cmp(const A2cmpConfig& cfg, const sim::ScenarioConfig& scenario,
                        const dvl::DemoMemory* demos) {
    cfg.validate();
    scenario.validate();
    if (cfg.use_imitation && (!demos || demos->empty()))
        throw std::invalid_argument("imitation requested but no demonstrations supplied");

    const auto table = actions::build_action_table(scenario.preferred_speed);

    ActorCriticPair pair;
    if (cfg.use_imitation)
        pair.acting = imitation_init(*demos, scenario.n_obstacles, cfg);
    else
        pair.acting = net::init_network(scenario.n_obstacles, cfg.rng_seed);
    pair.learning = pair.acting;

    ReplayMemory memory(cfg.memory_capacity);
    if (cfg.episodes > 0) initialize_memory(pair, table, scenario, cfg, memory);

    std::mt19937_64 rng(cfg.rng_seed ^ 0x7247a14e00000000ULL);
    TrainResult result;

    for (int episode = 1; episode <= cfg.episodes; ++episode) {
        EpisodeResult ep;
        try {
            ep = run_training_episode(pair, table, scenario, memory, cfg,
                                      cfg.rng_seed + static_cast<std::uint64_t>(episode));
        } catch (const net::NumericError& e) {
            throw net::NumericError("episode " + std::to_string(episode) + ": " + e.what());
        }

        CurvePoint point;
        point.episode = episode;
        point.avg_reward = ep.total_reward;
        point.memory_size = memory.size();

        if (memory.size() > 0) {
            for (int n = 0; n < cfg.minibatch_count; ++n) {
                const auto batch = memory.sample(cfg.batch_size, rng);
                auto [grads, diag] =
                    compute_losses(batch, pair.learning, cfg.entropy_coeff, cfg.critic_coeff);
                try {
                    net::apply_update(pair.learning, grads, cfg.learning_rate);
                } catch (const net::NumericError& e) {
                    throw net::NumericError("episode " + std::to_string(episode) + ": " +
                                            e.what());
                }
                point.policy_loss = diag.policy_loss;
                point.critic_loss = diag.critic_loss;
                point.entropy = diag.entropy;
            }
        }

        if (episode % cfg.sync_interval == 0) pair.acting = pair.learning;

        if (cfg.eval_interval > 0 && episode % cfg.eval_interval == 0) {
            const EvalPoint ev = evaluate_snapshot(pair.acting, table, scenario, cfg, episode);
            result.evals.push_back(ev);
            point.has_eval = true;
            point.eval_success_rate = ev.success_rate;
        }

        if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_interval > 0 &&
            episode % cfg.checkpoint_interval == 0) {
            std::filesystem::create_directories(cfg.checkpoint_dir);
            net::save_checkpoint(pair.acting, cfg.checkpoint_dir + "/a2cmp_ep" +
                                                  std::to_string(episode) + ".json");
        }

        result.curve.push_back(point);
    }

    result.params = std::move(pair.acting);
    return result;
}

void write_curve_csv(const TrainResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open curve file for writing: " + path);
    out << "episode,avg_reward,policy_loss,critic_loss,entropy,memory_size,success_rate_eval\n";
    char buf[256];
    for (const auto& p : result.curve) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%zu,", p.episode, p.avg_reward,
                      p.policy_loss, p.critic_loss, p.entropy, p.memory_size);
        out << buf;
        if (p.has_eval) {
            std::snprintf(buf, sizeof buf, "%.9g", p.eval_success_rate);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace crowdnav::a2cmp
