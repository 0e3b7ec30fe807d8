#include "crowdnav/dvl.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>

#include <json.hpp>

#include "crowdnav/orca.hpp"

namespace crowdnav::dvl {

double discount_factor(double gamma, double dt, double v_pref) {
    return std::pow(gamma, dt * v_pref);
}

sim::JointState propagate_joint_state(const sim::JointState& s, const Vec2& robot_action,
                                      double dt) {
    sim::JointState next = s;
    next.robot = sim::integrate_step(s.robot, robot_action, dt);
    for (auto& ob : next.obstacles) ob.position = ob.position + ob.velocity * dt;
    return next;
}

std::pair<Vec2, std::size_t> select_action_dvl(const net::NetworkParams& params,
                                               const sim::JointState& s,
                                               const actions::ActionTable& table, double gamma,
                                               double dt, double proximity_sign) {
    const double disc = discount_factor(gamma, dt, s.robot.preferred_speed);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < table.size(); ++k) {
        const sim::JointState next = propagate_joint_state(s, table.velocity_of(k), dt);
        double min_sep = std::numeric_limits<double>::infinity();
        for (const auto& ob : next.obstacles)
            min_sep = std::min(min_sep, sim::separation_distance(next.robot, ob));
        const double reward =
            sim::compute_reward(min_sep, next.robot.at_goal(), proximity_sign);
        const double score = reward + disc * net::value_of(params, next.flatten());
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return {table.velocity_of(best), best};
}

namespace {

struct Transition {
    std::vector<double> state;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
    bool fixed_target = false;  // demo entries carry a precomputed target
    double fixed_value = 0.0;
};

}  // namespace

TrainResult train_dvl(const DvlConfig& cfg, const sim::ScenarioConfig& scenario,
                      const DemoMemory* demos) {
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0)
        throw std::invalid_argument("gamma must lie in [0, 1)");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");

    const auto table = actions::build_action_table(scenario.preferred_speed);
    net::NetworkParams params = net::init_network(scenario.n_obstacles, cfg.rng_seed);
    std::mt19937_64 rng(cfg.rng_seed ^ 0x5eed5eed5eed5eedULL);

    // supervised critic warm start on the demonstration value targets
    if (demos && !demos->empty() && cfg.warmstart_epochs > 0) {
        std::vector<std::size_t> order(demos->size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (int epoch = 0; epoch < cfg.warmstart_epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const std::size_t end = std::min(order.size(), start + cfg.batch_size);
                net::GradientSet grads = net::zero_gradients(params);
                for (std::size_t i = start; i < end; ++i) {
                    const auto& rec = (*demos)[order[i]];
                    const auto trace = net::forward(params, rec.state);
                    net::OutputGrad og;
                    og.d_value = 2.0 * (trace.value - rec.value) /
                                 static_cast<double>(end - start);
                    net::accumulate(grads, net::backward(params, trace, og));
                }
                net::apply_update(params, grads, cfg.learning_rate);
            }
        }
    }

    net::NetworkParams target = params;

    std::deque<Transition> memory;
    auto push_memory = [&](Transition t) {
        memory.push_back(std::move(t));
        while (memory.size() > cfg.memory_capacity) memory.pop_front();
    };
    // E starts from D (Algorithm 1 line 3)
    if (demos) {
        for (const auto& rec : *demos) {
            Transition t;
            t.state = rec.state;
            t.fixed_target = true;
            t.fixed_value = rec.value;
            push_memory(std::move(t));
        }
    }

    const double disc = discount_factor(cfg.gamma, scenario.dt, scenario.preferred_speed);
    const int decay = cfg.epsilon_decay_episodes > 0 ? cfg.epsilon_decay_episodes
                                                     : std::max(1, cfg.episodes / 2);
    const auto orca_policy = orca::make_policy(orca::OrcaParams{}, scenario.dt);

    TrainResult result{params, {}};
    std::uniform_real_distribution<double> uniform01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> random_label(0, table.size() - 1);

    for (int episode = 0; episode < cfg.episodes; ++episode) {
        const double frac = std::min(1.0, static_cast<double>(episode) / decay);
        const double epsilon = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;

        sim::ScenarioConfig ep_cfg = scenario;
        ep_cfg.rng_seed = scenario.rng_seed + static_cast<std::uint64_t>(episode);
        sim::Scenario sc = sim::generate_scenario(ep_cfg, false);

        sim::AgentState robot = sc.robot;
        std::vector<sim::AgentState> obstacles = sc.obstacles;
        double elapsed = 0.0;
        double episode_reward = 0.0;

        while (true) {
            const sim::JointState state{robot, obstacles};
            std::size_t label;
            if (uniform01(rng) < epsilon)
                label = random_label(rng);
            else
                label = select_action_dvl(params, state, table, cfg.gamma, ep_cfg.dt,
                                          ep_cfg.reward_proximity_sign)
                            .second;
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
            episode_reward += out.reward;

            Transition t;
            t.state = state.flatten();
            t.reward = out.reward;
            t.next_state = sim::JointState{robot, obstacles}.flatten();
            t.terminal = out.classification != sim::Outcome::Running;
            push_memory(std::move(t));

            // one minibatch regression step per environment step
            const bool from_demos = cfg.sample_from_demos && demos && !demos->empty();
            const std::size_t pool = from_demos ? demos->size() : memory.size();
            if (pool > 0) {
                std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
                net::GradientSet grads = net::zero_gradients(params);
                for (std::size_t b = 0; b < cfg.batch_size; ++b) {
                    double y;
                    const std::vector<double>* s;
                    if (from_demos) {
                        const auto& rec = (*demos)[pick(rng)];
                        s = &rec.state;
                        y = rec.value;
                    } else {
                        const Transition& tr = memory[pick(rng)];
                        s = &tr.state;
                        if (tr.fixed_target)
                            y = tr.fixed_value;
                        else if (tr.terminal)
                            y = tr.reward;  // bootstrap with V_hat = 0 at terminals
                        else
                            y = tr.reward + disc * net::value_of(target, tr.next_state);
                    }
                    const auto trace = net::forward(params, *s);
                    net::OutputGrad og;
                    og.d_value =
                        2.0 * (trace.value - y) / static_cast<double>(cfg.batch_size);
                    net::accumulate(grads, net::backward(params, trace, og));
                }
                net::apply_update(params, grads, cfg.learning_rate);
            }

            if (out.classification != sim::Outcome::Running) break;
        }

        target = params;  // refresh once per episode
        result.reward_curve.push_back(episode_reward);
    }

    result.params = std::move(params);
    return result;
}

DemoMemory collect_demonstrations(const sim::Policy& demonstrator,
                                  const sim::ScenarioConfig& scenario, int n_episodes,
                                  const actions::ActionTable& table, double gamma,
                                  DemoStats* stats) {
    if (n_episodes <= 0) throw DemonstratorError("no episodes requested");
    const auto orca_policy = orca::make_policy(orca::OrcaParams{}, scenario.dt);
    const double disc = discount_factor(gamma, scenario.dt, scenario.preferred_speed);

    DemoMemory demos;
    int kept = 0;
    for (int episode = 0; episode < n_episodes; ++episode) {
        sim::ScenarioConfig ep_cfg = scenario;
        ep_cfg.rng_seed = scenario.rng_seed + static_cast<std::uint64_t>(episode);
        // demos follow the evaluation crossing (fixed start and goal); labels
        // from arbitrary crossing directions spread over too many action bins
        // for a network this size to clone reliably
        const sim::EpisodeRecord rec =
            sim::run_episode(ep_cfg, demonstrator, orca_policy, true, true);
        if (rec.final_classification != sim::Outcome::ReachedGoal) continue;

        // discounted return-to-go, computed backwards
        std::vector<double> returns(rec.steps.size());
        double g = 0.0;
        for (std::size_t i = rec.steps.size(); i-- > 0;) {
            g = rec.steps[i].reward + disc * g;
            returns[i] = g;
        }
        for (std::size_t i = 0; i < rec.steps.size(); ++i) {
            DemoRecord d;
            d.state = rec.steps[i].state.flatten();
            d.label = actions::snap_to_grid(table, rec.steps[i].action);
            d.value = returns[i];
            d.episode = kept;
            demos.push_back(std::move(d));
        }
        ++kept;
    }
    if (stats) *stats = DemoStats{kept, n_episodes};
    if (kept == 0)
        throw DemonstratorError("demonstrator produced no successful episode out of " +
                                std::to_string(n_episodes));
    return demos;
}

void save_demos(const DemoMemory& demos, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open demo file for writing: " + path);
    for (const auto& d : demos) {
        nlohmann::json j{{"state", d.state}, {"label", d.label}, {"value", d.value},
                         {"episode", d.episode}};
        out << j.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

DemoMemory load_demos(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open demo file: " + path);
    DemoMemory demos;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            DemoRecord d;
            d.state = j.at("state").get<std::vector<double>>();
            d.label = j.at("label").get<std::size_t>();
            d.value = j.at("value").get<double>();
            d.episode = j.at("episode").get<int>();
            demos.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed demo record: " + e.what());
        }
    }
    return demos;
}

}  // namespace crowdnav::dvl
