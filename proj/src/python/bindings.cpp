#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crowdnav/a2cmp.hpp"
#include "crowdnav/actions.hpp"
#include "crowdnav/dvl.hpp"
#include "crowdnav/eval.hpp"
#include "crowdnav/net.hpp"
#include "crowdnav/orca.hpp"
#include "crowdnav/policies.hpp"
#include "crowdnav/sim.hpp"

namespace py = pybind11;
using namespace crowdnav;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Circle-crossing crowd navigation: simulator, ORCA, deep V-learning and "
              "advantage actor-critic training";

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("norm", &Vec2::norm)
        .def("__repr__", [](const Vec2& v) {
            return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
        });

    py::class_<sim::AgentState>(m, "AgentState")
        .def(py::init<>())
        .def_readwrite("position", &sim::AgentState::position)
        .def_readwrite("velocity", &sim::AgentState::velocity)
        .def_readwrite("radius", &sim::AgentState::radius)
        .def_readwrite("goal", &sim::AgentState::goal)
        .def_readwrite("preferred_speed", &sim::AgentState::preferred_speed)
        .def_readwrite("heading", &sim::AgentState::heading)
        .def("at_goal", &sim::AgentState::at_goal);

    py::class_<sim::JointState>(m, "JointState")
        .def(py::init<>())
        .def_readwrite("robot", &sim::JointState::robot)
        .def_readwrite("obstacles", &sim::JointState::obstacles)
        .def("flatten", &sim::JointState::flatten);

    py::class_<sim::ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("circle_radius", &sim::ScenarioConfig::circle_radius)
        .def_readwrite("n_obstacles", &sim::ScenarioConfig::n_obstacles)
        .def_readwrite("radius_min", &sim::ScenarioConfig::radius_min)
        .def_readwrite("radius_max", &sim::ScenarioConfig::radius_max)
        .def_readwrite("preferred_speed", &sim::ScenarioConfig::preferred_speed)
        .def_readwrite("dt", &sim::ScenarioConfig::dt)
        .def_readwrite("t_max", &sim::ScenarioConfig::t_max)
        .def_readwrite("rng_seed", &sim::ScenarioConfig::rng_seed)
        .def_readwrite("reward_proximity_sign", &sim::ScenarioConfig::reward_proximity_sign)
        .def_readwrite("robot_invisible", &sim::ScenarioConfig::robot_invisible);

    py::enum_<sim::Outcome>(m, "Outcome")
        .value("Running", sim::Outcome::Running)
        .value("Collision", sim::Outcome::Collision)
        .value("ReachedGoal", sim::Outcome::ReachedGoal)
        .value("Timeout", sim::Outcome::Timeout);

    py::class_<sim::EpisodeStep>(m, "EpisodeStep")
        .def_readonly("time", &sim::EpisodeStep::time)
        .def_readonly("state", &sim::EpisodeStep::state)
        .def_readonly("action", &sim::EpisodeStep::action)
        .def_readonly("reward", &sim::EpisodeStep::reward);

    py::class_<sim::EpisodeRecord>(m, "EpisodeRecord")
        .def_readonly("steps", &sim::EpisodeRecord::steps)
        .def_readonly("final_classification", &sim::EpisodeRecord::final_classification)
        .def_readonly("elapsed", &sim::EpisodeRecord::elapsed)
        .def("total_reward", &sim::EpisodeRecord::total_reward);

    py::class_<sim::Scenario>(m, "Scenario")
        .def_readonly("robot", &sim::Scenario::robot)
        .def_readonly("obstacles", &sim::Scenario::obstacles);

    m.def("generate_scenario", &sim::generate_scenario, py::arg("cfg"),
          py::arg("fixed_robot_endpoints"));
    m.def("integrate_step", &sim::integrate_step);
    m.def("separation_distance", &sim::separation_distance);
    m.def("compute_reward", &sim::compute_reward, py::arg("min_separation"), py::arg("at_goal"),
          py::arg("proximity_sign") = -1.0);

    m.def("run_orca_episode",
          [](const sim::ScenarioConfig& cfg, bool fixed_endpoints) {
              const auto policy = orca::make_policy(orca::OrcaParams{}, cfg.dt);
              return sim::run_episode(cfg, policy, policy, true, fixed_endpoints);
          },
          py::arg("cfg"), py::arg("fixed_endpoints") = false);

    py::class_<orca::OrcaParams>(m, "OrcaParams")
        .def(py::init<>())
        .def_readwrite("time_horizon", &orca::OrcaParams::time_horizon)
        .def_readwrite("neighbor_dist", &orca::OrcaParams::neighbor_dist)
        .def_readwrite("max_speed", &orca::OrcaParams::max_speed)
        .def_readwrite("reciprocity", &orca::OrcaParams::reciprocity);
    m.def("compute_orca_velocity", &orca::compute_orca_velocity);

    py::class_<actions::ActionTable>(m, "ActionTable")
        .def_readonly("actions", &actions::ActionTable::actions)
        .def_readonly("v_pref", &actions::ActionTable::v_pref)
        .def("__len__", &actions::ActionTable::size)
        .def("velocity_of", &actions::ActionTable::velocity_of);
    m.def("build_action_table", &actions::build_action_table);
    m.def("label_of", &actions::label_of);
    m.def("snap_to_grid", &actions::snap_to_grid);

    py::class_<net::ForwardTrace>(m, "ForwardTrace")
        .def_readonly("probs", &net::ForwardTrace::probs)
        .def_readonly("logits", &net::ForwardTrace::logits)
        .def_readonly("value", &net::ForwardTrace::value);

    py::class_<net::NetworkParams>(m, "NetworkParams")
        .def("input_size", &net::NetworkParams::input_size)
        .def("n_obstacles", &net::NetworkParams::n_obstacles);
    m.def("init_network", &net::init_network);
    m.def("forward",
          [](const net::NetworkParams& p, const std::vector<double>& x) {
              return net::forward(p, x);
          });
    m.def("save_checkpoint", &net::save_checkpoint);
    m.def("load_checkpoint", &net::load_checkpoint);

    py::class_<eval::EvalReport>(m, "EvalReport")
        .def_readonly("n_episodes", &eval::EvalReport::n_episodes)
        .def_readonly("success_rate", &eval::EvalReport::success_rate)
        .def_readonly("collision_rate", &eval::EvalReport::collision_rate)
        .def_readonly("goal_missing_rate", &eval::EvalReport::goal_missing_rate)
        .def_readonly("average_time_to_goal", &eval::EvalReport::average_time_to_goal);

    m.def("evaluate_orca",
          [](const sim::ScenarioConfig& cfg, int episodes, std::uint64_t seed) {
              return eval::evaluate_policy(orca::make_policy(orca::OrcaParams{}, cfg.dt), cfg,
                                           episodes, seed);
          },
          py::arg("cfg"), py::arg("episodes") = 100, py::arg("seed") = 0);
    m.def("evaluate_checkpoint",
          [](const std::string& path, const sim::ScenarioConfig& cfg, int episodes,
             std::uint64_t seed) {
              auto params = net::load_checkpoint(path);
              net::check_n_obstacles(params, cfg.n_obstacles);
              const auto table = actions::build_action_table(cfg.preferred_speed);
              return eval::evaluate_policy(policies::greedy_actor(params, table), cfg, episodes,
                                           seed);
          },
          py::arg("path"), py::arg("cfg"), py::arg("episodes") = 100, py::arg("seed") = 0);

    py::class_<a2cmp::A2cmpConfig>(m, "A2cmpConfig")
        .def(py::init<>())
        .def_readwrite("episodes", &a2cmp::A2cmpConfig::episodes)
        .def_readwrite("batch_size", &a2cmp::A2cmpConfig::batch_size)
        .def_readwrite("minibatch_count", &a2cmp::A2cmpConfig::minibatch_count)
        .def_readwrite("sync_interval", &a2cmp::A2cmpConfig::sync_interval)
        .def_readwrite("learning_rate", &a2cmp::A2cmpConfig::learning_rate)
        .def_readwrite("entropy_coeff", &a2cmp::A2cmpConfig::entropy_coeff)
        .def_readwrite("critic_coeff", &a2cmp::A2cmpConfig::critic_coeff)
        .def_readwrite("gamma", &a2cmp::A2cmpConfig::gamma)
        .def_readwrite("memory_capacity", &a2cmp::A2cmpConfig::memory_capacity)
        .def_readwrite("use_imitation", &a2cmp::A2cmpConfig::use_imitation)
        .def_readwrite("eval_interval", &a2cmp::A2cmpConfig::eval_interval)
        .def_readwrite("eval_episodes", &a2cmp::A2cmpConfig::eval_episodes)
        .def_readwrite("rng_seed", &a2cmp::A2cmpConfig::rng_seed);

    m.def("collect_orca_demos",
          [](const sim::ScenarioConfig& cfg, int episodes, double gamma) {
              const auto table = actions::build_action_table(cfg.preferred_speed);
              return dvl::collect_demonstrations(orca::make_policy(orca::OrcaParams{}, cfg.dt),
                                                 cfg, episodes, table, gamma);
          },
          py::arg("cfg"), py::arg("episodes"), py::arg("gamma") = 0.9);

    py::class_<dvl::DemoRecord>(m, "DemoRecord")
        .def_readonly("state", &dvl::DemoRecord::state)
        .def_readonly("label", &dvl::DemoRecord::label)
        .def_readonly("value", &dvl::DemoRecord::value)
        .def_readonly("episode", &dvl::DemoRecord::episode);

    m.def("train_a2cmp",
          [](const a2cmp::A2cmpConfig& cfg, const sim::ScenarioConfig& scenario,
             const dvl::DemoMemory& demos, const std::string& checkpoint_path) {
              const auto result =
                  a2cmp::train_a2cmp(cfg, scenario, demos.empty() ? nullptr : &demos);
              if (!checkpoint_path.empty()) net::save_checkpoint(result.params, checkpoint_path);
              std::vector<std::tuple<int, double, double>> evals;
              for (const auto& e : result.evals)
                  evals.emplace_back(e.episode, e.avg_reward, e.success_rate);
              return evals;
          },
          py::arg("cfg"), py::arg("scenario"), py::arg("demos"),
          py::arg("checkpoint_path") = "");
}
