#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crowdnav/a2cmp.hpp"
#include "crowdnav/actions.hpp"
#include "crowdnav/config.hpp"
#include "crowdnav/dvl.hpp"
#include "crowdnav/eval.hpp"
#include "crowdnav/net.hpp"
#include "crowdnav/orca.hpp"
#include "crowdnav/policies.hpp"
#include "crowdnav/sim.hpp"

namespace fs = std::filesystem;
using namespace crowdnav;

namespace {

sim::Policy dvl_lookahead_policy(net::NetworkParams params, const sim::ScenarioConfig& scenario,
                                 double gamma) {
    auto table = actions::build_action_table(scenario.preferred_speed);
    const double dt = scenario.dt;
    const double prox = scenario.reward_proximity_sign;
    return [params = std::move(params), table = std::move(table), gamma, dt, prox](
               const sim::AgentState& self, const std::vector<sim::AgentState>& others) -> Vec2 {
        const sim::JointState state{self, others};
        return dvl::select_action_dvl(params, state, table, gamma, dt, prox).first;
    };
}

// "orca", "dvl:<checkpoint>" (one-step lookahead) or a checkpoint path
// (actor-head argmax)
sim::Policy resolve_policy(const std::string& spec, const config::RunConfig& cfg,
                           std::vector<net::NetworkParams>& keep_alive) {
    if (spec == "orca") return orca::make_policy(orca::OrcaParams{}, cfg.scenario.dt);
    if (spec.rfind("dvl:", 0) == 0) {
        auto params = net::load_checkpoint(spec.substr(4));
        net::check_n_obstacles(params, cfg.scenario.n_obstacles);
        return dvl_lookahead_policy(std::move(params), cfg.scenario, cfg.a2c.gamma);
    }
    keep_alive.push_back(net::load_checkpoint(spec));
    net::check_n_obstacles(keep_alive.back(), cfg.scenario.n_obstacles);
    return policies::greedy_actor(keep_alive.back(),
                                  actions::build_action_table(cfg.scenario.preferred_speed));
}

void write_report_csv(const eval::EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report file for writing: " + path);
    out << "n_episodes,success_rate,collision_rate,goal_missing_rate,average_time_to_goal\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g,%.6g,%.6g\n", report.n_episodes,
                  report.success_rate, report.collision_rate, report.goal_missing_rate,
                  report.average_time_to_goal);
    out << buf;
}

void write_dvl_curve_csv(const std::vector<double>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open curve file for writing: " + path);
    out << "episode,avg_reward\n";
    char buf[80];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, curve[i]);
        out << buf;
    }
}

int cmd_collect_demos(const std::string& policy_spec, int episodes, const std::string& out_path,
                      std::uint64_t seed, config::RunConfig cfg) {
    if (episodes <= 0) {
        std::cerr << "error: no episodes requested\n";
        return 1;
    }
    cfg.scenario.rng_seed = seed;
    const auto table = actions::build_action_table(cfg.scenario.preferred_speed);
    std::vector<net::NetworkParams> keep_alive;
    const sim::Policy demonstrator = resolve_policy(policy_spec, cfg, keep_alive);

    dvl::DemoStats stats;
    const auto demos =
        dvl::collect_demonstrations(demonstrator, cfg.scenario, episodes, table, cfg.a2c.gamma,
                                    &stats);
    dvl::save_demos(demos, out_path);
    std::cout << "kept " << stats.kept_episodes << "/" << stats.total_episodes
              << " episodes, " << demos.size() << " records -> " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& algo, config::RunConfig cfg, const std::string& demos_path,
              const std::string& out_dir, bool no_imitation, std::uint64_t seed) {
    fs::create_directories(out_dir);
    cfg.scenario.rng_seed = seed;
    cfg.a2c.rng_seed = seed;
    cfg.dvl.rng_seed = seed;

    dvl::DemoMemory demos;
    if (!demos_path.empty()) demos = dvl::load_demos(demos_path);

    if (algo == "dvl") {
        const auto result =
            dvl::train_dvl(cfg.dvl, cfg.scenario, demos.empty() ? nullptr : &demos);
        net::save_checkpoint(result.params, out_dir + "/dvl_final.json");
        write_dvl_curve_csv(result.reward_curve, out_dir + "/dvl_curve.csv");
        std::cout << "dvl: " << result.reward_curve.size() << " episodes -> " << out_dir
                  << "/dvl_final.json\n";
        return 0;
    }

    cfg.a2c.use_imitation = !no_imitation;
    if (cfg.a2c.use_imitation && demos.empty()) {
        std::cerr << "error: --algo a2cmp needs --demos (run collect-demos first) or "
                     "--no-imitation\n";
        return 1;
    }
    cfg.a2c.checkpoint_dir = out_dir;
    const auto result =
        a2cmp::train_a2cmp(cfg.a2c, cfg.scenario, demos.empty() ? nullptr : &demos);
    net::save_checkpoint(result.params, out_dir + "/a2cmp_final.json");
    a2cmp::write_curve_csv(result, out_dir + "/a2cmp_curve.csv");
    std::cout << "a2cmp: " << result.curve.size() << " episodes -> " << out_dir
              << "/a2cmp_final.json\n";
    return 0;
}

int cmd_evaluate(const std::string& policy_spec, int episodes, std::uint64_t seed,
                 const std::string& out_dir, int export_traj, config::RunConfig cfg) {
    fs::create_directories(out_dir);
    std::vector<net::NetworkParams> keep_alive;
    const sim::Policy policy = resolve_policy(policy_spec, cfg, keep_alive);

    std::vector<sim::EpisodeRecord> records;
    const auto report = eval::evaluate_policy(policy, cfg.scenario, episodes, seed,
                                              export_traj > 0 ? &records : nullptr, export_traj);
    write_report_csv(report, out_dir + "/report.csv");
    for (std::size_t i = 0; i < records.size(); ++i)
        eval::export_trajectories({records[i]}, out_dir + "/traj_" + std::to_string(i) + ".csv");

    std::printf("episodes=%d success=%.2f collision=%.2f goal_missing=%.2f avg_time=%.1f\n",
                report.n_episodes, report.success_rate, report.collision_rate,
                report.goal_missing_rate, report.average_time_to_goal);
    return 0;
}

int cmd_pipeline(config::RunConfig cfg, std::uint64_t seed, const std::string& out_dir,
                 bool resume) {
    fs::create_directories(out_dir);
    const auto table = actions::build_action_table(cfg.scenario.preferred_speed);
    const auto exists = [&](const std::string& name) {
        return resume && fs::exists(out_dir + "/" + name);
    };

    // stage 1: ORCA demonstrations
    const std::string orca_demos_path = out_dir + "/demos_orca.jsonl";
    if (!exists("demos_orca.jsonl")) {
        sim::ScenarioConfig sc = cfg.scenario;
        sc.rng_seed = seed;
        dvl::DemoStats stats;
        const auto demos = dvl::collect_demonstrations(
            orca::make_policy(orca::OrcaParams{}, sc.dt), sc,
            cfg.a2c.imitation.demo_episodes, table, cfg.a2c.gamma, &stats);
        dvl::save_demos(demos, orca_demos_path);
        std::cout << "stage demos-orca: kept " << stats.kept_episodes << "/"
                  << stats.total_episodes << "\n";
    } else {
        std::cout << "stage demos-orca: skipped (artifact present)\n";
    }

    // stage 2: DVL pretrain + DVL demonstrations
    std::string imitation_demos_path = orca_demos_path;
    const std::string dvl_ckpt = out_dir + "/dvl_final.json";
    if (!cfg.skip_dvl) {
        if (!exists("dvl_final.json")) {
            auto demos = dvl::load_demos(orca_demos_path);
            sim::ScenarioConfig sc = cfg.scenario;
            sc.rng_seed = seed + 10000000ULL;
            dvl::DvlConfig dcfg = cfg.dvl;
            dcfg.rng_seed = seed + 10000000ULL;
            const auto result = dvl::train_dvl(dcfg, sc, &demos);
            net::save_checkpoint(result.params, dvl_ckpt);
            write_dvl_curve_csv(result.reward_curve, out_dir + "/dvl_curve.csv");
            std::cout << "stage dvl-train: " << result.reward_curve.size() << " episodes\n";
        } else {
            std::cout << "stage dvl-train: skipped (artifact present)\n";
        }
        imitation_demos_path = out_dir + "/demos_dvl.jsonl";
        if (!exists("demos_dvl.jsonl")) {
            sim::ScenarioConfig sc = cfg.scenario;
            sc.rng_seed = seed + 15000000ULL;
            auto params = net::load_checkpoint(dvl_ckpt);
            dvl::DemoStats stats;
            const auto demos = dvl::collect_demonstrations(
                dvl_lookahead_policy(std::move(params), sc, cfg.a2c.gamma), sc,
                cfg.a2c.imitation.demo_episodes, table, cfg.a2c.gamma, &stats);
            dvl::save_demos(demos, imitation_demos_path);
            std::cout << "stage demos-dvl: kept " << stats.kept_episodes << "/"
                      << stats.total_episodes << "\n";
        } else {
            std::cout << "stage demos-dvl: skipped (artifact present)\n";
        }
    }

    // stage 3: A2CMP training
    const std::string a2cmp_ckpt = out_dir + "/a2cmp_final.json";
    if (!exists("a2cmp_final.json")) {
        auto demos = dvl::load_demos(imitation_demos_path);
        sim::ScenarioConfig sc = cfg.scenario;
        sc.rng_seed = seed + 20000000ULL;
        a2cmp::A2cmpConfig acfg = cfg.a2c;
        acfg.rng_seed = seed + 20000000ULL;
        acfg.checkpoint_dir = out_dir;
        const auto result = a2cmp::train_a2cmp(acfg, sc, &demos);
        net::save_checkpoint(result.params, a2cmp_ckpt);
        a2cmp::write_curve_csv(result, out_dir + "/a2cmp_curve.csv");
        std::cout << "stage a2cmp-train: " << result.curve.size() << " episodes\n";
    } else {
        std::cout << "stage a2cmp-train: skipped (artifact present)\n";
    }

    // stage 4: evaluation + comparison table
    std::vector<std::pair<std::string, eval::EvalReport>> reports;
    const std::uint64_t eval_seed = seed + 30000000ULL;
    reports.emplace_back("ORCA",
                         eval::evaluate_policy(orca::make_policy(orca::OrcaParams{},
                                                                 cfg.scenario.dt),
                                               cfg.scenario, cfg.eval_episodes, eval_seed));
    if (!cfg.skip_dvl) {
        auto params = net::load_checkpoint(dvl_ckpt);
        reports.emplace_back(
            "DVL", eval::evaluate_policy(
                       dvl_lookahead_policy(std::move(params), cfg.scenario, cfg.a2c.gamma),
                       cfg.scenario, cfg.eval_episodes, eval_seed));
    }
    const auto a2cmp_params = net::load_checkpoint(a2cmp_ckpt);
    reports.emplace_back("A2CMP",
                         eval::evaluate_policy(policies::greedy_actor(a2cmp_params, table),
                                               cfg.scenario, cfg.eval_episodes, eval_seed));
    eval::compare_algorithms(reports, out_dir + "/comparison.csv");
    for (const auto& [name, r] : reports)
        std::printf("%-6s success=%.2f collision=%.2f goal_missing=%.2f avg_time=%.1f\n",
                    name.c_str(), r.success_rate, r.collision_rate, r.goal_missing_rate,
                    r.average_time_to_goal);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Circle-crossing crowd navigation: ORCA, deep V-learning and "
                 "actor-critic training"};
    app.require_subcommand(1);

    std::string config_path, policy_spec = "orca", demos_path, out_path, out_dir = "out",
                algo = "a2cmp";
    int episodes = 100, export_traj = 0;
    std::uint64_t seed = 0;
    bool no_imitation = false, resume = false;

    auto* collect = app.add_subcommand("collect-demos", "collect demonstration episodes");
    collect->add_option("--policy", policy_spec, "orca | dvl:<checkpoint>");
    collect->add_option("--episodes", episodes, "episodes to run")->required();
    collect->add_option("--out", out_path, "output JSONL file")->required();
    collect->add_option("--seed", seed, "RNG seed");
    collect->add_option("--config", config_path, "config file");

    auto* train = app.add_subcommand("train", "train dvl or a2cmp");
    train->add_option("--algo", algo, "dvl | a2cmp")
        ->check(CLI::IsMember({"dvl", "a2cmp"}));
    train->add_option("--config", config_path, "config file");
    train->add_option("--demos", demos_path, "demonstration JSONL file");
    train->add_option("--out-dir", out_dir, "output directory");
    train->add_flag("--no-imitation", no_imitation, "skip imitation initialization");
    train->add_option("--seed", seed, "RNG seed");

    auto* evaluate = app.add_subcommand("evaluate", "fixed-endpoint evaluation");
    evaluate->add_option("--policy", policy_spec, "orca | dvl:<checkpoint> | <checkpoint>");
    evaluate->add_option("--episodes", episodes, "evaluation episodes");
    evaluate->add_option("--seed", seed, "RNG seed");
    evaluate->add_option("--out-dir", out_dir, "output directory");
    evaluate->add_option("--export-traj", export_traj, "export first N episode trajectories");
    evaluate->add_option("--config", config_path, "config file");

    auto* pipeline = app.add_subcommand("pipeline",
                                        "demos -> dvl -> demos -> a2cmp -> evaluation");
    pipeline->add_option("--config", config_path, "config file");
    pipeline->add_option("--seed", seed, "RNG seed");
    pipeline->add_option("--out-dir", out_dir, "output directory");
    pipeline->add_flag("--resume", resume, "skip stages whose artifacts already exist");

    CLI11_PARSE(app, argc, argv);

    try {
        config::RunConfig cfg;
        if (!config_path.empty()) cfg = config::load_config(config_path);
        if (collect->parsed())
            return cmd_collect_demos(policy_spec, episodes, out_path, seed, cfg);
        if (train->parsed())
            return cmd_train(algo, cfg, demos_path, out_dir, no_imitation, seed);
        if (evaluate->parsed())
            return cmd_evaluate(policy_spec, episodes, seed, out_dir, export_traj, cfg);
        if (pipeline->parsed()) return cmd_pipeline(cfg, seed, out_dir, resume);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
