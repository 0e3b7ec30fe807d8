#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>

#include "crowdnav/dvl.hpp"
#include "crowdnav/policies.hpp"

using namespace crowdnav;

TEST_CASE("discount_factor") {
    CHECK(dvl::discount_factor(0.9, 0.25, 1.0) == doctest::Approx(std::pow(0.9, 0.25)));
    CHECK(dvl::discount_factor(0.9, 1.0, 1.0) == doctest::Approx(0.9));
    CHECK(dvl::discount_factor(0.5, 0.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("propagate_joint_state moves robot by action and obstacles by own velocity") {
    sim::JointState s;
    s.robot.position = {1.0, 2.0};
    s.robot.velocity = {0.0, 0.0};
    s.obstacles.resize(1);
    s.obstacles[0].position = {-1.0, 0.0};
    s.obstacles[0].velocity = {2.0, -4.0};

    const auto next = dvl::propagate_joint_state(s, {1.0, 0.0}, 0.25);
    CHECK(next.robot.position.x == doctest::Approx(1.25));
    CHECK(next.robot.position.y == doctest::Approx(2.0));
    CHECK(next.robot.velocity.x == doctest::Approx(1.0));
    CHECK(next.obstacles[0].position.x == doctest::Approx(-0.5));
    CHECK(next.obstacles[0].position.y == doctest::Approx(-1.0));
    // obstacle velocity is the constant-velocity guess, unchanged
    CHECK(next.obstacles[0].velocity.x == doctest::Approx(2.0));
}

TEST_CASE("select_action_dvl matches an exhaustive re-scoring of all actions") {
    const auto table = actions::build_action_table(1.0);
    const auto params = net::init_network(2, 77);
    const double gamma = 0.9, dt = 0.25;

    sim::JointState s;
    s.robot.position = {-2.0, 0.3};
    s.robot.goal = {4.0, 0.0};
    s.robot.preferred_speed = 1.0;
    s.obstacles.resize(2);
    s.obstacles[0].position = {0.0, 0.5};
    s.obstacles[0].velocity = {-0.7, 0.0};
    s.obstacles[0].radius = 0.4;
    s.obstacles[1].position = {1.0, -1.0};
    s.obstacles[1].velocity = {0.1, 0.4};
    s.obstacles[1].radius = 0.35;

    // independent scoring loop
    const double disc = std::pow(gamma, dt * s.robot.preferred_speed);
    std::size_t expect = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < table.size(); ++k) {
        sim::JointState nxt = s;
        nxt.robot = sim::integrate_step(s.robot, table.velocity_of(k), dt);
        for (auto& ob : nxt.obstacles) ob.position = ob.position + ob.velocity * dt;
        double min_sep = std::numeric_limits<double>::infinity();
        for (const auto& ob : nxt.obstacles)
            min_sep = std::min(min_sep, sim::separation_distance(nxt.robot, ob));
        const double r = sim::compute_reward(min_sep, nxt.robot.at_goal());
        const double score = r + disc * net::value_of(params, nxt.flatten());
        if (score > best) {
            best = score;
            expect = k;
        }
    }

    const auto [vel, label] = dvl::select_action_dvl(params, s, table, gamma, dt);
    CHECK(label == expect);
    CHECK(vel.x == table.velocity_of(expect).x);
    CHECK(vel.y == table.velocity_of(expect).y);
}

TEST_CASE("select_action_dvl: identical scores break ties toward the lowest label") {
    // zero network and robot far from goal and obstacles: every action scores 0
    auto params = net::init_network(1, 0);
    for (auto* layer :
         {&params.linear1, &params.linear2, &params.critic_head, &params.actor_head}) {
        std::fill(layer->weights.begin(), layer->weights.end(), 0.0);
        std::fill(layer->biases.begin(), layer->biases.end(), 0.0);
    }
    const auto table = actions::build_action_table(1.0);
    sim::JointState s;
    s.robot.position = {0.0, 0.0};
    s.robot.goal = {100.0, 0.0};
    s.obstacles.resize(1);
    s.obstacles[0].position = {50.0, 50.0};
    const auto [vel, label] = dvl::select_action_dvl(params, s, table, 0.9, 0.25);
    CHECK(label == 0);
    CHECK(vel.norm() == 0.0);
}

TEST_CASE("train_dvl with zero episodes returns the (warm-started) init unchanged after") {
    sim::ScenarioConfig scenario;
    scenario.n_obstacles = 1;
    dvl::DvlConfig cfg;
    cfg.episodes = 0;
    cfg.rng_seed = 4;
    const auto res = dvl::train_dvl(cfg, scenario, nullptr);
    CHECK(res.reward_curve.empty());
    const auto fresh = net::init_network(1, 4);
    CHECK(res.params.linear1.weights == fresh.linear1.weights);
    CHECK(res.params.critic_head.weights == fresh.critic_head.weights);
}

TEST_CASE("train_dvl rejects invalid hyperparameters") {
    sim::ScenarioConfig scenario;
    dvl::DvlConfig cfg;
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(dvl::train_dvl(cfg, scenario, nullptr), std::invalid_argument);
    cfg.gamma = 0.9;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(dvl::train_dvl(cfg, scenario, nullptr), std::invalid_argument);
}

TEST_CASE("train_dvl warm start regresses the critic toward a constant demo target") {
    // gamma = 0 kills the bootstrap; one fixed state labelled 0.7 should pull
    // the critic output at that state toward 0.7
    sim::ScenarioConfig scenario;
    scenario.n_obstacles = 0;
    dvl::DvlConfig cfg;
    cfg.episodes = 0;
    cfg.warmstart_epochs = 200;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 1;
    cfg.rng_seed = 3;

    dvl::DemoMemory demos;
    dvl::DemoRecord d;
    d.state = std::vector<double>(9, 0.2);
    d.value = 0.7;
    demos.push_back(d);

    const auto before = net::value_of(net::init_network(0, 3), demos[0].state);
    const auto res = dvl::train_dvl(cfg, scenario, &demos);
    const auto after = net::value_of(res.params, demos[0].state);
    CHECK(std::abs(after - 0.7) < std::abs(before - 0.7));
    CHECK(std::abs(after - 0.7) < 0.05);
}

TEST_CASE("train_dvl runs a few real episodes and reports one curve point each") {
    sim::ScenarioConfig scenario;
    scenario.n_obstacles = 2;
    scenario.rng_seed = 9;
    dvl::DvlConfig cfg;
    cfg.episodes = 3;
    cfg.batch_size = 8;
    cfg.warmstart_epochs = 0;
    cfg.rng_seed = 9;
    const auto res = dvl::train_dvl(cfg, scenario, nullptr);
    CHECK(res.reward_curve.size() == 3);
    for (const double r : res.reward_curve) CHECK(std::isfinite(r));
    for (const double w : res.params.critic_head.weights) CHECK(std::isfinite(w));
}

TEST_CASE("collect_demonstrations on an empty scene stores straight-line grid labels") {
    sim::ScenarioConfig scenario;
    scenario.n_obstacles = 0;
    scenario.rng_seed = 2;
    const auto table = actions::build_action_table(scenario.preferred_speed);
    dvl::DemoStats stats;
    const auto demos = dvl::collect_demonstrations(policies::straight_to_goal(scenario.dt),
                                                   scenario, 2, table, 0.9, &stats);
    CHECK(stats.kept_episodes == 2);
    CHECK(stats.total_episodes == 2);
    CHECK(!demos.empty());
    for (const auto& d : demos) {
        CHECK(d.state.size() == 9);
        CHECK(d.label < table.size());
        CHECK(std::isfinite(d.value));
    }
    // last step of each episode lands on the goal: its return is the goal reward
    for (std::size_t i = 0; i + 1 < demos.size(); ++i)
        if (demos[i].episode != demos[i + 1].episode)
            CHECK(demos[i].value == doctest::Approx(1.0));
    CHECK(demos.back().value == doctest::Approx(1.0));
    // returns grow toward the goal within an episode
    CHECK(demos.front().value < demos.back().value);
}

TEST_CASE("collect_demonstrations drops failed episodes and errors when none succeed") {
    sim::ScenarioConfig scenario;
    scenario.n_obstacles = 0;
    const auto table = actions::build_action_table(scenario.preferred_speed);

    dvl::DemoStats stats;
    CHECK_THROWS_AS(dvl::collect_demonstrations(policies::always_stop(), scenario, 3, table, 0.9,
                                                &stats),
                    dvl::DemonstratorError);
    CHECK_THROWS_AS(dvl::collect_demonstrations(policies::straight_to_goal(scenario.dt), scenario,
                                                0, table, 0.9, nullptr),
                    dvl::DemonstratorError);
}

TEST_CASE("demo files round trip through JSON lines") {
    dvl::DemoMemory demos;
    for (int i = 0; i < 3; ++i) {
        dvl::DemoRecord d;
        d.state = {0.1 * i, -2.5, 3.0};
        d.label = static_cast<std::size_t>(i * 7);
        d.value = 0.25 * i - 0.3;
        d.episode = i / 2;
        demos.push_back(d);
    }
    const std::string path = "dvl_test_demos.jsonl";
    dvl::save_demos(demos, path);
    const auto loaded = dvl::load_demos(path);
    REQUIRE(loaded.size() == demos.size());
    for (std::size_t i = 0; i < demos.size(); ++i) {
        CHECK(loaded[i].state == demos[i].state);
        CHECK(loaded[i].label == demos[i].label);
        CHECK(loaded[i].value == demos[i].value);
        CHECK(loaded[i].episode == demos[i].episode);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_demos reports the offending line of a malformed file") {
    const std::string path = "dvl_test_bad.jsonl";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f);
        std::fputs("{\"state\": [0.0], \"label\": 0, \"value\": 0.5, \"episode\": 0}\n", f);
        std::fputs("not json\n", f);
        std::fclose(f);
    }
    try {
        dvl::load_demos(path);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::remove(path.c_str());
}
