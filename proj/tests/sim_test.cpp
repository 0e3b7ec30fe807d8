#include <doctest.h>

#include <cmath>

#include "crowdnav/policies.hpp"
#include "crowdnav/sim.hpp"

using namespace crowdnav;
using namespace crowdnav::sim;

namespace {

ScenarioConfig default_cfg(std::uint64_t seed = 0) {
    ScenarioConfig cfg;
    cfg.rng_seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("generate_scenario fixed endpoints") {
    const auto sc = generate_scenario(default_cfg(), true);
    CHECK(sc.robot.position == Vec2{-4.0, 0.0});
    CHECK(sc.robot.goal == Vec2{4.0, 0.0});
    CHECK(sc.obstacles.size() == 5);
}

TEST_CASE("generate_scenario zero obstacles") {
    auto cfg = default_cfg();
    cfg.n_obstacles = 0;
    const auto sc = generate_scenario(cfg, true);
    CHECK(sc.obstacles.empty());
}

TEST_CASE("generate_scenario deterministic for fixed seed") {
    const auto a = generate_scenario(default_cfg(7), false);
    const auto b = generate_scenario(default_cfg(7), false);
    CHECK(a.robot.position == b.robot.position);
    CHECK(a.robot.goal == b.robot.goal);
    REQUIRE(a.obstacles.size() == b.obstacles.size());
    for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
        CHECK(a.obstacles[i].position == b.obstacles[i].position);
        CHECK(a.obstacles[i].goal == b.obstacles[i].goal);
        CHECK(a.obstacles[i].radius == b.obstacles[i].radius);
    }
}

TEST_CASE("generate_scenario: shared obstacle radius, no initial overlap") {
    const auto sc = generate_scenario(default_cfg(3), true);
    for (const auto& ob : sc.obstacles) CHECK(ob.radius == sc.obstacles[0].radius);
    for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
        CHECK(separation_distance(sc.robot, sc.obstacles[i]) >= 0.1 - 1e-12);
        for (std::size_t j = i + 1; j < sc.obstacles.size(); ++j)
            CHECK(separation_distance(sc.obstacles[i], sc.obstacles[j]) >= 0.1 - 1e-12);
    }
}

TEST_CASE("generate_scenario rejects overcrowded config") {
    auto cfg = default_cfg();
    cfg.circle_radius = 1.1;
    cfg.radius_min = cfg.radius_max = 0.5;
    cfg.n_obstacles = 40;
    CHECK_THROWS_AS(generate_scenario(cfg, true), ScenarioError);
}

TEST_CASE("integrate_step basics") {
    AgentState a;
    a.position = {0.0, 0.0};
    SUBCASE("advances position and sets velocity") {
        const auto next = integrate_step(a, {1.0, 0.0}, 0.25);
        CHECK(next.position == Vec2{0.25, 0.0});
        CHECK(next.velocity == Vec2{1.0, 0.0});
        CHECK(next.heading == doctest::Approx(0.0));
    }
    SUBCASE("zero action keeps position and heading") {
        a.heading = 1.5;
        const auto next = integrate_step(a, {0.0, 0.0}, 0.25);
        CHECK(next.position == a.position);
        CHECK(next.heading == 1.5);
    }
    SUBCASE("goal, radius, preferred_speed untouched") {
        a.goal = {3.0, 4.0};
        const auto next = integrate_step(a, {0.5, 0.5}, 0.25);
        CHECK(next.goal == a.goal);
        CHECK(next.radius == a.radius);
        CHECK(next.preferred_speed == a.preferred_speed);
    }
}

TEST_CASE("integrate_step repeated crossing matches closed form") {
    AgentState a;
    a.position = {-4.0, 0.0};
    for (int i = 0; i < 32; ++i) a = integrate_step(a, {1.0, 0.0}, 0.25);
    // oracle: p0 + n*dt*v
    CHECK(a.position.x == doctest::Approx(-4.0 + 32 * 0.25 * 1.0));
    CHECK(a.position.y == doctest::Approx(0.0));
}

TEST_CASE("separation_distance") {
    AgentState a, b;
    a.radius = b.radius = 0.3;
    b.position = {1.0, 0.0};
    CHECK(separation_distance(a, b) == doctest::Approx(0.4));
    CHECK(separation_distance(b, a) == doctest::Approx(0.4));
    b.position = {0.0, 0.0};
    CHECK(separation_distance(a, b) == doctest::Approx(-0.6));
    b.position = {0.55, 0.0};
    CHECK(separation_distance(a, b) == doctest::Approx(-0.05));
}

TEST_CASE("compute_reward branch values") {
    CHECK(compute_reward(-0.05, false) == doctest::Approx(-0.25));
    CHECK(compute_reward(-0.05, true) == doctest::Approx(-0.25));
    CHECK(compute_reward(0.1, false) == doctest::Approx(-0.15));
    CHECK(compute_reward(0.5, true) == doctest::Approx(1.0));
    CHECK(compute_reward(0.5, false) == doctest::Approx(0.0));
}

TEST_CASE("compute_reward proximity sign switch") {
    CHECK(compute_reward(0.1, false, +1.0) == doctest::Approx(-0.05));
    CHECK(compute_reward(0.1, false, -1.0) == doctest::Approx(-0.15));
}

TEST_CASE("compute_reward: exactly one branch fires across dense d sweep") {
    for (int i = 0; i <= 2000; ++i) {
        const double d = -1.0 + i * 0.001;
        for (const bool at_goal : {false, true}) {
            const double r = compute_reward(d, at_goal);
            int fired = 0;
            if (d < 0.0) {
                ++fired;
                CHECK(r == -0.25);
            } else if (d < 0.2) {
                ++fired;
                CHECK(r == doctest::Approx(-0.1 - d / 2.0));
            } else if (at_goal) {
                ++fired;
                CHECK(r == 1.0);
            } else {
                ++fired;
                CHECK(r == 0.0);
            }
            CHECK(fired == 1);
        }
    }
}

TEST_CASE("classify_step") {
    ScenarioConfig cfg = default_cfg();
    AgentState robot;
    robot.radius = 0.3;
    robot.goal = {4.0, 0.0};

    SUBCASE("reached goal") {
        robot.position = {4.0, 0.0};
        const auto out = classify_step(robot, {}, 5.0, cfg);
        CHECK(out.classification == Outcome::ReachedGoal);
        CHECK(out.reward == 1.0);
    }
    SUBCASE("timeout") {
        robot.position = {0.0, 0.0};
        const auto out = classify_step(robot, {}, 25.0, cfg);
        CHECK(out.classification == Outcome::Timeout);
        CHECK(out.reward == 0.0);
    }
    SUBCASE("collision dominates timeout") {
        robot.position = {0.0, 0.0};
        AgentState ob;
        ob.position = {0.55, 0.0};
        ob.radius = 0.3;
        const auto out = classify_step(robot, {ob}, 25.0, cfg);
        CHECK(out.classification == Outcome::Collision);
        CHECK(out.reward == doctest::Approx(-0.25));
    }
    SUBCASE("exhaustive precedence truth table") {
        // all combinations of {collision, at_goal, timeout}
        for (const bool collide : {false, true}) {
            for (const bool at_goal : {false, true}) {
                for (const bool timeout : {false, true}) {
                    AgentState r2;
                    r2.radius = 0.3;
                    r2.goal = {4.0, 0.0};
                    r2.position = at_goal ? Vec2{4.0, 0.0} : Vec2{0.0, 0.0};
                    std::vector<AgentState> obs;
                    if (collide) {
                        AgentState ob;
                        ob.radius = 0.3;
                        ob.position = r2.position + Vec2{0.5, 0.0};
                        obs.push_back(ob);
                    }
                    const double elapsed = timeout ? 25.0 : 5.0;
                    const auto out = classify_step(r2, obs, elapsed, cfg);
                    if (collide)
                        CHECK(out.classification == Outcome::Collision);
                    else if (at_goal)
                        CHECK(out.classification == Outcome::ReachedGoal);
                    else if (timeout)
                        CHECK(out.classification == Outcome::Timeout);
                    else
                        CHECK(out.classification == Outcome::Running);
                }
            }
        }
    }
}

TEST_CASE("run_episode straight to goal, no obstacles") {
    ScenarioConfig cfg = default_cfg();
    cfg.n_obstacles = 0;
    const auto rec = run_episode(cfg, policies::straight_to_goal(cfg.dt),
                                 policies::always_stop(), true, true);
    CHECK(rec.final_classification == Outcome::ReachedGoal);
    // 8 m at 1 m/s; the episode ends one step early, inside the goal disc
    CHECK(rec.elapsed == doctest::Approx(7.75));
    CHECK(rec.steps.size() == 31);
}

TEST_CASE("run_episode stationary robot times out") {
    ScenarioConfig cfg = default_cfg();
    cfg.n_obstacles = 0;
    const auto rec = run_episode(cfg, policies::always_stop(), policies::always_stop(), true,
                                 true);
    CHECK(rec.final_classification == Outcome::Timeout);
    CHECK(rec.elapsed == doctest::Approx(25.0));
    CHECK(rec.steps.size() <= static_cast<std::size_t>(std::ceil(cfg.t_max / cfg.dt)) + 1);
}

TEST_CASE("run_episode head-on straight-line agents collide") {
    // robot west->east, one obstacle east->west, both ignoring each other
    ScenarioConfig cfg = default_cfg();
    cfg.n_obstacles = 1;
    cfg.robot_invisible = true;
    Scenario sc;
    sc.robot.position = {-4.0, 0.0};
    sc.robot.goal = {4.0, 0.0};
    sc.robot.radius = 0.3;
    AgentState ob;
    ob.position = {4.0, 0.0};
    ob.goal = {-4.0, 0.0};
    ob.radius = 0.3;
    sc.obstacles.push_back(ob);
    const auto straight = policies::straight_to_goal(cfg.dt);
    const auto rec = run_episode_from(sc, cfg, straight, straight, true);
    CHECK(rec.final_classification == Outcome::Collision);
    // closed-form: gap 8 - 0.6 closes at 2 m/s -> collision strictly after 3.7 s
    CHECK(rec.elapsed >= 3.7);
    CHECK(rec.elapsed < 25.0);
}

TEST_CASE("run_episode rejects contract-violating policies") {
    ScenarioConfig cfg = default_cfg();
    cfg.n_obstacles = 0;
    const auto too_fast = [](const AgentState& a, const std::vector<AgentState>&) -> Vec2 {
        return {a.preferred_speed * 2.0, 0.0};
    };
    CHECK_THROWS_AS(run_episode(cfg, too_fast, policies::always_stop(), false, true),
                    PolicyContractError);
    const auto non_finite = [](const AgentState&, const std::vector<AgentState>&) -> Vec2 {
        return {std::nan(""), 0.0};
    };
    CHECK_THROWS_AS(run_episode(cfg, non_finite, policies::always_stop(), false, true),
                    PolicyContractError);
}

TEST_CASE("run_episode determinism and kinematic consistency") {
    ScenarioConfig cfg = default_cfg(11);
    const auto policy = policies::straight_to_goal(cfg.dt);
    const auto a = run_episode(cfg, policy, policy, true);
    const auto b = run_episode(cfg, policy, policy, true);
    REQUIRE(a.steps.size() == b.steps.size());
    CHECK(a.final_classification == b.final_classification);
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].state.robot.position == b.steps[i].state.robot.position);
        CHECK(a.steps[i].action == b.steps[i].action);
        CHECK(a.steps[i].reward == b.steps[i].reward);
    }
    // p_{t+1} - p_t = dt * a_t up to rounding, and timestamps increase by dt
    for (std::size_t i = 0; i + 1 < a.steps.size(); ++i) {
        const Vec2 dp = a.steps[i + 1].state.robot.position - a.steps[i].state.robot.position;
        CHECK(dp.x == doctest::Approx(a.steps[i].action.x * cfg.dt).epsilon(1e-12));
        CHECK(dp.y == doctest::Approx(a.steps[i].action.y * cfg.dt).epsilon(1e-12));
        CHECK(a.steps[i + 1].time == doctest::Approx(a.steps[i].time + cfg.dt));
    }
}

TEST_CASE("reward-classification coherence over random episodes") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ScenarioConfig cfg = default_cfg(seed);
        const auto policy = policies::straight_to_goal(cfg.dt);
        const auto rec = run_episode(cfg, policy, policy, true);
        const double last = rec.steps.back().reward;
        if (rec.final_classification == Outcome::Collision) CHECK(last == doctest::Approx(-0.25));
        if (last == 1.0) CHECK(rec.final_classification == Outcome::ReachedGoal);
    }
}

TEST_CASE("joint state flattening layout") {
    JointState s;
    s.robot.position = {1, 2};
    s.robot.velocity = {3, 4};
    s.robot.radius = 5;
    s.robot.goal = {6, 7};
    s.robot.preferred_speed = 8;
    s.robot.heading = 9;
    AgentState ob;
    ob.position = {10, 11};
    ob.velocity = {12, 13};
    ob.radius = 14;
    s.obstacles.push_back(ob);
    const auto flat = s.flatten();
    REQUIRE(flat.size() == 14);
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == doctest::Approx(i + 1));
}
