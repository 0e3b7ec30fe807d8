#include <doctest.h>

#include <cmath>
#include <set>

#include "crowdnav/actions.hpp"

using namespace crowdnav;
using namespace crowdnav::actions;

TEST_CASE("build_action_table layout") {
    const auto table = build_action_table(1.0);
    REQUIRE(table.size() == 81);
    CHECK(table.velocity_of(0) == Vec2{0.0, 0.0});

    // i=16, j=5 -> full circle angle, full speed
    const auto full_east = table.velocity_of(1 + 15 * 5 + 4);
    CHECK(full_east.x == doctest::Approx(1.0));
    CHECK(full_east.y == doctest::Approx(0.0).epsilon(1e-9));

    // i=4, j=5 -> pi/2
    const auto north = table.velocity_of(1 + 3 * 5 + 4);
    CHECK(north.x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(north.y == doctest::Approx(1.0));

    // i=8, j=1 -> pi at a fifth of v_pref
    const auto slow_west = table.velocity_of(1 + 7 * 5 + 0);
    CHECK(slow_west.x == doctest::Approx(-0.2));
    CHECK(slow_west.y == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("all entries distinct, norms bounded") {
    const auto table = build_action_table(1.3);
    std::set<std::pair<double, double>> seen;
    for (const auto& a : table.actions) {
        CHECK(a.norm() <= 1.3 + 1e-9);
        seen.insert({a.x, a.y});
    }
    CHECK(seen.size() == 81);
}

TEST_CASE("build_action_table rejects non-positive v_pref") {
    CHECK_THROWS_AS(build_action_table(0.0), ConfigError);
    CHECK_THROWS_AS(build_action_table(-1.0), ConfigError);
}

TEST_CASE("label_of round trip and errors") {
    const auto table = build_action_table(1.0);
    CHECK(label_of(table, {0.0, 0.0}) == 0);
    for (std::size_t k = 0; k < table.size(); ++k)
        CHECK(label_of(table, table.velocity_of(k)) == k);
    CHECK_THROWS_AS(label_of(table, {0.7, 0.7}), UnknownActionError);
}

TEST_CASE("snap_to_grid") {
    const auto table = build_action_table(1.0);
    SUBCASE("exact grid point") {
        CHECK(snap_to_grid(table, {1.0, 0.0}) == label_of(table, {1.0, 0.0}));
    }
    SUBCASE("small velocity snaps to stop") {
        CHECK(snap_to_grid(table, {0.05, 0.0}) == 0);
    }
    SUBCASE("matches brute force on off-grid input") {
        const Vec2 v{0.7, 0.7};
        std::size_t best = 0;
        double best_d = 1e100;
        for (std::size_t k = 0; k < table.size(); ++k) {
            const double d = (table.velocity_of(k) - v).norm();
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        CHECK(snap_to_grid(table, v) == best);
        // expected cell: direction i=2 (angle pi/4), full speed
        CHECK(best == 1 + 1 * 5 + 4);
    }
    SUBCASE("idempotent on grid points") {
        for (std::size_t k = 0; k < table.size(); ++k)
            CHECK(snap_to_grid(table, table.velocity_of(snap_to_grid(table, table.velocity_of(k)))) ==
                  snap_to_grid(table, table.velocity_of(k)));
    }
}
