#include "crowdnav/actions.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace crowdnav::actions {

ActionTable build_action_table(double v_pref) {
    if (v_pref <= 0.0) throw ConfigError("v_pref must be positive");
    ActionTable table;
    table.v_pref = v_pref;
    table.actions.reserve(ActionTable::kSize);
    table.actions.push_back({0.0, 0.0});
    for (int i = 1; i <= 16; ++i) {
        const double angle = static_cast<double>(i) / 16.0 * 2.0 * M_PI;
        for (int j = 1; j <= 5; ++j) {
            const double speed = static_cast<double>(j) / 5.0 * v_pref;
            table.actions.push_back({speed * std::cos(angle), speed * std::sin(angle)});
        }
    }
    return table;
}

std::size_t label_of(const ActionTable& table, const Vec2& action) {
    for (std::size_t k = 0; k < table.actions.size(); ++k) {
        if ((table.actions[k] - action).norm() <= 1e-6) return k;
    }
    throw UnknownActionError("velocity (" + std::to_string(action.x) + ", " +
                             std::to_string(action.y) + ") is not on the action grid");
}

std::size_t snap_to_grid(const ActionTable& table, const Vec2& velocity) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < table.actions.size(); ++k) {
        const double dist = (table.actions[k] - velocity).norm();
        if (dist < best_dist) {  // ties keep the lowest index
            best_dist = dist;
            best = k;
        }
    }
    return best;
}

}  // namespace crowdnav::actions
