#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "crowdnav/vec2.hpp"

namespace crowdnav::actions {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownActionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 16 world-frame directions x 5 speeds plus the stop action.
// Index 0 is stop; direction i in 1..16 and speed j in 1..5 map to
// index 1 + (i-1)*5 + (j-1). This layout is part of the checkpoint format.
struct ActionTable {
    std::vector<Vec2> actions;
    double v_pref = 1.0;

    static constexpr std::size_t kSize = 81;
    static constexpr const char* kLayout = "stop_first_16dir_x_5speed";

    std::size_t size() const { return actions.size(); }
    const Vec2& velocity_of(std::size_t index) const { return actions.at(index); }
};

ActionTable build_action_table(double v_pref);

std::size_t label_of(const ActionTable& table, const Vec2& action);

std::size_t snap_to_grid(const ActionTable& table, const Vec2& velocity);

}  // namespace crowdnav::actions
