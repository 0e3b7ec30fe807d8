#pragma once

#include <vector>

#include "crowdnav/sim.hpp"
#include "crowdnav/vec2.hpp"

namespace crowdnav::orca {

// Directed line in velocity space; the permitted region is its left side.
struct HalfPlane {
    Vec2 point;
    Vec2 direction;  // unit length

    // signed distance of v outside the half-plane (positive = violating)
    double violation(const Vec2& v) const { return direction.det(point - v); }
};

struct OrcaParams {
    double time_horizon = 5.0;
    double neighbor_dist = 10.0;
    double max_speed = 1.0;
    // fraction of the avoidance effort this agent takes on; 0.5 = equal
    // responsibility between reciprocating agents, 1.0 = full responsibility
    double reciprocity = 0.5;
    // extra radius added to each pairwise constraint; absorbs the tiny
    // penetrations that discrete timesteps allow at grazing contact
    double safety_margin = 0.005;
};

// Nearest-to-preferred point of the intersection of the half-planes with the
// speed disc; falls back to minimizing the largest violation when infeasible.
Vec2 solve_velocity_program(const std::vector<HalfPlane>& half_planes, double max_speed,
                            const Vec2& preferred);

std::vector<HalfPlane> build_half_planes(const sim::AgentState& self,
                                         const std::vector<sim::AgentState>& neighbors,
                                         const OrcaParams& params, double dt);

Vec2 compute_orca_velocity(const sim::AgentState& self,
                           const std::vector<sim::AgentState>& neighbors,
                           const OrcaParams& params, double dt);

// sim_core policy callback running ORCA for every agent
sim::Policy make_policy(const OrcaParams& params, double dt);

}  // namespace crowdnav::orca
