#pragma once

#include <random>

#include "crowdnav/actions.hpp"
#include "crowdnav/net.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav::policies {

// head straight for the goal at preferred speed, decelerating on final approach
inline sim::Policy straight_to_goal(double dt) {
    return [dt](const sim::AgentState& self, const std::vector<sim::AgentState>&) -> Vec2 {
        const Vec2 to_goal = self.goal - self.position;
        const double dist = to_goal.norm();
        if (dist < 1e-12) return {0.0, 0.0};
        const double speed = std::min(self.preferred_speed, dist / dt);
        return to_goal / dist * speed;
    };
}

inline sim::Policy always_stop() {
    return [](const sim::AgentState&, const std::vector<sim::AgentState>&) -> Vec2 {
        return {0.0, 0.0};
    };
}

inline std::size_t argmax_label(const std::vector<double>& probs) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k)
        if (probs[k] > probs[best]) best = k;
    return best;
}

// argmax over the actor head; used at evaluation time
inline sim::Policy greedy_actor(const net::NetworkParams& params,
                                const actions::ActionTable& table) {
    return [&params, table](const sim::AgentState& self,
                            const std::vector<sim::AgentState>& others) -> Vec2 {
        const sim::JointState state{self, others};
        const auto trace = net::forward(params, state.flatten());
        return table.velocity_of(argmax_label(trace.probs));
    };
}

inline std::size_t sample_label(const std::vector<double>& probs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform01(0.0, 1.0);
    double u = uniform01(rng);
    for (std::size_t k = 0; k < probs.size(); ++k) {
        u -= probs[k];
        if (u <= 0.0) return k;
    }
    return probs.size() - 1;
}

}  // namespace crowdnav::policies
