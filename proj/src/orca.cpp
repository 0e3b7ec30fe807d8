#include "crowdnav/orca.hpp"

#include <algorithm>
#include <cmath>

namespace crowdnav::orca {

namespace {

constexpr double kEps = 1e-10;

// 1D program along the boundary of constraint `line_no`, restricted to the
// speed disc and the constraints before it. Returns false when empty.
bool solve_on_line(const std::vector<HalfPlane>& lines, std::size_t line_no, double radius,
                   const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
    const HalfPlane& line = lines[line_no];
    const double dot = line.point.dot(line.direction);
    const double discriminant = dot * dot + radius * radius - line.point.norm_sq();
    if (discriminant < 0.0) return false;  // line misses the disc

    const double sqrt_disc = std::sqrt(discriminant);
    double t_left = -dot - sqrt_disc;
    double t_right = -dot + sqrt_disc;

    for (std::size_t i = 0; i < line_no; ++i) {
        const double denominator = line.direction.det(lines[i].direction);
        const double numerator = lines[i].direction.det(line.point - lines[i].point);
        if (std::abs(denominator) <= kEps) {
            if (numerator < 0.0) return false;  // parallel and fully excluded
            continue;
        }
        const double t = numerator / denominator;
        if (denominator >= 0.0)
            t_right = std::min(t_right, t);
        else
            t_left = std::max(t_left, t);
        if (t_left > t_right) return false;
    }

    if (direction_opt) {
        // optimize direction: opt_velocity is a unit vector
        result = line.point +
                 (opt_velocity.dot(line.direction) > 0.0 ? t_right : t_left) * line.direction;
    } else {
        const double t = line.direction.dot(opt_velocity - line.point);
        result = line.point + std::clamp(t, t_left, t_right) * line.direction;
    }
    return true;
}

// Sequential 2D program; returns the index of the first failing constraint,
// or lines.size() on success.
std::size_t solve_in_plane(const std::vector<HalfPlane>& lines, double radius,
                           const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
    if (direction_opt) {
        result = opt_velocity * radius;
    } else if (opt_velocity.norm_sq() > radius * radius) {
        result = opt_velocity.normalized() * radius;
    } else {
        result = opt_velocity;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].violation(result) > 0.0) {
            const Vec2 saved = result;
            if (!solve_on_line(lines, i, radius, opt_velocity, direction_opt, result)) {
                result = saved;
                return i;
            }
        }
    }
    return lines.size();
}

// Infeasible fallback: minimize the largest violation over all constraints,
// restricted to the disc, starting from the first failing constraint.
void solve_minimax(const std::vector<HalfPlane>& lines, std::size_t begin_line, double radius,
                   Vec2& result) {
    double distance = 0.0;
    for (std::size_t i = begin_line; i < lines.size(); ++i) {
        if (lines[i].violation(result) <= distance) continue;

        std::vector<HalfPlane> proj_lines;
        proj_lines.reserve(i);
        for (std::size_t j = 0; j < i; ++j) {
            HalfPlane new_line;
            const double determinant = lines[i].direction.det(lines[j].direction);
            if (std::abs(determinant) <= kEps) {
                if (lines[i].direction.dot(lines[j].direction) > 0.0) continue;
                new_line.point = (lines[i].point + lines[j].point) * 0.5;
            } else {
                new_line.point =
                    lines[i].point +
                    (lines[j].direction.det(lines[i].point - lines[j].point) / determinant) *
                        lines[i].direction;
            }
            new_line.direction = (lines[j].direction - lines[i].direction).normalized();
            proj_lines.push_back(new_line);
        }

        const Vec2 saved = result;
        if (solve_in_plane(proj_lines, radius,
                           Vec2{-lines[i].direction.y, lines[i].direction.x}, true,
                           result) < proj_lines.size()) {
            result = saved;
        }
        distance = lines[i].violation(result);
    }
}

}  // namespace

Vec2 solve_velocity_program(const std::vector<HalfPlane>& half_planes, double max_speed,
                            const Vec2& preferred) {
    Vec2 result;
    const std::size_t fail = solve_in_plane(half_planes, max_speed, preferred, false, result);
    if (fail < half_planes.size()) solve_minimax(half_planes, fail, max_speed, result);
    return result;
}

std::vector<HalfPlane> build_half_planes(const sim::AgentState& self,
                                         const std::vector<sim::AgentState>& neighbors,
                                         const OrcaParams& params, double dt) {
    const double inv_horizon = 1.0 / params.time_horizon;
    std::vector<HalfPlane> lines;
    lines.reserve(neighbors.size());

    for (const auto& other : neighbors) {
        const Vec2 relative_position = other.position - self.position;
        if (relative_position.norm() > params.neighbor_dist) continue;
        const Vec2 relative_velocity = self.velocity - other.velocity;
        const double dist_sq = relative_position.norm_sq();
        const double combined_radius = self.radius + other.radius + params.safety_margin;
        const double combined_radius_sq = combined_radius * combined_radius;

        HalfPlane line;
        Vec2 u;

        if (dist_sq > combined_radius_sq) {
            // w is the relative velocity measured from the cut-off center
            const Vec2 w = relative_velocity - inv_horizon * relative_position;
            const double w_len_sq = w.norm_sq();
            const double dot1 = w.dot(relative_position);

            if (dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_len_sq) {
                // project on the cut-off circle
                const double w_len = std::sqrt(w_len_sq);
                const Vec2 unit_w = w / w_len;
                line.direction = {unit_w.y, -unit_w.x};
                u = (combined_radius * inv_horizon - w_len) * unit_w;
            } else {
                // project on a leg of the velocity obstacle cone
                const double leg = std::sqrt(dist_sq - combined_radius_sq);
                if (relative_position.det(w) > 0.0) {
                    line.direction = Vec2{relative_position.x * leg - relative_position.y * combined_radius,
                                          relative_position.x * combined_radius + relative_position.y * leg} /
                                     dist_sq;
                } else {
                    line.direction = -Vec2{relative_position.x * leg + relative_position.y * combined_radius,
                                           -relative_position.x * combined_radius + relative_position.y * leg} /
                                     dist_sq;
                }
                u = relative_velocity.dot(line.direction) * line.direction - relative_velocity;
            }
        } else {
            // already colliding: escape over a single timestep
            const double inv_time_step = 1.0 / dt;
            const Vec2 w = relative_velocity - inv_time_step * relative_position;
            double w_len = w.norm();
            Vec2 unit_w = w_len > kEps ? w / w_len : (-relative_position).normalized();
            if (w_len <= kEps) w_len = 0.0;
            line.direction = {unit_w.y, -unit_w.x};
            u = (combined_radius * inv_time_step - w_len) * unit_w;
        }

        line.point = self.velocity + params.reciprocity * u;
        lines.push_back(line);
    }
    return lines;
}

Vec2 compute_orca_velocity(const sim::AgentState& self,
                           const std::vector<sim::AgentState>& neighbors,
                           const OrcaParams& params, double dt) {
    const Vec2 to_goal = self.goal - self.position;
    const double dist = to_goal.norm();
    const double speed = std::min(self.preferred_speed, dist / dt);
    const Vec2 preferred = dist > kEps ? to_goal / dist * speed : Vec2{0.0, 0.0};

    const auto lines = build_half_planes(self, neighbors, params, dt);
    return solve_velocity_program(lines, params.max_speed, preferred);
}

sim::Policy make_policy(const OrcaParams& params, double dt) {
    return [params, dt](const sim::AgentState& self,
                        const std::vector<sim::AgentState>& others) -> Vec2 {
        OrcaParams p = params;
        p.max_speed = self.preferred_speed;
        return compute_orca_velocity(self, others, p, dt);
    };
}

}  // namespace crowdnav::orca
