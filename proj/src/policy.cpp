#include "asim/policy.hpp"

#include <cmath>
#include <limits>

#include "asim/error.hpp"
#include "asim/navgrid.hpp"

namespace asim {

namespace {

bool line_of_sight(const BuildingLayout& layout, Vec2 from, Vec2 to) {
    for (const WallSegment& w : layout.collision_walls()) {
        if (segments_intersect(from, to, w.a, w.b)) return false;
    }
    return true;
}

}  // namespace

void GreedySearchPolicy::ensure_grid(const ShooterEnv& env) {
    if (!visited_.empty()) return;
    const Rect& bounds = env.layout().bounds();
    origin_ = bounds.min;
    nx_ = static_cast<int>(std::ceil(bounds.width() / kCoarseCell));
    ny_ = static_cast<int>(std::ceil(bounds.height() / kCoarseCell));
    visited_.assign(static_cast<size_t>(nx_) * ny_, 0);
}

std::optional<Vec2> GreedySearchPolicy::visible_target(const ShooterEnv& env) const {
    const double range = env.config().ray_range;
    std::optional<Vec2> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const OccupantState& occ : env.occupants()) {
        if (!occ.live_target()) continue;
        const double d = distance(occ.pos, env.shooter().pos);
        if (d >= best_d || d > range) continue;
        if (line_of_sight(env.layout(), env.shooter().pos, occ.pos)) {
            best = occ.pos;
            best_d = d;
        }
    }
    return best;
}

Vec2 GreedySearchPolicy::exploration_waypoint(const ShooterEnv& env) {
    const Vec2 pos = env.shooter().pos;
    const NavGrid& nav = env.layout().nav();

    auto cell_of = [&](Vec2 p) {
        const int cx = std::clamp(static_cast<int>((p.x - origin_.x) / kCoarseCell), 0, nx_ - 1);
        const int cy = std::clamp(static_cast<int>((p.y - origin_.y) / kCoarseCell), 0, ny_ - 1);
        return cy * nx_ + cx;
    };
    auto center_of = [&](int cell) {
        return Vec2{origin_.x + (cell % nx_ + 0.5) * kCoarseCell,
                    origin_.y + (cell / nx_ + 0.5) * kCoarseCell};
    };
    // A coarse cell's representative point is the nav snap of its center; the
    // snap also decides reachability.
    auto goal_point = [&](int cell) -> std::optional<Vec2> {
        const auto snapped = nav.snap(center_of(cell));
        if (!snapped) return std::nullopt;
        return nav.cell_center(*snapped);
    };

    visited_[cell_of(pos)] = 1;
    if (sweep_goal_ && (visited_[*sweep_goal_] || cell_of(pos) == *sweep_goal_)) {
        sweep_goal_.reset();
    }
    for (int attempts = 0; attempts < 2 && !sweep_goal_; ++attempts) {
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < nx_ * ny_; ++c) {
            if (visited_[c]) continue;
            const auto gp = goal_point(c);
            if (!gp) {
                visited_[c] = 1;  // nothing walkable near this cell; skip forever
                continue;
            }
            const auto d = nav.distance_via_field(nav.field_to(*gp), pos);
            if (!d) {
                visited_[c] = 1;  // unreachable from here
                continue;
            }
            if (*d < best_d) {
                best_d = *d;
                sweep_goal_ = c;
            }
        }
        if (!sweep_goal_) {
            std::fill(visited_.begin(), visited_.end(), uint8_t{0});  // swept everything: restart
            visited_[cell_of(pos)] = 1;
        }
    }
    if (!sweep_goal_) return pos;  // nowhere to go; stand still

    const auto gp = goal_point(*sweep_goal_);
    const auto path = nav.path_from(pos, nav.field_to(*gp));
    for (const Vec2& wp : path) {
        if (distance(wp, pos) > 0.3) return wp;
    }
    visited_[*sweep_goal_] = 1;
    sweep_goal_.reset();
    return pos;
}

Vec2 GreedySearchPolicy::steer(const ShooterEnv& env, Vec2 desired) const {
    if (desired.norm() < 1e-9) return {0.0, 0.0};
    const Vec2 pos = env.shooter().pos;
    const double step_len = env.config().shooter_speed * env.config().dt;
    const double r = env.config().shooter_radius;
    const double exterior_clear = r + 0.25;
    const double interior_clear = r + 0.05;

    const double base = std::atan2(desired.y, desired.x);
    constexpr double kOffsets[] = {0.0,   22.5,  -22.5, 45.0,  -45.0, 67.5,  -67.5, 90.0,
                                   -90.0, 112.5, -112.5, 135.0, -135.0, 157.5, -157.5, 180.0};
    double best_score = -std::numeric_limits<double>::infinity();
    Vec2 best_dir{0.0, 0.0};
    for (double off_deg : kOffsets) {
        const Vec2 dir = from_angle(base + off_deg * M_PI / 180.0);
        const Vec2 next = pos + dir * step_len;
        bool exterior_risk = false;
        bool interior_risk = false;
        for (const WallSegment& w : env.layout().collision_walls()) {
            const double d = point_segment_distance(next, w.a, w.b);
            if (w.kind == WallKind::Exterior) {
                exterior_risk |= d < exterior_clear;
            } else {
                interior_risk |= d < interior_clear;
            }
        }
        for (const WallSegment& p : env.layout().open_portals()) {
            interior_risk |= point_segment_distance(next, p.a, p.b) < interior_clear;
        }
        if (exterior_risk) continue;
        const double score = std::cos(off_deg * M_PI / 180.0) - (interior_risk ? 1.5 : 0.0);
        if (score > best_score) {
            best_score = score;
            best_dir = dir;
        }
    }
    return best_dir;  // zero when every direction runs into exterior wall
}

Vec2 GreedySearchPolicy::act(const ShooterEnv& env) {
    ensure_grid(env);
    Vec2 goal;
    if (const auto target = visible_target(env)) {
        goal = *target;
    } else {
        goal = exploration_waypoint(env);
    }
    return steer(env, goal - env.shooter().pos);
}

NetworkPolicy::NetworkPolicy(rl::Checkpoint checkpoint) : ckpt_(std::move(checkpoint)) {
    if (ckpt_.params.obs_dim() != kObsDim) {
        throw validation_error("checkpoint expects " + std::to_string(ckpt_.params.obs_dim()) +
                               "-dim observations, this environment produces " +
                               std::to_string(kObsDim));
    }
    if (ckpt_.params.act_dim() != kActDim) {
        throw validation_error("checkpoint action dimension mismatch");
    }
}

Vec2 NetworkPolicy::act(const ShooterEnv& env) {
    const Observation obs = env.observe();
    rl::Vector x(kObsDim);
    for (int i = 0; i < kObsDim; ++i) x(i) = obs[i];
    const rl::NetOutput out = rl::forward(ckpt_.params, ckpt_.normalizer.apply(x));
    Vec2 a{out.mean(0), out.mean(1)};
    if (a.norm() > 1.0) a = a.normalized();
    return a;
}

}  // namespace asim
