#include "asim/env.hpp"

#include <algorithm>
#include <cmath>

#include "asim/error.hpp"
#include "asim/navgrid.hpp"

namespace asim {

namespace {
// Contact predicate slop. Must exceed the push-out margin below (1e-6) so a
// shooter resolved out of penetration still registers as touching the wall.
constexpr double kContactEps = 1e-5;
}  // namespace

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::TargetReached: return "target_reached";
        case EventKind::ExteriorWallHit: return "exterior_wall_hit";
        case EventKind::InteriorWallHit: return "interior_wall_hit";
        case EventKind::OccupantEvacuated: return "occupant_evacuated";
        case EventKind::EpisodeEnd: return "episode_end";
    }
    return "?";
}

const char* to_string(EndReason r) {
    switch (r) {
        case EndReason::None: return "none";
        case EndReason::ExteriorWall: return "exterior_wall";
        case EndReason::Timeout: return "timeout";
        case EndReason::AllTerminal: return "all_terminal";
        case EndReason::StepCap: return "step_cap";
    }
    return "?";
}

EndReason end_reason_from_string(const std::string& s) {
    for (EndReason r : {EndReason::None, EndReason::ExteriorWall, EndReason::Timeout,
                        EndReason::AllTerminal, EndReason::StepCap}) {
        if (s == to_string(r)) return r;
    }
    throw parse_error("unknown end reason: " + s);
}

void EnvConfig::validate() const {
    const struct { const char* name; double v; } fields[] = {
        {"dt", dt},
        {"harm_radius", harm_radius},
        {"ray_range", ray_range},
        {"shooter_speed", shooter_speed},
        {"shooter_radius", shooter_radius},
        {"target_radius", target_radius},
        {"freeze_time", freeze_time},
        {"no_target_timeout", no_target_timeout},
        {"max_episode_steps", static_cast<double>(max_episode_steps)},
    };
    for (const auto& f : fields) {
        if (!(f.v > 0.0)) {
            throw validation_error(std::string("env config: ") + f.name + " must be positive");
        }
    }
    if (occupant_count < 0) throw validation_error("env config: occupant_count must be >= 0");
    if (occupant_speed < 0.0) throw validation_error("env config: occupant_speed must be >= 0");
}

ShooterEnv::ShooterEnv(const BuildingLayout& layout, ExitMask scenario, EnvMode mode,
                       EnvConfig cfg)
    // A layout already carrying the mask is copied as-is, sharing its nav grid
    // (and cached distance fields) across the envs of a batch.
    : layout_(scenario == layout.current_mask() ? layout : layout.with_exit_mask(scenario)),
      mode_(mode),
      cfg_(cfg) {
    cfg_.validate();
    if (layout_.open_exit_count() < 1) {
        throw validation_error(
            "scenario closes every exit; an episode needs the entrance plus at least one exit");
    }
}

Observation ShooterEnv::reset(uint64_t episode_seed) {
    Rng spawn_rng(derive_seed(episode_seed, SeedStream::ShooterSpawn, 0));
    Rng occupant_rng(derive_seed(episode_seed, SeedStream::Occupants, 0));

    const NavGrid& grid = layout_.nav();
    if (mode_ == EnvMode::Evaluation) {
        const Rect zone = layout_.spawn_zone().rect();
        shooter_.pos = {spawn_rng.uniform(zone.min.x, zone.max.x),
                        spawn_rng.uniform(zone.min.y, zone.max.y)};
    } else {
        // Training randomizes the start over the whole building; require a
        // clear 3x3 cell neighborhood so episodes do not begin inside a wall.
        const Rect& bounds = layout_.bounds();
        for (;;) {
            const Vec2 p{spawn_rng.uniform(bounds.min.x, bounds.max.x),
                         spawn_rng.uniform(bounds.min.y, bounds.max.y)};
            const int cell = grid.cell_of(p);
            if (cell < 0 || !grid.cell_walkable(cell)) continue;
            const int cx = cell % grid.nx(), cy = cell / grid.nx();
            bool clear = true;
            for (int dy = -1; dy <= 1 && clear; ++dy) {
                for (int dx = -1; dx <= 1 && clear; ++dx) {
                    clear = grid.cell_walkable(cx + dx, cy + dy);
                }
            }
            if (clear) {
                shooter_.pos = p;
                break;
            }
        }
    }
    shooter_.heading = spawn_rng.uniform(0.0, 2.0 * M_PI);
    shooter_.velocity = {0.0, 0.0};
    shooter_.count = 0;

    occupants_ = spawn_occupants(layout_, cfg_.occupant_count, occupant_rng, cfg_.occupant_speed);

    step_idx_ = 0;
    last_target_step_ = 0;
    done_ = false;
    end_reason_ = EndReason::None;
    log_.clear();
    trajectory_.assign(1, shooter_.pos);

    // Prime contact flags so a spawn touching geometry is not billed as a hit.
    const auto& walls = layout_.collision_walls();
    wall_contact_.assign(walls.size(), 0);
    for (size_t i = 0; i < walls.size(); ++i) {
        if (point_segment_distance(shooter_.pos, walls[i].a, walls[i].b) <=
            cfg_.shooter_radius + kContactEps) {
            wall_contact_[i] = 1;
        }
    }
    return observe();
}

void ShooterEnv::override_shooter(Vec2 pos, double heading) {
    shooter_.pos = pos;
    shooter_.heading = heading;
    shooter_.velocity = {0.0, 0.0};
    if (!trajectory_.empty()) trajectory_.back() = pos;
    const auto& walls = layout_.collision_walls();
    wall_contact_.assign(walls.size(), 0);
    for (size_t i = 0; i < walls.size(); ++i) {
        if (point_segment_distance(pos, walls[i].a, walls[i].b) <=
            cfg_.shooter_radius + kContactEps) {
            wall_contact_[i] = 1;
        }
    }
}

void ShooterEnv::override_occupant(int id, Vec2 pos) {
    if (id < 0 || id >= static_cast<int>(occupants_.size())) {
        throw error("override_occupant: unknown occupant " + std::to_string(id));
    }
    occupants_[static_cast<size_t>(id)].pos = pos;
}

Observation ShooterEnv::observe() const {
    std::vector<Vec2> targets;
    targets.reserve(occupants_.size());
    for (const OccupantState& occ : occupants_) {
        if (occ.live_target()) targets.push_back(occ.pos);
    }

    Observation obs{};
    const auto dirs = build_ray_fan(shooter_.heading);
    for (int r = 0; r < kRayCount; ++r) {
        const RayHit hit = raycast(layout_, shooter_.pos, dirs[r], targets, cfg_.ray_range,
                                   cfg_.target_radius);
        double* block = obs.data() + r * 5;
        block[0] = hit.tag == RayTag::Target ? 1.0 : 0.0;
        block[1] = hit.tag == RayTag::InteriorWall ? 1.0 : 0.0;
        block[2] = hit.tag == RayTag::ExteriorWall ? 1.0 : 0.0;
        block[3] = hit.hit ? 0.0 : 1.0;
        block[4] = hit.distance / cfg_.ray_range;
    }
    const Rect& bounds = layout_.bounds();
    obs[35] = shooter_.velocity.x / cfg_.shooter_speed;
    obs[36] = shooter_.velocity.y / cfg_.shooter_speed;
    obs[37] = (shooter_.pos.x - bounds.min.x) / bounds.width();
    obs[38] = (shooter_.pos.y - bounds.min.y) / bounds.height();
    return obs;
}

void ShooterEnv::push_event(StepResult& out, EpisodeEvent ev) {
    log_.push_back(ev);
    out.events.push_back(ev);
}

void ShooterEnv::move_shooter(Vec2 action, StepResult& out) {
    if (action.norm() > 1.0) action = action.normalized();
    shooter_.velocity = action * cfg_.shooter_speed;
    if (action.norm() > 1e-9) shooter_.heading = std::atan2(action.y, action.x);

    const auto& walls = layout_.collision_walls();
    const auto& portals = layout_.open_portals();
    const double r = cfg_.shooter_radius;

    Vec2 pos = shooter_.pos + shooter_.velocity * cfg_.dt;
    // Push-out loop: resolve the deepest penetration each round; open portals
    // block the shooter exactly like walls but stay silent reward-wise.
    bool stuck = false;
    for (int iter = 0; iter < 8; ++iter) {
        double worst_depth = 0.0;
        Vec2 worst_push;
        auto consider = [&](const WallSegment& seg) {
            const Vec2 cp = closest_point_on_segment(pos, seg.a, seg.b);
            const double d = distance(pos, cp);
            const double depth = r - d;
            if (depth > worst_depth + 1e-12) {
                worst_depth = depth;
                Vec2 n = pos - cp;
                if (n.norm() < 1e-9) n = (seg.b - seg.a).normalized().perp();
                worst_push = n.normalized() * (depth + 1e-6);
            }
        };
        for (const WallSegment& w : walls) consider(w);
        for (const WallSegment& p : portals) consider(p);
        if (worst_depth <= 0.0) break;
        pos += worst_push;
        if (iter == 7) stuck = true;
    }
    if (stuck || !layout_.nav().walkable(pos)) {
        // Corner jams or a push through thin geometry: stop in place instead.
        pos = shooter_.pos;
    }
    shooter_.pos = pos;

    // Contact-onset wall events, billed at the pre-step target count.
    for (size_t i = 0; i < walls.size(); ++i) {
        const bool touching =
            point_segment_distance(shooter_.pos, walls[i].a, walls[i].b) <= r + kContactEps;
        if (touching && !wall_contact_[i]) {
            if (walls[i].kind == WallKind::Exterior) {
                out.reward.r_exterior_wall += -2.0 - shooter_.count * 0.2;
                push_event(out, {step_idx_, EventKind::ExteriorWallHit, static_cast<int>(i),
                                 EndReason::None});
            } else {
                out.reward.r_interior_wall += -0.5;
                push_event(out, {step_idx_, EventKind::InteriorWallHit, static_cast<int>(i),
                                 EndReason::None});
            }
        }
        wall_contact_[i] = touching ? 1 : 0;
    }
}

void ShooterEnv::apply_harm(StepResult& out) {
    for (OccupantState& occ : occupants_) {
        if (!occ.live_target()) continue;
        if (distance(occ.pos, shooter_.pos) <= cfg_.harm_radius) {
            mark_harmed(occ);
            out.reward.r_target += 10.0 + shooter_.count * 5.0;
            shooter_.count += 1;
            last_target_step_ = step_idx_ + 1;  // the step being produced now
            push_event(out, {step_idx_, EventKind::TargetReached, occ.id, EndReason::None});
        }
    }
}

void ShooterEnv::step_occupants(StepResult& out) {
    const double t = step_idx_ * cfg_.dt;
    for (OccupantState& occ : occupants_) {
        if (occ.terminal()) continue;
        step_occupant(occ, layout_, t, cfg_.dt, cfg_.freeze_time);
        if (occ.status == OccupantStatus::Evacuated) {
            push_event(out, {step_idx_, EventKind::OccupantEvacuated, occ.id, EndReason::None});
        }
    }
}

void ShooterEnv::check_termination(StepResult& out) {
    EndReason reason = EndReason::None;

    const bool all_terminal = std::all_of(occupants_.begin(), occupants_.end(),
                                          [](const OccupantState& o) { return o.terminal(); });
    if (mode_ == EnvMode::Evaluation) {
        const bool exterior_hit = std::any_of(
            out.events.begin(), out.events.end(),
            [](const EpisodeEvent& e) { return e.kind == EventKind::ExteriorWallHit; });
        const int steps_since_target = step_idx_ + 1 - last_target_step_;
        if (exterior_hit) {
            reason = EndReason::ExteriorWall;
        } else if (steps_since_target * cfg_.dt >= cfg_.no_target_timeout - 1e-9) {
            reason = EndReason::Timeout;
        } else if (all_terminal) {
            reason = EndReason::AllTerminal;
        }
    } else {
        if (all_terminal) {
            reason = EndReason::AllTerminal;
        } else if (step_idx_ + 1 >= cfg_.max_episode_steps) {
            reason = EndReason::StepCap;
        }
    }

    if (reason != EndReason::None) {
        done_ = true;
        end_reason_ = reason;
        out.done = true;
        out.end_reason = reason;
        push_event(out, {step_idx_, EventKind::EpisodeEnd, -1, reason});
    }
}

StepResult ShooterEnv::step(Vec2 action) {
    if (done_) throw error("step() called on a finished episode; reset() first");
    StepResult out;

    move_shooter(action, out);
    apply_harm(out);
    step_occupants(out);
    out.reward.r_time = -0.001;
    out.reward.total = out.reward.r_target + out.reward.r_exterior_wall +
                       out.reward.r_interior_wall + out.reward.r_time;

    check_termination(out);
    step_idx_ += 1;
    trajectory_.push_back(shooter_.pos);
    out.obs = observe();
    return out;
}

int ShooterEnv::evacuated_count() const {
    return static_cast<int>(std::count_if(occupants_.begin(), occupants_.end(),
                                          [](const OccupantState& o) {
                                              return o.status == OccupantStatus::Evacuated;
                                          }));
}

int ShooterEnv::harmed_count() const {
    return static_cast<int>(
        std::count_if(occupants_.begin(), occupants_.end(), [](const OccupantState& o) {
            return o.status == OccupantStatus::Harmed;
        }));
}

}  // namespace asim
