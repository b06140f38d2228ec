#include "asim/occupants.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "asim/error.hpp"
#include "asim/navgrid.hpp"

namespace asim {

const char* to_string(OccupantStatus s) {
    switch (s) {
        case OccupantStatus::Frozen: return "frozen";
        case OccupantStatus::Moving: return "moving";
        case OccupantStatus::Hiding: return "hiding";
        case OccupantStatus::Evacuated: return "evacuated";
        case OccupantStatus::Harmed: return "harmed";
    }
    return "?";
}

std::vector<OccupantState> spawn_occupants(const BuildingLayout& layout, int n, Rng& rng,
                                           double speed) {
    if (n < 0) throw validation_error("occupant count must be >= 0");
    if (n > layout.occupancy_limit()) {
        throw validation_error("occupant count " + std::to_string(n) +
                               " exceeds the occupancy limit " +
                               std::to_string(layout.occupancy_limit()));
    }
    const Rect& bounds = layout.bounds();
    const NavGrid& grid = layout.nav();
    std::vector<OccupantState> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec2 p;
        do {
            p = {rng.uniform(bounds.min.x, bounds.max.x), rng.uniform(bounds.min.y, bounds.max.y)};
        } while (!grid.walkable(p));
        OccupantState occ;
        occ.id = i;
        occ.pos = p;
        occ.speed = speed;
        out.push_back(std::move(occ));
    }
    return out;
}

GoalRef decide_goal(OccupantState& occ, const BuildingLayout& layout) {
    struct Candidate {
        GoalRef ref;
        Vec2 point;
    };
    std::vector<Candidate> candidates;
    const auto& hides = layout.hiding_places();
    for (size_t i = 0; i < hides.size(); ++i) {
        candidates.push_back({{GoalKind::HidingPlace, static_cast<int>(i)}, hides[i].center});
    }
    for (const Exit& e : layout.exits()) {
        if (e.open) candidates.push_back({{GoalKind::Exit, e.id}, e.portal.midpoint()});
    }
    candidates.push_back({{GoalKind::Entrance, 0}, layout.entrance().midpoint()});

    const NavGrid& grid = layout.nav();
    const DistanceField* best_field = nullptr;
    const Candidate* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const Candidate& c : candidates) {
        const DistanceField& field = grid.field_to(c.point);
        const auto d = grid.distance_via_field(field, occ.pos);
        if (d && *d < best_dist) {
            best = &c;
            best_field = &field;
            best_dist = *d;
        }
    }
    if (!best) {
        throw error("occupant " + std::to_string(occ.id) + ": no reachable evacuation goal");
    }
    occ.goal = best->ref;
    occ.path = grid.path_from(occ.pos, *best_field);
    occ.path_cursor = 0;
    return *occ.goal;
}

namespace {

// Walks the remaining waypoints by up to `budget` meters.
void advance_along_path(OccupantState& occ, double budget) {
    while (budget > 0.0 && occ.path_cursor < occ.path.size()) {
        const Vec2 target = occ.path[occ.path_cursor];
        const double gap = distance(occ.pos, target);
        if (gap <= budget) {
            occ.pos = target;
            budget -= gap;
            ++occ.path_cursor;
        } else {
            occ.pos += (target - occ.pos) * (budget / gap);
            budget = 0.0;
        }
    }
}

}  // namespace

void step_occupant(OccupantState& occ, const BuildingLayout& layout, double t, double dt,
                   double freeze_time) {
    if (occ.terminal() || occ.status == OccupantStatus::Hiding) return;
    if (t < freeze_time) return;  // initial freeze response

    if (occ.status == OccupantStatus::Frozen) {
        decide_goal(occ, layout);
        occ.status = OccupantStatus::Moving;
    }

    advance_along_path(occ, occ.speed * dt);

    const bool path_done = occ.path_cursor >= occ.path.size();
    switch (occ.goal->kind) {
        case GoalKind::Exit:
        case GoalKind::Entrance: {
            const WallSegment& portal = occ.goal->kind == GoalKind::Entrance
                                            ? layout.entrance()
                                            : layout.exit_by_id(occ.goal->id).portal;
            if (path_done || point_segment_distance(occ.pos, portal.a, portal.b) <= occ.speed * dt) {
                occ.status = OccupantStatus::Evacuated;
            }
            break;
        }
        case GoalKind::HidingPlace: {
            const HidingPlace& hp = layout.hiding_places()[occ.goal->id];
            if (path_done || distance(occ.pos, hp.center) <= hp.radius) {
                occ.status = OccupantStatus::Hiding;
            }
            break;
        }
    }
}

void mark_harmed(OccupantState& occ) {
    if (occ.terminal()) {
        throw error("occupant " + std::to_string(occ.id) + " is already " +
                    to_string(occ.status) + "; cannot harm");
    }
    occ.status = OccupantStatus::Harmed;
}

}  // namespace asim
