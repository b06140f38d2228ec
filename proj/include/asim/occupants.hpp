#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asim/geometry.hpp"
#include "asim/io.hpp"
#include "asim/layout.hpp"

namespace asim {

enum class OccupantStatus : std::uint8_t { Frozen, Moving, Hiding, Evacuated, Harmed };

const char* to_string(OccupantStatus s);

enum class GoalKind : std::uint8_t { HidingPlace, Exit, Entrance };

struct GoalRef {
    GoalKind kind = GoalKind::Entrance;
    int id = 0;  // hiding place index 0..3 or exit id 1..6; unused for Entrance
    bool operator==(const GoalRef&) const = default;
};

// One building occupant. Statuses move along Frozen -> Moving -> {Hiding |
// Evacuated}; any non-terminal occupant can become Harmed. Evacuated and
// Harmed are absorbing.
struct OccupantState {
    int id = 0;
    Vec2 pos;
    OccupantStatus status = OccupantStatus::Frozen;
    double speed = 1.5;
    std::optional<GoalRef> goal;
    std::vector<Vec2> path;   // cell-center waypoints toward the goal
    size_t path_cursor = 0;

    bool terminal() const {
        return status == OccupantStatus::Evacuated || status == OccupantStatus::Harmed;
    }
    // Live targets are everyone still inside the building (hiding included).
    bool live_target() const { return !terminal(); }
};

// n occupants i.i.d. uniform over the walkable region (rejection sampling),
// all Frozen. Throws validation_error when n exceeds the occupancy limit.
std::vector<OccupantState> spawn_occupants(const BuildingLayout& layout, int n, Rng& rng,
                                           double speed = 1.5);

// Picks the path-nearest candidate among the 4 hiding places, the open exits
// (ascending id), and the entrance — ties to the earliest candidate in that
// order — and plans occ.path to it. Throws asim::error when nothing is
// reachable.
GoalRef decide_goal(OccupantState& occ, const BuildingLayout& layout);

// Advances one occupant by dt seconds, t being the episode time before the
// step. Frozen until t reaches freeze_time (goal decided on thaw); then walks
// the path at occ.speed; arrival flips status to Evacuated (portal goals) or
// Hiding (position fixed).
void step_occupant(OccupantState& occ, const BuildingLayout& layout, double t, double dt,
                   double freeze_time = 3.0);

// Absorbing harm transition. Throws asim::error when occ is already terminal.
void mark_harmed(OccupantState& occ);

}  // namespace asim
