#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "asim/geometry.hpp"

namespace asim {

class NavGrid;

struct Exit {
    int id = 0;            // 1..6, unique per layout
    WallSegment portal;    // lies on the building perimeter
    bool open = true;
};

struct HidingPlace {
    Vec2 center;
    double radius = 1.0;
};

struct SpawnZone {
    Vec2 center;
    double side = 4.0;     // axis-aligned square, side length in meters

    Rect rect() const {
        const double h = side * 0.5;
        return {{center.x - h, center.y - h}, {center.x + h, center.y + h}};
    }
};

// Bitmask over exit ids: bit (id-1) set means the exit is open.
struct ExitMask {
    uint32_t bits = 0;

    static ExitMask all_open(const std::vector<Exit>& exits);
    bool is_open(int exit_id) const { return (bits >> (exit_id - 1)) & 1u; }
    ExitMask& close(int exit_id) { bits &= ~(1u << (exit_id - 1)); return *this; }
    ExitMask& open(int exit_id) { bits |= 1u << (exit_id - 1); return *this; }
    bool operator==(const ExitMask&) const = default;
};

// Immutable building description. Geometry queries (ray casting, pathfinding)
// see closed exits as exterior wall; open portals are absent geometry. Use
// with_exit_mask() to derive the per-scenario variant; instances are safe for
// concurrent reads once constructed.
class BuildingLayout {
public:
    // Parses and validates the structured-text (JSON) layout format described
    // in the README. Throws asim::parse_error / asim::validation_error with the
    // offending entity named.
    static BuildingLayout from_text(const std::string& text);
    static BuildingLayout from_file(const std::string& path);

    const std::vector<WallSegment>& walls() const { return walls_; }
    const WallSegment& entrance() const { return entrance_; }
    const std::vector<Exit>& exits() const { return exits_; }
    const std::vector<HidingPlace>& hiding_places() const { return hiding_places_; }
    const SpawnZone& spawn_zone() const { return spawn_zone_; }
    const Rect& bounds() const { return bounds_; }
    double declared_area_m2() const { return declared_area_m2_; }
    double floor_area_m2() const { return floor_area_m2_; }

    // IBC business-occupancy load: 13.94 m^2 (150 ft^2) per person.
    int occupancy_limit() const { return static_cast<int>(floor_area_m2_ / 13.94); }

    ExitMask full_mask() const { return ExitMask::all_open(exits_); }
    ExitMask current_mask() const;
    int open_exit_count() const;
    std::vector<int> open_exit_ids() const;
    const Exit& exit_by_id(int id) const;  // throws if unknown

    // Copy of this layout with open flags from the mask and collision geometry
    // rebuilt (closed portals become exterior wall).
    BuildingLayout with_exit_mask(ExitMask mask) const;

    // Walls plus closed-exit portals; what rays and the shooter collide with.
    const std::vector<WallSegment>& collision_walls() const { return collision_walls_; }

    // Open portals (entrance + open exits). Occupants evacuate through them;
    // the shooter is blocked without penalty; rays pass through.
    const std::vector<WallSegment>& open_portals() const { return open_portals_; }

    // Perimeter polygon (exterior walls and portals chained into one loop).
    const std::vector<Vec2>& perimeter() const { return perimeter_; }

    // Lazily built 0.25 m navigation grid for this layout + mask; cached and
    // internally synchronized.
    const NavGrid& nav() const;

private:
    BuildingLayout() = default;
    void rebuild_derived();
    void validate();

    std::vector<WallSegment> walls_;
    WallSegment entrance_;
    std::vector<Exit> exits_;
    std::vector<HidingPlace> hiding_places_;
    SpawnZone spawn_zone_;
    double declared_area_m2_ = 0.0;

    std::vector<WallSegment> collision_walls_;
    std::vector<WallSegment> open_portals_;
    std::vector<Vec2> perimeter_;
    Rect bounds_{};
    double floor_area_m2_ = 0.0;

    mutable std::shared_ptr<const NavGrid> nav_;
    // shared_ptr so layouts stay copyable; copies sharing a lock is harmless
    mutable std::shared_ptr<std::mutex> nav_mutex_ = std::make_shared<std::mutex>();
};

// World queries expressed over the layout's nav grid / geometry.

RayHit raycast(const BuildingLayout& layout, Vec2 origin, Vec2 direction,
               std::span<const Vec2> targets, double max_range = 20.0,
               double target_radius = 0.3);

// Grid shortest-path distance in meters; nullopt when disconnected. Always
// >= the Euclidean distance and symmetric up to float noise.
std::optional<double> shortest_path_distance(const BuildingLayout& layout, Vec2 from, Vec2 to);

// Index into goals minimizing shortest_path_distance, ties to the lowest
// index. Throws asim::error when every goal is unreachable.
size_t nearest_goal(const BuildingLayout& layout, Vec2 pos, std::span<const Vec2> goals);

}  // namespace asim
