#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "asim/geometry.hpp"

namespace asim {

class BuildingLayout;

// Dijkstra flood from one goal cell. dist is in meters from each cell center
// to the goal cell center (infinity when unreachable); parent points one step
// along the shortest path toward the goal.
struct DistanceField {
    std::vector<double> dist;
    std::vector<int8_t> parent;  // index into NavGrid::kNeighbors, -1 at goal/unreached
    int goal_cell = -1;
    Vec2 goal_point;             // the continuous goal the field was requested for
};

// Uniform 0.25 m occupancy grid over the building footprint. 8-connected with
// no corner cutting; a cell is walkable when its center lies inside the
// perimeter polygon and no collision wall touches the cell rectangle.
class NavGrid {
public:
    static constexpr double kCellSize = 0.25;
    static constexpr int kNeighborCount = 8;
    // dx, dy; cardinals first, then diagonals
    static const std::array<std::array<int, 2>, 8> kNeighbors;

    explicit NavGrid(const BuildingLayout& layout);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int cell_count() const { return nx_ * ny_; }

    bool in_grid(int cx, int cy) const { return cx >= 0 && cx < nx_ && cy >= 0 && cy < ny_; }
    bool cell_walkable(int cell) const { return walkable_[cell]; }
    bool cell_walkable(int cx, int cy) const { return in_grid(cx, cy) && walkable_[cy * nx_ + cx]; }
    int cell_index(int cx, int cy) const { return cy * nx_ + cx; }

    // Cell containing p, or -1 outside the grid.
    int cell_of(Vec2 p) const;
    Vec2 cell_center(int cell) const;

    // True when the cell containing p is walkable.
    bool walkable(Vec2 p) const;

    // Nearest walkable cell to p (ring search, deterministic tie-break);
    // nullopt when none within ~2 m.
    std::optional<int> snap(Vec2 p) const;

    double walkable_area() const { return walkable_count_ * kCellSize * kCellSize; }
    int walkable_count() const { return walkable_count_; }

    // A* octile distance between snapped endpoints, clamped from below by the
    // Euclidean distance between the original points. nullopt when
    // disconnected or unsnappable.
    std::optional<double> distance(Vec2 from, Vec2 to) const;

    // Cached Dijkstra field toward a goal point (key: goal quantized to 1e-6).
    // Thread-safe; the returned reference stays valid for the grid's lifetime.
    const DistanceField& field_to(Vec2 goal) const;

    // Field-based distance from an arbitrary point, consistent with distance().
    std::optional<double> distance_via_field(const DistanceField& field, Vec2 from) const;

    // Cell-center waypoints from (the snap of) `from` to the field's goal cell,
    // ending at the goal cell center. Empty when unreachable.
    std::vector<Vec2> path_from(Vec2 from, const DistanceField& field) const;

private:
    DistanceField flood(int goal_cell, Vec2 goal_point) const;
    bool diagonal_ok(int cx, int cy, int dx, int dy) const;

    Vec2 origin_;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<uint8_t> walkable_;
    int walkable_count_ = 0;

    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int64_t, int64_t>, std::unique_ptr<DistanceField>> field_cache_;
};

}  // namespace asim
