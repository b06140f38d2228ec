#include "asim/navgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "asim/layout.hpp"

namespace asim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;

double octile(int dx, int dy) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    return NavGrid::kCellSize * (std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy));
}

std::pair<int64_t, int64_t> cache_key(Vec2 p) {
    return {static_cast<int64_t>(std::llround(p.x * 1e6)),
            static_cast<int64_t>(std::llround(p.y * 1e6))};
}

}  // namespace

const std::array<std::array<int, 2>, 8> NavGrid::kNeighbors = {{
    {{1, 0}}, {{-1, 0}}, {{0, 1}}, {{0, -1}},
    {{1, 1}}, {{1, -1}}, {{-1, 1}}, {{-1, -1}},
}};

// kNeighbors[k] reversed, so parents can point back along the relaxed edge.
static constexpr std::array<int8_t, 8> kOpposite = {1, 0, 3, 2, 7, 6, 5, 4};

NavGrid::NavGrid(const BuildingLayout& layout) {
    const Rect& bounds = layout.bounds();
    origin_ = bounds.min;
    nx_ = static_cast<int>(std::ceil(bounds.width() / kCellSize - 1e-9));
    ny_ = static_cast<int>(std::ceil(bounds.height() / kCellSize - 1e-9));
    walkable_.assign(static_cast<size_t>(nx_) * ny_, 0);

    const auto& perimeter = layout.perimeter();
    for (int cy = 0; cy < ny_; ++cy) {
        for (int cx = 0; cx < nx_; ++cx) {
            const Vec2 center{origin_.x + (cx + 0.5) * kCellSize,
                              origin_.y + (cy + 0.5) * kCellSize};
            walkable_[cell_index(cx, cy)] = point_in_polygon(center, perimeter) ? 1 : 0;
        }
    }

    // Any wall touching a cell rectangle blocks it; walls lying exactly on a
    // grid line therefore block both neighboring columns.
    for (const WallSegment& w : layout.collision_walls()) {
        const double lox = std::min(w.a.x, w.b.x), hix = std::max(w.a.x, w.b.x);
        const double loy = std::min(w.a.y, w.b.y), hiy = std::max(w.a.y, w.b.y);
        const int cx0 = std::max(0, static_cast<int>(std::floor((lox - origin_.x) / kCellSize)) - 1);
        const int cx1 = std::min(nx_ - 1, static_cast<int>(std::floor((hix - origin_.x) / kCellSize)) + 1);
        const int cy0 = std::max(0, static_cast<int>(std::floor((loy - origin_.y) / kCellSize)) - 1);
        const int cy1 = std::min(ny_ - 1, static_cast<int>(std::floor((hiy - origin_.y) / kCellSize)) + 1);
        for (int cy = cy0; cy <= cy1; ++cy) {
            for (int cx = cx0; cx <= cx1; ++cx) {
                const int cell = cell_index(cx, cy);
                if (!walkable_[cell]) continue;
                const Rect r{{origin_.x + cx * kCellSize, origin_.y + cy * kCellSize},
                             {origin_.x + (cx + 1) * kCellSize, origin_.y + (cy + 1) * kCellSize}};
                if (segment_intersects_rect(w.a, w.b, r)) walkable_[cell] = 0;
            }
        }
    }

    walkable_count_ = static_cast<int>(std::count(walkable_.begin(), walkable_.end(), uint8_t{1}));
}

int NavGrid::cell_of(Vec2 p) const {
    const int cx = static_cast<int>(std::floor((p.x - origin_.x) / kCellSize));
    const int cy = static_cast<int>(std::floor((p.y - origin_.y) / kCellSize));
    return in_grid(cx, cy) ? cell_index(cx, cy) : -1;
}

Vec2 NavGrid::cell_center(int cell) const {
    const int cx = cell % nx_;
    const int cy = cell / nx_;
    return {origin_.x + (cx + 0.5) * kCellSize, origin_.y + (cy + 0.5) * kCellSize};
}

bool NavGrid::walkable(Vec2 p) const {
    const int cell = cell_of(p);
    return cell >= 0 && walkable_[cell];
}

std::optional<int> NavGrid::snap(Vec2 p) const {
    int cx = static_cast<int>(std::floor((p.x - origin_.x) / kCellSize));
    int cy = static_cast<int>(std::floor((p.y - origin_.y) / kCellSize));
    cx = std::clamp(cx, 0, nx_ - 1);
    cy = std::clamp(cy, 0, ny_ - 1);
    if (walkable_[cell_index(cx, cy)]) return cell_index(cx, cy);

    constexpr int kMaxRing = 8;  // ~2 m
    for (int r = 1; r <= kMaxRing; ++r) {
        int best = -1;
        double best_d = kInf;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                if (!cell_walkable(cx + dx, cy + dy)) continue;
                const int cell = cell_index(cx + dx, cy + dy);
                const double d = asim::distance(p, cell_center(cell));
                if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && cell < best)) {
                    best = cell;
                    best_d = d;
                }
            }
        }
        if (best >= 0) return best;
    }
    return std::nullopt;
}

bool NavGrid::diagonal_ok(int cx, int cy, int dx, int dy) const {
    return cell_walkable(cx + dx, cy) && cell_walkable(cx, cy + dy);
}

std::optional<double> NavGrid::distance(Vec2 from, Vec2 to) const {
    const auto start = snap(from);
    const auto goal = snap(to);
    if (!start || !goal) return std::nullopt;
    const double euclid = asim::distance(from, to);
    if (*start == *goal) return euclid;

    const int goal_cx = *goal % nx_, goal_cy = *goal / nx_;
    std::vector<double> g(walkable_.size(), kInf);
    using Node = std::pair<double, int>;  // f, cell
    std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
    g[*start] = 0.0;
    {
        const int cx = *start % nx_, cy = *start / nx_;
        open.push({octile(goal_cx - cx, goal_cy - cy), *start});
    }
    while (!open.empty()) {
        const auto [f, cell] = open.top();
        open.pop();
        if (cell == *goal) return std::max(g[cell], euclid);
        const int cx = cell % nx_, cy = cell / nx_;
        const double h_here = octile(goal_cx - cx, goal_cy - cy);
        if (f > g[cell] + h_here + 1e-12) continue;  // stale entry
        for (int k = 0; k < kNeighborCount; ++k) {
            const int dx = kNeighbors[k][0], dy = kNeighbors[k][1];
            if (!cell_walkable(cx + dx, cy + dy)) continue;
            const bool diag = dx != 0 && dy != 0;
            if (diag && !diagonal_ok(cx, cy, dx, dy)) continue;
            const int ncell = cell_index(cx + dx, cy + dy);
            const double ng = g[cell] + kCellSize * (diag ? kSqrt2 : 1.0);
            if (ng < g[ncell] - 1e-12) {
                g[ncell] = ng;
                open.push({ng + octile(goal_cx - cx - dx, goal_cy - cy - dy), ncell});
            }
        }
    }
    return std::nullopt;
}

DistanceField NavGrid::flood(int goal_cell, Vec2 goal_point) const {
    DistanceField field;
    field.goal_cell = goal_cell;
    field.goal_point = goal_point;
    field.dist.assign(walkable_.size(), kInf);
    field.parent.assign(walkable_.size(), int8_t{-1});
    if (goal_cell < 0) return field;

    using Node = std::pair<double, int>;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
    field.dist[goal_cell] = 0.0;
    open.push({0.0, goal_cell});
    while (!open.empty()) {
        const auto [d, cell] = open.top();
        open.pop();
        if (d > field.dist[cell] + 1e-12) continue;
        const int cx = cell % nx_, cy = cell / nx_;
        for (int k = 0; k < kNeighborCount; ++k) {
            const int dx = kNeighbors[k][0], dy = kNeighbors[k][1];
            if (!cell_walkable(cx + dx, cy + dy)) continue;
            const bool diag = dx != 0 && dy != 0;
            if (diag && !diagonal_ok(cx, cy, dx, dy)) continue;
            const int ncell = cell_index(cx + dx, cy + dy);
            const double nd = d + kCellSize * (diag ? kSqrt2 : 1.0);
            if (nd < field.dist[ncell] - 1e-12) {
                field.dist[ncell] = nd;
                field.parent[ncell] = kOpposite[k];  // step from ncell back toward goal
                open.push({nd, ncell});
            }
        }
    }
    return field;
}

const DistanceField& NavGrid::field_to(Vec2 goal) const {
    const auto key = cache_key(goal);
    std::lock_guard lock(cache_mutex_);
    auto it = field_cache_.find(key);
    if (it == field_cache_.end()) {
        const auto cell = snap(goal);
        auto field = std::make_unique<DistanceField>(flood(cell ? *cell : -1, goal));
        it = field_cache_.emplace(key, std::move(field)).first;
    }
    return *it->second;
}

std::optional<double> NavGrid::distance_via_field(const DistanceField& field, Vec2 from) const {
    if (field.goal_cell < 0) return std::nullopt;
    const auto cell = snap(from);
    if (!cell || field.dist[*cell] == kInf) return std::nullopt;
    return std::max(field.dist[*cell], asim::distance(from, field.goal_point));
}

std::vector<Vec2> NavGrid::path_from(Vec2 from, const DistanceField& field) const {
    std::vector<Vec2> waypoints;
    if (field.goal_cell < 0) return waypoints;
    const auto start = snap(from);
    if (!start || field.dist[*start] == kInf) return waypoints;
    int cell = *start;
    waypoints.push_back(cell_center(cell));
    while (cell != field.goal_cell) {
        const int8_t k = field.parent[cell];
        if (k < 0) break;
        const int cx = cell % nx_, cy = cell / nx_;
        cell = cell_index(cx + kNeighbors[k][0], cy + kNeighbors[k][1]);
        waypoints.push_back(cell_center(cell));
    }
    return waypoints;
}

}  // namespace asim
