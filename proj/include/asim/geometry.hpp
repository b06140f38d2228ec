#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace asim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    Vec2 perp() const { return {-y, x}; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline Vec2 from_angle(double radians) { return {std::cos(radians), std::sin(radians)}; }

struct Rect {
    Vec2 min;
    Vec2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

enum class WallKind : std::uint8_t { Exterior, Interior };

struct WallSegment {
    Vec2 a;
    Vec2 b;
    WallKind kind = WallKind::Interior;

    Vec2 midpoint() const { return (a + b) * 0.5; }
    double length() const { return distance(a, b); }
};

// Distance from point p to segment [a,b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Closest point on segment [a,b] to p.
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);

// Parametric ray/segment intersection. Returns t >= 0 along the ray (origin +
// t*dir) or a negative value when there is no intersection. Parallel and
// collinear configurations report no intersection.
double ray_segment_intersection(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);

// First crossing of the ray with a disc boundary. A ray starting inside the
// disc reports the exit crossing. Negative when the ray misses the disc.
double ray_disc_intersection(Vec2 origin, Vec2 dir, Vec2 center, double radius);

// True when segments [a,b] and [c,d] share at least one point.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

// True when segment [a,b] touches the axis-aligned rectangle (boundary counts).
bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r);

// Even-odd point-in-polygon test over a closed vertex loop.
bool point_in_polygon(Vec2 p, std::span<const Vec2> loop);

// Signed shoelace area of a closed vertex loop (positive for CCW order).
double polygon_area(std::span<const Vec2> loop);

enum class RayTag : std::uint8_t { None, Target, InteriorWall, ExteriorWall };

struct RayHit {
    bool hit = false;
    double distance = 0.0;  // reported as max range on a miss
    RayTag tag = RayTag::None;
};

// Nearest intersection of the ray with wall segments and target discs within
// max_range. Misses report {false, max_range, None}. Ties on distance resolve
// walls before targets, then lowest object index, so results are deterministic.
RayHit cast_ray(Vec2 origin, Vec2 dir, std::span<const WallSegment> walls,
                std::span<const Vec2> targets, double target_radius, double max_range);

inline constexpr int kRayCount = 7;
inline constexpr double kRayHalfFanDeg = 70.0;

// Seven unit directions: the heading plus three rays per side, evenly spaced
// out to +-70 degrees (140 degree field of view).
std::vector<Vec2> build_ray_fan(double heading);

}  // namespace asim
