#include "asim/geometry.hpp"

#include <algorithm>
#include <limits>

namespace asim {

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    if (len_sq <= 0.0) return a;
    const double t = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
    return a + ab * t;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    return distance(p, closest_point_on_segment(p, a, b));
}

double ray_segment_intersection(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
    const Vec2 seg = b - a;
    const double denom = dir.cross(seg);
    if (std::abs(denom) < 1e-15) return -1.0;
    const Vec2 diff = a - origin;
    const double t = diff.cross(seg) / denom;
    const double u = diff.cross(dir) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0) return -1.0;
    return t;
}

double ray_disc_intersection(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
    const Vec2 oc = origin - center;
    const double b = oc.dot(dir);
    const double c = oc.norm_sq() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return -1.0;
    const double root = std::sqrt(disc);
    const double t_near = -b - root;
    if (t_near > 1e-12) return t_near;
    const double t_far = -b + root;
    if (t_far > 1e-12) return t_far;  // origin inside the disc: exit crossing
    return -1.0;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = (b - a).cross(c - a);
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
}

bool on_segment_collinear(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment_collinear(a, b, c)) return true;
    if (o2 == 0 && on_segment_collinear(a, b, d)) return true;
    if (o3 == 0 && on_segment_collinear(c, d, a)) return true;
    if (o4 == 0 && on_segment_collinear(c, d, b)) return true;
    return false;
}

bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
    if (r.contains(a) || r.contains(b)) return true;
    const Vec2 p0 = r.min;
    const Vec2 p1{r.max.x, r.min.y};
    const Vec2 p2 = r.max;
    const Vec2 p3{r.min.x, r.max.y};
    return segments_intersect(a, b, p0, p1) || segments_intersect(a, b, p1, p2) ||
           segments_intersect(a, b, p2, p3) || segments_intersect(a, b, p3, p0);
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> loop) {
    bool inside = false;
    const size_t n = loop.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 vi = loop[i];
        const Vec2 vj = loop[j];
        if ((vi.y > p.y) != (vj.y > p.y)) {
            const double x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

double polygon_area(std::span<const Vec2> loop) {
    double acc = 0.0;
    const size_t n = loop.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        acc += loop[j].cross(loop[i]);
    }
    return 0.5 * acc;
}

RayHit cast_ray(Vec2 origin, Vec2 dir, std::span<const WallSegment> walls,
                std::span<const Vec2> targets, double target_radius, double max_range) {
    double best_t = max_range;
    RayTag best_tag = RayTag::None;
    bool found = false;

    for (const WallSegment& w : walls) {
        const double t = ray_segment_intersection(origin, dir, w.a, w.b);
        if (t >= 0.0 && t < best_t) {
            best_t = t;
            best_tag = (w.kind == WallKind::Exterior) ? RayTag::ExteriorWall : RayTag::InteriorWall;
            found = true;
        }
    }
    for (const Vec2& c : targets) {
        const double t = ray_disc_intersection(origin, dir, c, target_radius);
        if (t >= 0.0 && t < best_t) {
            best_t = t;
            best_tag = RayTag::Target;
            found = true;
        }
    }

    if (!found || best_t > max_range) return {false, max_range, RayTag::None};
    return {true, best_t, best_tag};
}

std::vector<Vec2> build_ray_fan(double heading) {
    constexpr double kHalfFanRad = kRayHalfFanDeg * M_PI / 180.0;
    constexpr double kStep = kHalfFanRad / 3.0;
    std::vector<Vec2> dirs;
    dirs.reserve(kRayCount);
    for (int k = -3; k <= 3; ++k) {
        dirs.push_back(from_angle(heading + static_cast<double>(k) * kStep));
    }
    return dirs;
}

}  // namespace asim
