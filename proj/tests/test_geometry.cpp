#include <cmath>
#include <vector>

#include "asim/geometry.hpp"
#include "asim/io.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace asim;

TEST_CASE("point_segment_distance handles interior, endpoint, and degenerate cases") {
    CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3, 4}, {0, 0}, {1, 0}) == doctest::Approx(std::hypot(2, 4)));
    CHECK(point_segment_distance({-2, 0}, {0, 0}, {1, 0}) == doctest::Approx(2.0));
    // degenerate segment = point
    CHECK(point_segment_distance({3, 4}, {0, 0}, {0, 0}) == doctest::Approx(5.0));
    // point on the segment
    CHECK(point_segment_distance({0.5, 0}, {0, 0}, {1, 0}) == doctest::Approx(0.0));
}

TEST_CASE("closest_point_on_segment projects and clamps") {
    Vec2 p = closest_point_on_segment({0.5, 2}, {0, 0}, {1, 0});
    CHECK(p.x == doctest::Approx(0.5));
    CHECK(p.y == doctest::Approx(0.0));
    p = closest_point_on_segment({5, 5}, {0, 0}, {1, 0});
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(0.0));
}

TEST_CASE("ray_segment_intersection basic hits and misses") {
    // ray +x from origin into vertical segment at x=2
    double t = ray_segment_intersection({0, 0}, {1, 0}, {2, -1}, {2, 1});
    CHECK(t == doctest::Approx(2.0));
    // behind the origin
    CHECK(ray_segment_intersection({0, 0}, {1, 0}, {-2, -1}, {-2, 1}) < 0.0);
    // parallel
    CHECK(ray_segment_intersection({0, 0}, {1, 0}, {0, 1}, {5, 1}) < 0.0);
    // ray passes beyond segment extent
    CHECK(ray_segment_intersection({0, 0}, {1, 0}, {2, 1}, {2, 3}) < 0.0);
    // diagonal ray
    t = ray_segment_intersection({0, 0}, from_angle(M_PI / 4), {0, 2}, {2, 0});
    CHECK(t == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("ray_disc_intersection reports entry, inside-exit, and miss") {
    // entry crossing from outside
    double t = ray_disc_intersection({0, 0}, {1, 0}, {5, 0}, 1.0);
    CHECK(t == doctest::Approx(4.0));
    // tangent-ish offset: still hits with chord
    t = ray_disc_intersection({0, 0.6}, {1, 0}, {5, 0}, 1.0);
    CHECK(t == doctest::Approx(5.0 - std::sqrt(1.0 - 0.36)));
    // origin inside the disc: exit crossing
    t = ray_disc_intersection({5, 0}, {1, 0}, {5, 0}, 1.0);
    CHECK(t == doctest::Approx(1.0));
    // miss
    CHECK(ray_disc_intersection({0, 2}, {1, 0}, {5, 0}, 1.0) < 0.0);
    // disc behind the origin
    CHECK(ray_disc_intersection({10, 0}, {1, 0}, {5, 0}, 1.0) < 0.0);
}

TEST_CASE("segments_intersect and segment_intersects_rect") {
    CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    // shared endpoint counts
    CHECK(segments_intersect({0, 0}, {1, 1}, {1, 1}, {2, 0}));

    Rect r{{1, 1}, {3, 3}};
    CHECK(segment_intersects_rect({0, 2}, {4, 2}, r));          // pierces
    CHECK(segment_intersects_rect({1.5, 1.5}, {2.5, 2.5}, r));  // fully inside
    CHECK(segment_intersects_rect({0, 1}, {4, 1}, r));          // grazes the boundary
    CHECK_FALSE(segment_intersects_rect({0, 0}, {4, 0}, r));
    CHECK_FALSE(segment_intersects_rect({0, 4}, {0.5, 0}, r));
}

TEST_CASE("point_in_polygon on a concave loop") {
    // L-shape
    std::vector<Vec2> loop = {{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}};
    CHECK(point_in_polygon({1, 1}, loop));
    CHECK(point_in_polygon({1, 3}, loop));
    CHECK(point_in_polygon({3, 1}, loop));
    CHECK_FALSE(point_in_polygon({3, 3}, loop));
    CHECK_FALSE(point_in_polygon({-1, 1}, loop));
    CHECK_FALSE(point_in_polygon({5, 5}, loop));
}

TEST_CASE("polygon_area signed shoelace") {
    std::vector<Vec2> ccw = {{0, 0}, {4, 0}, {4, 3}, {0, 3}};
    CHECK(polygon_area(ccw) == doctest::Approx(12.0));
    std::vector<Vec2> cw = {{0, 0}, {0, 3}, {4, 3}, {4, 0}};
    CHECK(polygon_area(cw) == doctest::Approx(-12.0));
    std::vector<Vec2> lshape = {{0, 0}, {4, 0}, {4, 2}, {2, 2}, {2, 4}, {0, 4}};
    CHECK(polygon_area(lshape) == doctest::Approx(12.0));
}

TEST_CASE("build_ray_fan spans -70..+70 degrees around the heading") {
    const double heading = 0.3;
    auto fan = build_ray_fan(heading);
    REQUIRE(fan.size() == 7);
    const double half = 70.0 * M_PI / 180.0;
    for (int k = 0; k < 7; ++k) {
        const double want = heading + (k - 3) * (half / 3.0);
        CHECK(fan[k].x == doctest::Approx(std::cos(want)).epsilon(1e-12));
        CHECK(fan[k].y == doctest::Approx(std::sin(want)).epsilon(1e-12));
        CHECK(fan[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // center ray is the heading itself
    CHECK(fan[3].x == doctest::Approx(std::cos(heading)));
    CHECK(fan[3].y == doctest::Approx(std::sin(heading)));
}

TEST_CASE("cast_ray matches fine-step marching oracle on random scenes") {
    Rng rng(derive_seed(0xa11ce, SeedStream::Fuzz, 1));
    int hits = 0, misses = 0, targets_hit = 0;
    for (int scene_i = 0; scene_i < 200; ++scene_i) {
        oracle::MarchScene scene;
        const int n_walls = 2 + static_cast<int>(rng.below(5));
        for (int w = 0; w < n_walls; ++w) {
            Vec2 a{rng.uniform(-8, 8), rng.uniform(-8, 8)};
            Vec2 b = a + Vec2{rng.uniform(-6, 6), rng.uniform(-6, 6)};
            if (distance(a, b) < 0.5) b = a + Vec2{1.0, 0.7};
            scene.walls.push_back({a, b, (rng.below(2) == 0) ? WallKind::Exterior
                                                             : WallKind::Interior});
        }
        const int n_targets = static_cast<int>(rng.below(4));
        for (int c = 0; c < n_targets; ++c) {
            scene.targets.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8)});
        }

        Vec2 origin{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        Vec2 dir = from_angle(rng.uniform(0, 2 * M_PI));
        const double max_range = 12.0;

        RayHit got = cast_ray(origin, dir, scene.walls, scene.targets,
                              scene.target_radius, max_range);
        auto want = oracle::ray_march(scene, origin, dir, max_range);

        INFO("scene ", scene_i);
        CHECK(got.hit == want.hit);
        if (got.hit && want.hit) {
            CHECK(std::abs(got.distance - want.distance) < 2e-3);
            // tag comparison only away from wall/target photo finishes
            if (std::abs(got.distance - want.distance) < 1e-6) CHECK(got.tag == want.tag);
            ++hits;
            if (got.tag == RayTag::Target) ++targets_hit;
        } else if (!got.hit) {
            CHECK(got.distance == doctest::Approx(max_range));
            CHECK(got.tag == RayTag::None);
            ++misses;
        }
    }
    // the fuzz must actually exercise all three outcomes
    CHECK(hits > 50);
    CHECK(misses > 10);
    CHECK(targets_hit > 5);
}

TEST_CASE("cast_ray clamps to max range and prefers the nearest object") {
    std::vector<WallSegment> walls = {{{5, -1}, {5, 1}, WallKind::Interior},
                                      {{3, -1}, {3, 1}, WallKind::Exterior}};
    std::vector<Vec2> targets = {{4, 0}};
    // nearest is the exterior wall at x=3
    RayHit h = cast_ray({0, 0}, {1, 0}, walls, targets, 0.3, 20.0);
    CHECK(h.hit);
    CHECK(h.distance == doctest::Approx(3.0));
    CHECK(h.tag == RayTag::ExteriorWall);

    // without that wall the target disc surface at 4-0.3 wins
    walls.erase(walls.begin() + 1);
    h = cast_ray({0, 0}, {1, 0}, walls, targets, 0.3, 20.0);
    CHECK(h.hit);
    CHECK(h.distance == doctest::Approx(3.7));
    CHECK(h.tag == RayTag::Target);

    // beyond range reports a miss at exactly max_range
    h = cast_ray({0, 0}, {1, 0}, walls, targets, 0.3, 2.0);
    CHECK_FALSE(h.hit);
    CHECK(h.distance == doctest::Approx(2.0));
    CHECK(h.tag == RayTag::None);
}
