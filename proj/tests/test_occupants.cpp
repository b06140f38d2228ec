#include <array>
#include <cmath>
#include <vector>

#include "asim/error.hpp"
#include "asim/io.hpp"
#include "asim/navgrid.hpp"
#include "asim/occupants.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace asim;

TEST_CASE("spawn respects the occupancy limit and stays on walkable floor") {
    const BuildingLayout& l = testsup::box_room();
    Rng rng(derive_seed(5, SeedStream::Occupants, 0));

    auto occs = spawn_occupants(l, 17, rng);
    REQUIRE(occs.size() == 17);
    for (const auto& o : occs) {
        CHECK(o.status == OccupantStatus::Frozen);
        CHECK(l.nav().walkable(o.pos));
        CHECK(o.speed == doctest::Approx(1.5));
        CHECK_FALSE(o.goal.has_value());
    }
    // ids are sequential
    for (size_t i = 0; i < occs.size(); ++i) CHECK(occs[i].id == static_cast<int>(i));

    CHECK_THROWS_AS(spawn_occupants(l, 18, rng), validation_error);  // limit is 17
    CHECK_THROWS_AS(spawn_occupants(l, -1, rng), validation_error);
    CHECK(spawn_occupants(l, 0, rng).empty());
}

TEST_CASE("spawn positions are uniform over the walkable area (chi-square)") {
    // 4x4 blocks of 6 x 2.5 m align exactly with the 0.25 m grid, so each
    // walkable cell belongs to one block and block probabilities are exact.
    const BuildingLayout& l = testsup::box_room();
    const NavGrid& nav = l.nav();

    std::array<double, 16> cells_per_block{};
    for (int c = 0; c < nav.cell_count(); ++c) {
        if (!nav.cell_walkable(c)) continue;
        const Vec2 p = nav.cell_center(c);
        const int bx = std::min(3, static_cast<int>(p.x / 6.0));
        const int by = std::min(3, static_cast<int>(p.y / 2.5));
        cells_per_block[by * 4 + bx] += 1.0;
    }
    const double total_cells = nav.walkable_count();

    Rng rng(derive_seed(5, SeedStream::Occupants, 1));
    std::array<double, 16> observed{};
    const int batches = 200, per_batch = 10;
    for (int b = 0; b < batches; ++b) {
        for (const auto& o : spawn_occupants(l, per_batch, rng)) {
            const int bx = std::min(3, static_cast<int>(o.pos.x / 6.0));
            const int by = std::min(3, static_cast<int>(o.pos.y / 2.5));
            observed[by * 4 + bx] += 1.0;
        }
    }
    const double n = batches * per_batch;
    double chi2 = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double expect = n * cells_per_block[k] / total_cells;
        REQUIRE(expect > 5.0);
        chi2 += (observed[k] - expect) * (observed[k] - expect) / expect;
    }
    CHECK(chi2 < 37.697);  // df 15 critical value at alpha = 0.001
}

TEST_CASE("spawn is reproducible from the seed") {
    const BuildingLayout& l = testsup::box_room();
    Rng a(derive_seed(5, SeedStream::Occupants, 2));
    Rng b(derive_seed(5, SeedStream::Occupants, 2));
    auto oa = spawn_occupants(l, 10, a);
    auto ob = spawn_occupants(l, 10, b);
    for (int i = 0; i < 10; ++i) {
        CHECK(oa[i].pos.x == ob[i].pos.x);
        CHECK(oa[i].pos.y == ob[i].pos.y);
    }
}

TEST_CASE("decide_goal picks the path-nearest candidate") {
    const BuildingLayout& l = testsup::box_room();

    // next to the north-west hiding place: that disc wins
    OccupantState occ;
    occ.id = 0;
    occ.pos = {2.0, 7.5};
    GoalRef g = decide_goal(occ, l);
    CHECK(g.kind == GoalKind::HidingPlace);
    CHECK(g.id == 2);  // hiding place at (1.5, 8.5)
    CHECK_FALSE(occ.path.empty());

    // right in front of the east exit: exit 2 wins over the far corners
    occ.pos = {22.8, 5.0};
    g = decide_goal(occ, l);
    CHECK(g.kind == GoalKind::Exit);
    CHECK(g.id == 2);

    // near the entrance midpoint (12, 0): entrance competes with the spawn-side
    // candidates; nearest must be the entrance itself
    occ.pos = {12.0, 1.0};
    g = decide_goal(occ, l);
    CHECK(g.kind == GoalKind::Entrance);
}

TEST_CASE("decide_goal ignores closed exits") {
    const BuildingLayout& l = testsup::box_room();
    ExitMask m = l.full_mask();
    m.close(2);
    const BuildingLayout masked = l.with_exit_mask(m);

    OccupantState occ;
    occ.pos = {22.8, 5.0};  // in front of the now-closed east exit
    GoalRef g = decide_goal(occ, masked);
    CHECK_FALSE(g.kind == GoalKind::Exit && g.id == 2);
}

TEST_CASE("occupants freeze, then walk, then terminate at their goal") {
    const BuildingLayout& l = testsup::box_room();
    const double dt = 0.1, freeze = 3.0;

    OccupantState occ;
    occ.id = 7;
    occ.pos = {12.0, 8.5};  // 1.5 m south of the north exit portal midpoint

    // frozen until t reaches freeze_time
    for (int k = 0; k < 30; ++k) {
        step_occupant(occ, l, k * dt, dt, freeze);
        if (k * dt < freeze) CHECK(occ.status == OccupantStatus::Frozen);
    }
    CHECK(occ.status == OccupantStatus::Moving);
    REQUIRE(occ.goal.has_value());
    CHECK(occ.goal->kind == GoalKind::Exit);
    CHECK(occ.goal->id == 1);

    // at 1.5 m/s the remaining ~1.5 m takes about a second
    Vec2 prev = occ.pos;
    int steps = 0;
    while (occ.status == OccupantStatus::Moving && steps < 100) {
        step_occupant(occ, l, freeze + steps * dt, dt, freeze);
        CHECK(distance(prev, occ.pos) <= occ.speed * dt + 1e-9);
        prev = occ.pos;
        ++steps;
    }
    CHECK(occ.status == OccupantStatus::Evacuated);
    CHECK(steps < 25);

    // terminal occupants no longer move
    const Vec2 frozen_pos = occ.pos;
    step_occupant(occ, l, 10.0, dt, freeze);
    CHECK(occ.pos == frozen_pos);
    CHECK(occ.status == OccupantStatus::Evacuated);
}

TEST_CASE("hiding-place goals end in Hiding and the occupant stays put") {
    const BuildingLayout& l = testsup::box_room();
    const double dt = 0.1;

    OccupantState occ;
    occ.pos = {2.5, 2.5};  // nearest goal is the (1.5, 1.5) hiding disc
    int steps = 0;
    while (!occ.terminal() && occ.status != OccupantStatus::Hiding && steps < 200) {
        step_occupant(occ, l, 3.0 + steps * dt, dt);
        ++steps;
    }
    CHECK(occ.status == OccupantStatus::Hiding);
    REQUIRE(occ.goal.has_value());
    CHECK(occ.goal->kind == GoalKind::HidingPlace);
    CHECK(distance(occ.pos, l.hiding_places()[occ.goal->id].center) <=
          l.hiding_places()[occ.goal->id].radius + 1e-9);
    CHECK(occ.live_target());  // hiders still count as targets

    const Vec2 pos = occ.pos;
    step_occupant(occ, l, 30.0, dt);
    CHECK(occ.pos == pos);
}

TEST_CASE("mark_harmed is absorbing and rejects terminal occupants") {
    OccupantState occ;
    occ.status = OccupantStatus::Moving;
    mark_harmed(occ);
    CHECK(occ.status == OccupantStatus::Harmed);
    CHECK(occ.terminal());
    CHECK_FALSE(occ.live_target());
    CHECK_THROWS_AS(mark_harmed(occ), asim::error);

    OccupantState evac;
    evac.status = OccupantStatus::Evacuated;
    CHECK_THROWS_AS(mark_harmed(evac), asim::error);

    OccupantState hiding;
    hiding.status = OccupantStatus::Hiding;
    mark_harmed(hiding);  // hiders can still be harmed
    CHECK(hiding.status == OccupantStatus::Harmed);
}
