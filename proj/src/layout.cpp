#include "asim/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "asim/error.hpp"
#include "asim/io.hpp"
#include "asim/navgrid.hpp"

namespace asim {

using nlohmann::json;

namespace {

Vec2 parse_vec2(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw parse_error(what + " must be a [x, y] number pair");
    }
    Vec2 v{j[0].get<double>(), j[1].get<double>()};
    if (!v.finite()) throw validation_error(what + " has non-finite coordinates");
    return v;
}

WallSegment parse_segment(const json& j, const std::string& what) {
    if (!j.contains("a") || !j.contains("b")) {
        throw parse_error(what + " needs fields a and b");
    }
    WallSegment s;
    s.a = parse_vec2(j.at("a"), what + ".a");
    s.b = parse_vec2(j.at("b"), what + ".b");
    if (distance(s.a, s.b) < 1e-9) throw validation_error(what + " is degenerate (a == b)");
    return s;
}

struct EndpointKey {
    int64_t x, y;
    auto operator<=>(const EndpointKey&) const = default;
};

EndpointKey quantize(Vec2 p) {
    return {static_cast<int64_t>(std::llround(p.x * 1e6)),
            static_cast<int64_t>(std::llround(p.y * 1e6))};
}

}  // namespace

ExitMask ExitMask::all_open(const std::vector<Exit>& exits) {
    ExitMask m;
    for (const Exit& e : exits) m.open(e.id);
    return m;
}

BuildingLayout BuildingLayout::from_file(const std::string& path) {
    return from_text(read_text_file(path));
}

BuildingLayout BuildingLayout::from_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("layout is not valid JSON: ") + e.what());
    }

    BuildingLayout layout;
    try {
        if (doc.value("units", "") != std::string("meters")) {
            throw validation_error("layout must declare units: \"meters\"");
        }
        if (!doc.contains("declared_area_m2") || !doc.at("declared_area_m2").is_number()) {
            throw parse_error("missing numeric declared_area_m2");
        }
        layout.declared_area_m2_ = doc.at("declared_area_m2").get<double>();

        if (!doc.contains("walls") || !doc.at("walls").is_array() || doc.at("walls").empty()) {
            throw parse_error("missing non-empty walls array");
        }
        int wall_idx = 0;
        for (const json& jw : doc.at("walls")) {
            const std::string what = "walls[" + std::to_string(wall_idx) + "]";
            WallSegment w = parse_segment(jw, what);
            const std::string kind = jw.value("kind", "");
            if (kind == "exterior") {
                w.kind = WallKind::Exterior;
            } else if (kind == "interior") {
                w.kind = WallKind::Interior;
            } else {
                throw parse_error(what + " kind must be \"exterior\" or \"interior\"");
            }
            layout.walls_.push_back(w);
            ++wall_idx;
        }

        if (!doc.contains("entrance")) throw parse_error("missing entrance");
        layout.entrance_ = parse_segment(doc.at("entrance"), "entrance");
        layout.entrance_.kind = WallKind::Exterior;

        if (!doc.contains("exits") || !doc.at("exits").is_array()) {
            throw parse_error("missing exits array");
        }
        std::set<int> seen_ids;
        for (const json& je : doc.at("exits")) {
            if (!je.contains("id") || !je.at("id").is_number_integer()) {
                throw parse_error("exit entry missing integer id");
            }
            Exit e;
            e.id = je.at("id").get<int>();
            const std::string what = "exit " + std::to_string(e.id);
            if (e.id < 1 || e.id > 6) throw validation_error(what + ": id must be in 1..6");
            if (!seen_ids.insert(e.id).second) throw validation_error(what + ": duplicate id");
            e.portal = parse_segment(je, what + " portal");
            e.portal.kind = WallKind::Exterior;
            e.open = true;
            layout.exits_.push_back(e);
        }
        std::sort(layout.exits_.begin(), layout.exits_.end(),
                  [](const Exit& a, const Exit& b) { return a.id < b.id; });

        if (!doc.contains("hiding_places") || !doc.at("hiding_places").is_array()) {
            throw parse_error("missing hiding_places array");
        }
        int hp_idx = 0;
        for (const json& jh : doc.at("hiding_places")) {
            const std::string what = "hiding_places[" + std::to_string(hp_idx) + "]";
            HidingPlace hp;
            hp.center = parse_vec2(jh.at("center"), what + ".center");
            hp.radius = jh.value("radius", 1.0);
            if (!(hp.radius > 0.0)) throw validation_error(what + ": radius must be positive");
            layout.hiding_places_.push_back(hp);
            ++hp_idx;
        }

        if (!doc.contains("spawn_zone")) throw parse_error("missing spawn_zone");
        layout.spawn_zone_.center = parse_vec2(doc.at("spawn_zone").at("center"), "spawn_zone.center");
        layout.spawn_zone_.side = doc.at("spawn_zone").value("side", 4.0);
        if (!(layout.spawn_zone_.side > 0.0)) throw validation_error("spawn_zone: side must be positive");
    } catch (const json::exception& e) {
        throw parse_error(std::string("layout field access failed: ") + e.what());
    }

    layout.rebuild_derived();
    layout.validate();
    return layout;
}

// Chains exterior walls and portals into the perimeter loop; fills
// perimeter_, bounds_, floor_area_m2_, collision_walls_, open_portals_.
void BuildingLayout::rebuild_derived() {
    struct Edge {
        Vec2 a, b;
        std::string name;
    };
    std::vector<Edge> edges;
    for (size_t i = 0; i < walls_.size(); ++i) {
        if (walls_[i].kind == WallKind::Exterior) {
            edges.push_back({walls_[i].a, walls_[i].b, "exterior wall #" + std::to_string(i)});
        }
    }
    edges.push_back({entrance_.a, entrance_.b, "entrance"});
    for (const Exit& e : exits_) {
        edges.push_back({e.portal.a, e.portal.b, "exit " + std::to_string(e.id)});
    }

    // Endpoint adjacency: every endpoint must pair exactly two edges.
    std::map<EndpointKey, std::vector<size_t>> by_endpoint;
    for (size_t i = 0; i < edges.size(); ++i) {
        by_endpoint[quantize(edges[i].a)].push_back(i);
        by_endpoint[quantize(edges[i].b)].push_back(i);
    }
    auto name_offender = [&](const std::vector<size_t>& idxs) -> std::string {
        // Prefer naming an exit, then the entrance, so invariant violations
        // point at the entity the user controls.
        for (size_t i : idxs) {
            if (edges[i].name.rfind("exit", 0) == 0) return edges[i].name;
        }
        for (size_t i : idxs) {
            if (edges[i].name == "entrance") return edges[i].name;
        }
        return edges[idxs.front()].name;
    };
    for (const auto& [key, idxs] : by_endpoint) {
        if (idxs.size() != 2) {
            throw validation_error(name_offender(idxs) +
                                   ": not on the building perimeter (endpoint joins " +
                                   std::to_string(idxs.size()) + " boundary segments, expected 2)");
        }
    }

    // Walk the loop.
    std::vector<bool> used(edges.size(), false);
    std::vector<Vec2> loop;
    size_t cur = 0;
    Vec2 cursor = edges[0].a;
    loop.push_back(cursor);
    Vec2 next_pt = edges[0].b;
    used[0] = true;
    size_t used_count = 1;
    while (quantize(next_pt) != quantize(loop.front())) {
        loop.push_back(next_pt);
        const auto& candidates = by_endpoint.at(quantize(next_pt));
        const size_t next_edge = (candidates[0] != cur && !used[candidates[0]]) ? candidates[0]
                                                                                : candidates[1];
        if (used[next_edge]) {
            throw validation_error("building perimeter does not close into a single loop");
        }
        used[next_edge] = true;
        ++used_count;
        cur = next_edge;
        next_pt = (quantize(edges[cur].a) == quantize(loop.back())) ? edges[cur].b : edges[cur].a;
    }
    if (used_count != edges.size()) {
        std::vector<size_t> leftover;
        for (size_t i = 0; i < edges.size(); ++i) {
            if (!used[i]) leftover.push_back(i);
        }
        throw validation_error(name_offender(leftover) + ": not on the building perimeter");
    }
    perimeter_ = std::move(loop);
    floor_area_m2_ = std::abs(polygon_area(perimeter_));

    bounds_.min = bounds_.max = perimeter_.front();
    for (const Vec2& p : perimeter_) {
        bounds_.min.x = std::min(bounds_.min.x, p.x);
        bounds_.min.y = std::min(bounds_.min.y, p.y);
        bounds_.max.x = std::max(bounds_.max.x, p.x);
        bounds_.max.y = std::max(bounds_.max.y, p.y);
    }

    collision_walls_ = walls_;
    open_portals_.clear();
    open_portals_.push_back(entrance_);
    for (const Exit& e : exits_) {
        if (e.open) {
            open_portals_.push_back(e.portal);
        } else {
            collision_walls_.push_back(e.portal);  // closed exit reads as exterior wall
        }
    }

    {
        std::lock_guard lock(*nav_mutex_);
        nav_.reset();
    }
}

void BuildingLayout::validate() {
    const double declared = declared_area_m2_;
    if (!(declared > 0.0)) throw validation_error("declared_area_m2 must be positive");
    if (std::abs(floor_area_m2_ - declared) > 0.01 * declared) {
        throw validation_error("floor area " + format_double(floor_area_m2_, 2) +
                               " m2 deviates more than 1% from declared_area_m2 " +
                               format_double(declared, 2));
    }
    if (hiding_places_.size() != 4) {
        throw validation_error("layout must define exactly 4 hiding_places, got " +
                               std::to_string(hiding_places_.size()));
    }

    const NavGrid& grid = nav();
    for (size_t i = 0; i < hiding_places_.size(); ++i) {
        if (!grid.walkable(hiding_places_[i].center)) {
            throw validation_error("hiding_places[" + std::to_string(i) +
                                   "]: center is outside the walkable region");
        }
    }

    // Every grid cell whose center falls in the spawn square must be walkable.
    const Rect zone = spawn_zone_.rect();
    bool any_cell = false;
    for (double y = zone.min.y + NavGrid::kCellSize * 0.5; y < zone.max.y; y += NavGrid::kCellSize) {
        for (double x = zone.min.x + NavGrid::kCellSize * 0.5; x < zone.max.x; x += NavGrid::kCellSize) {
            any_cell = true;
            if (!grid.walkable({x, y})) {
                throw validation_error("spawn_zone: cell at (" + format_double(x, 2) + ", " +
                                       format_double(y, 2) + ") is outside the walkable region");
            }
        }
    }
    if (!any_cell) throw validation_error("spawn_zone: smaller than one grid cell");
}

ExitMask BuildingLayout::current_mask() const {
    ExitMask m;
    for (const Exit& e : exits_) {
        if (e.open) m.open(e.id);
    }
    return m;
}

int BuildingLayout::open_exit_count() const {
    int n = 0;
    for (const Exit& e : exits_) n += e.open ? 1 : 0;
    return n;
}

std::vector<int> BuildingLayout::open_exit_ids() const {
    std::vector<int> ids;
    for (const Exit& e : exits_) {
        if (e.open) ids.push_back(e.id);
    }
    return ids;
}

const Exit& BuildingLayout::exit_by_id(int id) const {
    for (const Exit& e : exits_) {
        if (e.id == id) return e;
    }
    throw error("unknown exit id " + std::to_string(id));
}

BuildingLayout BuildingLayout::with_exit_mask(ExitMask mask) const {
    BuildingLayout out;
    out.walls_ = walls_;
    out.entrance_ = entrance_;
    out.exits_ = exits_;
    out.hiding_places_ = hiding_places_;
    out.spawn_zone_ = spawn_zone_;
    out.declared_area_m2_ = declared_area_m2_;
    for (Exit& e : out.exits_) e.open = mask.is_open(e.id);
    out.rebuild_derived();
    return out;
}

const NavGrid& BuildingLayout::nav() const {
    std::lock_guard lock(*nav_mutex_);
    if (!nav_) nav_ = std::make_shared<const NavGrid>(*this);
    return *nav_;
}

RayHit raycast(const BuildingLayout& layout, Vec2 origin, Vec2 direction,
               std::span<const Vec2> targets, double max_range, double target_radius) {
    return cast_ray(origin, direction, layout.collision_walls(), targets, target_radius, max_range);
}

std::optional<double> shortest_path_distance(const BuildingLayout& layout, Vec2 from, Vec2 to) {
    return layout.nav().distance(from, to);
}

size_t nearest_goal(const BuildingLayout& layout, Vec2 pos, std::span<const Vec2> goals) {
    if (goals.empty()) throw error("nearest_goal: goals must be non-empty");
    const NavGrid& grid = layout.nav();
    std::optional<size_t> best;
    double best_dist = 0.0;
    for (size_t i = 0; i < goals.size(); ++i) {
        const auto d = grid.distance_via_field(grid.field_to(goals[i]), pos);
        if (d && (!best || *d < best_dist)) {
            best = i;
            best_dist = *d;
        }
    }
    if (!best) throw error("nearest_goal: all goals unreachable");
    return *best;
}

}  // namespace asim
