#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "conewave/surface.hpp"
#include "test_support.hpp"

using namespace conewave;
using namespace conewave::testing;

TEST_CASE("doubling the unit square yields four cone points of angle 3 pi") {
    const ConeSurface s = corpus_surface("square.json");
    REQUIRE(s.cones.size() == 4);
    for (const ConePoint& c : s.cones) {
        CHECK(std::abs(c.cone_angle() - 3.0 * kPi) <= 1e-12);
        CHECK(std::abs(c.wedge - 1.5 * kPi) <= 1e-12);
    }
    CHECK(s.edges.size() == 4);
    CHECK(s.eps_hit > 0.0);
    CHECK(s.min_cone_distance() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("flat vertices are rejected raw and dropped by normalization") {
    PolygonScene scene;
    scene.obstacles = {{{-0.5, -0.5}, {0.0, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
    scene.R0 = 1.0;
    scene.R1 = 2.0;
    CHECK_THROWS_AS(validate_scene(scene), std::invalid_argument);

    const PolygonScene cleaned = normalized_scene(scene);
    const ConeSurface s = double_exterior(cleaned);
    CHECK(s.cones.size() == 4);
}

TEST_CASE("scene invariants are enforced") {
    PolygonScene bad;
    bad.obstacles = {{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
    bad.R0 = 1.0;
    bad.R1 = 0.5;
    CHECK_THROWS_AS(validate_scene(bad), std::invalid_argument);

    PolygonScene outside;
    outside.obstacles = {{{-0.5, -0.5}, {5.0, -0.5}, {5.0, 0.5}, {-0.5, 0.5}}};
    outside.R0 = 1.0;
    outside.R1 = 2.0;
    CHECK_THROWS_AS(validate_scene(outside), std::invalid_argument);

    PolygonScene overlapping;
    overlapping.obstacles = {{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}},
                             {{0.0, 0.0}, {0.8, 0.0}, {0.8, 0.8}, {0.0, 0.8}}};
    overlapping.R0 = 2.0;
    overlapping.R1 = 3.0;
    CHECK_THROWS_AS(validate_scene(overlapping), std::invalid_argument);
}

TEST_CASE("link coordinates round-trip at every square cone") {
    const ConeSurface s = corpus_surface("square.json");
    for (const ConePoint& c : s.cones) {
        for (int k = 0; k < 40; ++k) {
            const double link = c.cone_angle() * (k + 0.5) / 40.0;
            Vec2 dir;
            const SurfacePoint at = s.direction_of_link(c, link, &dir);
            CHECK(std::abs(dir.norm() - 1.0) <= 1e-12);
            const double back = s.link_of_direction(c, dir, at.sheet);
            CHECK(std::abs(back - link) <= 1e-9);
        }
    }
}

TEST_CASE("locate distinguishes cones, edges, and plain points") {
    const ConeSurface s = corpus_surface("square.json");
    CHECK(s.locate({s.cones[0].position, 0}).kind == LocateResult::AtConePoint);
    CHECK(s.locate({{0.0, -0.5}, 0}).kind == LocateResult::OnEdge);
    CHECK(s.locate({{1.2, 0.3}, 1}).kind == LocateResult::SurfacePoint);
}

TEST_CASE("sheet swap is a distance isometry") {
    const ConeSurface s = corpus_surface("square.json");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-1.9, 1.9);
    std::uniform_int_distribution<int> sheet(0, 1);
    int checked = 0;
    while (checked < 200) {
        const SurfacePoint p{{coord(rng), coord(rng)}, sheet(rng)};
        const SurfacePoint q{{coord(rng), coord(rng)}, sheet(rng)};
        if (classify_point(s.scene, p.pos) != PointSide::Outside) continue;
        if (classify_point(s.scene, q.pos) != PointSide::Outside) continue;
        const double d = s.distance(p, q);
        const double d_swapped = s.distance({p.pos, 1 - p.sheet}, {q.pos, 1 - q.sheet});
        CHECK(std::abs(d - d_swapped) <= 1e-12 * (1.0 + d));
        ++checked;
    }
}

TEST_CASE("distance agrees with the grid shortest-path oracle") {
    const ConeSurface s = corpus_surface("square.json");
    const int n = 201;
    const double g = 2.0 * s.escape_radius() * 1.05 / (n - 1);

    const SurfacePoint pairs[][2] = {
        {{{1.2, 0.8}, 0}, {{0.9, 1.1}, 0}},     // direct line of sight
        {{{-1.0, 0.02}, 0}, {{1.0, 0.03}, 0}},  // wraps around the obstacle
        {{{0.0, -0.8}, 0}, {{0.0, -0.9}, 1}},   // one gluing crossing
        {{{-1.2, -0.7}, 0}, {{1.1, 0.9}, 1}},   // crossing plus wrap
        {{{0.6, 0.6}, 0}, {{-0.6, -0.6}, 1}},   // tight around a corner
    };
    for (const auto& pr : pairs) {
        const double d = s.distance(pr[0], pr[1]);
        const double oracle = grid_distance_oracle(s, pr[0], pr[1], n);
        // The graph overestimates path length by at most ~2.8%, but snapping
        // the two endpoints to nodes can shave up to sqrt(2) g off.
        CHECK(d <= oracle + std::sqrt(2.0) * g + 1e-9);
        CHECK(d >= oracle / 1.035 - 4.0 * g);
    }
}

TEST_CASE("exact crossing distance through a straight edge") {
    const ConeSurface s = corpus_surface("square.json");
    // Perpendicular through the bottom edge: 0.3 down to the edge, 0.4 onward.
    const double d = s.distance({{0.0, -0.8}, 0}, {{0.0, -0.9}, 1});
    CHECK(d == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("slit cover carries 4 pi cones at every slit endpoint") {
    const ConeSurface s = corpus_surface("slit_cover.json");
    REQUIRE(s.kind == SurfaceKind::SlitCover);
    REQUIRE(s.cones.size() == 6);
    for (const ConePoint& c : s.cones) CHECK(std::abs(c.cone_angle() - 4.0 * kPi) <= 1e-12);
    CHECK(s.min_cone_distance() == doctest::Approx(1.0).epsilon(1e-14));

    for (int k = 0; k < 16; ++k) {
        const double link = 4.0 * kPi * (k + 0.5) / 16.0;
        Vec2 dir;
        const SurfacePoint at = s.direction_of_link(s.cones[0], link, &dir);
        const double back = s.link_of_direction(s.cones[0], dir, at.sheet);
        CHECK(std::abs(back - link) <= 1e-9);
    }
}

TEST_CASE("surface json round-trips") {
    const ConeSurface s = corpus_surface("fig1_two_obstacles.json");
    const std::string path = "roundtrip_surface.json";
    save_surface_file(s, path);
    const ConeSurface t = load_surface_file(path);
    REQUIRE(t.cones.size() == s.cones.size());
    for (std::size_t i = 0; i < s.cones.size(); ++i) {
        CHECK(std::abs(t.cones[i].wedge - s.cones[i].wedge) <= 1e-15);
        CHECK((t.cones[i].position - s.cones[i].position).norm() <= 1e-15);
    }
    CHECK(t.edges.size() == s.edges.size());
    CHECK(t.escape_radius() == s.escape_radius());
}

TEST_CASE("malformed scene json is rejected") {
    CHECK_THROWS(scene_from_json("{ not json"));
    CHECK_THROWS(scene_from_json("{\"R0\": 1.0}"));
}
