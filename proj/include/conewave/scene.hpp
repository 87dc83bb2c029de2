#pragma once

#include <string>
#include <vector>

#include "conewave/geometry.hpp"

namespace conewave {

enum class BoundaryCondition { Dirichlet, Neumann };

// A planar scene: disjoint simple polygonal obstacles inside the disc of
// radius R0, plus an escape radius R1 > R0. Obstacle loops are stored CCW.
struct PolygonScene {
    std::vector<std::vector<Vec2>> obstacles;
    double R0 = 1.0;
    double R1 = 2.0;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;

    double diameter() const { return 2.0 * R0; }
};

// Throws std::invalid_argument with a reason when an invariant is violated:
// non-simple loops, overlapping or nested obstacles, obstacles not strictly
// inside the R0 disc, R1 <= R0, or a vertex with interior angle exactly pi.
void validate_scene(const PolygonScene& scene);

// Orients every loop CCW and drops vertices whose interior angle is pi within
// angle_tol (they are flat and carry no geometry). Used by the file loader.
PolygonScene normalized_scene(PolygonScene scene, double angle_tol = 1e-12);

PolygonScene scene_from_json(const std::string& text);
std::string scene_to_json(const PolygonScene& scene);
PolygonScene load_scene_file(const std::string& path);
void save_scene_file(const PolygonScene& scene, const std::string& path);

// Point location against the obstacle union.
PointSide classify_point(const PolygonScene& scene, const Vec2& p, double tol = 0.0);

// True when the open segment (a,b) never enters an obstacle interior.
// Touching boundaries and running along edges is allowed.
bool segment_in_closed_exterior(const PolygonScene& scene, const Vec2& a, const Vec2& b);

const char* bc_name(BoundaryCondition bc);

}  // namespace conewave
