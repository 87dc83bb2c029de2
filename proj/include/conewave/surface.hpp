#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conewave/geometry.hpp"
#include "conewave/scene.hpp"

namespace conewave {

// A point on a two-sheet flat surface: planar chart coordinates plus sheet tag.
struct SurfacePoint {
    Vec2 pos;
    int sheet = 0;
};

// Cone point: a branch vertex of the surface. The link is a circle of
// circumference 2 * wedge; directions develop onto it via ref_angle.
struct ConePoint {
    int id = -1;
    Vec2 position;
    double wedge = 0.0;      // angular extent of one sheet's sector at the vertex
    double ref_angle = 0.0;  // chart angle of the sector's start ray (sheet 0)
    double cone_angle() const { return 2.0 * wedge; }
};

enum class GluingStyle {
    Mirror,    // doubled exterior: crossing reflects the direction and swaps sheets
    BranchCut  // slit cover: crossing keeps the direction and swaps sheets
};

struct GluingEdge {
    Vec2 a;
    Vec2 b;
    int cone_a = -1;  // cone point id at endpoint a (-1 if none)
    int cone_b = -1;
    GluingStyle style = GluingStyle::Mirror;
};

enum class SurfaceKind { DoubledExterior, SlitCover };
enum class MetricKind { Flat, Curved };

enum class LocateResult { SurfacePoint, OnEdge, AtConePoint };

struct Location {
    LocateResult kind = LocateResult::SurfacePoint;
    int cone = -1;
    int edge = -1;
};

// Flat surface with cone singularities, built by doubling a polygon exterior
// or by a two-sheet branched cover along slits. Two sheets in either case.
struct ConeSurface {
    SurfaceKind kind = SurfaceKind::DoubledExterior;
    MetricKind metric = MetricKind::Flat;
    PolygonScene scene;              // doubling generator; slit covers keep R0/R1 here
    std::vector<GluingEdge> edges;
    std::vector<ConePoint> cones;
    double eps_hit = 0.0;            // vertex-capture radius for the flow

    double escape_radius() const { return scene.R1; }

    // Link coordinate in [0, cone_angle) of a unit direction at cone c.
    double link_of_direction(const ConePoint& c, const Vec2& dir, int sheet) const;
    // Inverse map: link coordinate to (unit direction, sheet).
    SurfacePoint direction_of_link(const ConePoint& c, double link, Vec2* dir_out) const;

    Location locate(const SurfacePoint& p) const;

    // Shortest geodesic distance between distinct cone points (+inf if < 2 cones).
    double min_cone_distance() const;

    // Geodesic distance upper bound from straight, one-crossing and
    // through-vertex path families. Exact on convex single-obstacle doublings
    // and slit covers; used for isometry checks, not for flow decisions.
    double distance(const SurfacePoint& p, const SurfacePoint& q) const;

    SurfacePoint swapped(const SurfacePoint& p) const { return {p.pos, 1 - p.sheet}; }
};

// Doubles the exterior of a polygon scene across its boundary. Every obstacle
// vertex becomes a cone point of angle 2 * (2*pi - interior); rejects scenes
// carrying a removable cone point (interior angle exactly pi).
ConeSurface double_exterior(const PolygonScene& scene);

// Two-sheet branched cover of the plane, cut along pairwise disjoint open
// slits. Every slit endpoint is a cone point of angle 4*pi.
ConeSurface slit_cover(const std::vector<std::pair<Vec2, Vec2>>& slits, double R0, double R1);

ConeSurface surface_from_json(const std::string& text);
std::string surface_to_json(const ConeSurface& surface);
ConeSurface load_surface_file(const std::string& path);
void save_surface_file(const ConeSurface& surface, const std::string& path);

}  // namespace conewave
