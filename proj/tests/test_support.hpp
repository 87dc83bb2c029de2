#pragma once

#include <string>
#include <vector>

#include "conewave/flow.hpp"
#include "conewave/scene.hpp"
#include "conewave/surface.hpp"

namespace conewave::testing {

// Corpus scenes, loaded from the checked-in json files.
std::string scene_path(const std::string& name);
PolygonScene corpus_scene(const std::string& name);
ConeSurface corpus_surface(const std::string& name);

// Two facing parallel edges trap a horizontal billiard bundle; used to drive
// the non-trapping checker into a genuine Fail.
PolygonScene trapping_scene();

// Shortest-path oracle: Dijkstra over a king+knight grid graph on both sheets,
// glued through boundary nodes shared by the sheets. Overestimates the true
// distance by at most ~2.8% plus O(spacing).
double grid_distance_oracle(const ConeSurface& surface, const SurfacePoint& p,
                            const SurfacePoint& q, int cells_per_axis);

// Plain specular billiard in the plane: reflect off obstacle edges, no cone
// logic. Independent of the surface trace machinery.
struct BilliardPoint {
    Vec2 pos;
    Vec2 dir;
    double t = 0.0;
};
BilliardPoint billiard_state_at(const PolygonScene& scene, const Vec2& start, const Vec2& dir,
                                double t);
int billiard_bounce_count(const PolygonScene& scene, const Vec2& start, const Vec2& dir, double t);

// Free-space wave reference by Hankel quadrature: solves u_tt = lap u + f with
// f(x, t) = amplitude * ricker(t) * exp(-|x - x0|^2 / (2 sigma^2)) truncated at
// t_off, radially via u(r, t) = sigma^2 int e^{-sigma^2 k^2 / 2} T(k, t)
// J0(k r) k dk with T the Duhamel sine convolution. Returns u[radius][time].
std::vector<std::vector<double>> free_space_reference(const std::vector<double>& radii,
                                                      const std::vector<double>& times, double f0,
                                                      double t0, double t_off, double sigma,
                                                      double amplitude);

// Relative L2 distance between two sampled series.
double rel_l2(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace conewave::testing
