#include "conewave/scene.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace conewave {

namespace {

using nlohmann::json;

bool loops_interfere(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec2& p0 = a[i];
        const Vec2& p1 = a[(i + 1) % a.size()];
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (segment_intersect(p0, p1, b[j], b[(j + 1) % b.size()], 1e-12)) return true;
        }
    }
    // No edge crossings: containment would still nest one loop in the other.
    if (point_in_polygon(a[0], b, 0.0) == PointSide::Inside) return true;
    if (point_in_polygon(b[0], a, 0.0) == PointSide::Inside) return true;
    return false;
}

}  // namespace

void validate_scene(const PolygonScene& scene) {
    if (!(scene.R0 >= 0.0)) throw std::invalid_argument("scene: R0 must be nonnegative");
    if (!(scene.R1 > scene.R0)) throw std::invalid_argument("scene: R1 must exceed R0");
    for (std::size_t k = 0; k < scene.obstacles.size(); ++k) {
        const auto& loop = scene.obstacles[k];
        if (loop.size() < 3)
            throw std::invalid_argument("scene: obstacle " + std::to_string(k) + " has fewer than 3 vertices");
        if (!is_simple_polygon(loop))
            throw std::invalid_argument("scene: obstacle " + std::to_string(k) + " is not a simple polygon");
        if (polygon_signed_area(loop) <= 0.0)
            throw std::invalid_argument("scene: obstacle " + std::to_string(k) + " is not CCW oriented");
        for (const Vec2& v : loop) {
            if (v.norm() >= scene.R0)
                throw std::invalid_argument("scene: obstacle " + std::to_string(k) +
                                            " is not strictly inside the R0 disc");
        }
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const double ang = interior_angle(loop, i);
            if (std::abs(ang - kPi) <= 1e-12)
                throw std::invalid_argument("scene: removable cone point (interior angle pi) at obstacle " +
                                            std::to_string(k) + " vertex " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        for (std::size_t j = i + 1; j < scene.obstacles.size(); ++j) {
            if (loops_interfere(scene.obstacles[i], scene.obstacles[j]))
                throw std::invalid_argument("scene: obstacles " + std::to_string(i) + " and " +
                                            std::to_string(j) + " overlap or nest");
        }
    }
}

PolygonScene normalized_scene(PolygonScene scene, double angle_tol) {
    for (auto& loop : scene.obstacles) {
        if (loop.size() >= 3 && polygon_signed_area(loop) < 0.0)
            std::reverse(loop.begin(), loop.end());
        // Drop flat vertices; repeat in case removals create new adjacencies.
        bool changed = true;
        while (changed && loop.size() > 3) {
            changed = false;
            for (std::size_t i = 0; i < loop.size(); ++i) {
                if (std::abs(interior_angle(loop, i) - kPi) <= angle_tol) {
                    loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                    break;
                }
            }
        }
    }
    return scene;
}

PolygonScene scene_from_json(const std::string& text) {
    json j = json::parse(text);
    PolygonScene scene;
    scene.R0 = j.at("R0").get<double>();
    scene.R1 = j.at("R1").get<double>();
    if (j.contains("bc")) {
        const std::string bc = j.at("bc").get<std::string>();
        if (bc == "dirichlet") scene.bc = BoundaryCondition::Dirichlet;
        else if (bc == "neumann") scene.bc = BoundaryCondition::Neumann;
        else throw std::invalid_argument("scene: unknown bc '" + bc + "'");
    }
    if (j.contains("obstacles")) {
        for (const auto& jl : j.at("obstacles")) {
            std::vector<Vec2> loop;
            for (const auto& jv : jl) {
                if (!jv.is_array() || jv.size() != 2)
                    throw std::invalid_argument("scene: vertex must be a [x, y] pair");
                loop.push_back({jv[0].get<double>(), jv[1].get<double>()});
            }
            scene.obstacles.push_back(std::move(loop));
        }
    }
    scene = normalized_scene(std::move(scene));
    validate_scene(scene);
    return scene;
}

std::string scene_to_json(const PolygonScene& scene) {
    json j;
    j["R0"] = scene.R0;
    j["R1"] = scene.R1;
    j["bc"] = bc_name(scene.bc);
    j["obstacles"] = json::array();
    for (const auto& loop : scene.obstacles) {
        json jl = json::array();
        for (const Vec2& v : loop) jl.push_back({v.x, v.y});
        j["obstacles"].push_back(std::move(jl));
    }
    return j.dump(2);
}

PolygonScene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scene file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

void save_scene_file(const PolygonScene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scene file '" + path + "'");
    out << scene_to_json(scene) << "\n";
}

PointSide classify_point(const PolygonScene& scene, const Vec2& p, double tol) {
    for (const auto& loop : scene.obstacles) {
        const PointSide side = point_in_polygon(p, loop, tol);
        if (side != PointSide::Outside) return side;
    }
    return PointSide::Outside;
}

bool segment_in_closed_exterior(const PolygonScene& scene, const Vec2& a, const Vec2& b) {
    // Collect crossing parameters with every obstacle edge, then test the
    // midpoint of each piece. Boundary contact is allowed; interiors are not.
    std::vector<double> cuts = {0.0, 1.0};
    for (const auto& loop : scene.obstacles) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            auto hit = segment_intersect(a, b, loop[i], loop[(i + 1) % loop.size()], 1e-12);
            if (hit) cuts.push_back(std::clamp(hit->t, 0.0, 1.0));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    const Vec2 ab = b - a;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-12) continue;
        const Vec2 mid = a + ab * (0.5 * (cuts[i] + cuts[i + 1]));
        if (classify_point(scene, mid, 0.0) == PointSide::Inside) return false;
    }
    return true;
}

const char* bc_name(BoundaryCondition bc) {
    return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

}  // namespace conewave
