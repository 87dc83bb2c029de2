#include "conewave/surface.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace conewave {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double vertex_capture_radius(const PolygonScene& scene) {
    return 1e-9 * std::max(scene.diameter(), 1e-12);
}

// Shortest-path lengths through the exterior visibility graph over the given
// nodes. Legs are straight chart segments that avoid obstacle interiors.
std::vector<double> visibility_dijkstra(const PolygonScene& scene, const std::vector<Vec2>& nodes,
                                        std::size_t source) {
    const std::size_t n = nodes.size();
    std::vector<double> dist(n, kInf);
    dist[source] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, i] = heap.top();
        heap.pop();
        if (d > dist[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (!segment_in_closed_exterior(scene, nodes[i], nodes[j])) continue;
            const double nd = d + (nodes[j] - nodes[i]).norm();
            if (nd < dist[j]) {
                dist[j] = nd;
                heap.push({nd, j});
            }
        }
    }
    return dist;
}

}  // namespace

double ConeSurface::link_of_direction(const ConePoint& c, const Vec2& dir, int sheet) const {
    const double theta = c.cone_angle();
    double phi = pos_mod(dir.angle() - c.ref_angle, kTwoPi);
    if (kind == SurfaceKind::DoubledExterior) {
        // Directions must stay inside the exterior sector [0, wedge].
        if (phi > c.wedge) {
            const double over = std::min(phi - c.wedge, kTwoPi - phi);
            if (over > 1e-9)
                throw std::invalid_argument("direction points into the obstacle at cone " +
                                            std::to_string(c.id));
            phi = (phi - c.wedge < kTwoPi - phi) ? c.wedge : 0.0;
        }
        return sheet == 0 ? phi : pos_mod(2.0 * c.wedge - phi, theta);
    }
    // Branched cover: the gluing is orientation-preserving, the second sheet
    // continues the development by a full turn.
    return pos_mod(phi + kTwoPi * sheet, theta);
}

SurfacePoint ConeSurface::direction_of_link(const ConePoint& c, double link, Vec2* dir_out) const {
    const double theta = c.cone_angle();
    const double lam = pos_mod(link, theta);
    int sheet;
    double phi;
    if (kind == SurfaceKind::DoubledExterior) {
        if (lam <= c.wedge) {
            sheet = 0;
            phi = lam;
        } else {
            sheet = 1;
            phi = 2.0 * c.wedge - lam;
        }
    } else {
        sheet = lam < kTwoPi ? 0 : 1;
        phi = lam - kTwoPi * sheet;
    }
    if (dir_out) *dir_out = unit_vector(c.ref_angle + phi);
    return {c.position, sheet};
}

Location ConeSurface::locate(const SurfacePoint& p) const {
    if (p.sheet != 0 && p.sheet != 1) throw std::invalid_argument("sheet index must be 0 or 1");
    for (const ConePoint& c : cones) {
        if ((p.pos - c.position).norm() <= eps_hit) return {LocateResult::AtConePoint, c.id, -1};
    }
    if (kind == SurfaceKind::DoubledExterior &&
        classify_point(scene, p.pos, 0.0) == PointSide::Inside)
        throw std::invalid_argument("interior point is not on the surface");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (point_segment_distance(p.pos, edges[e].a, edges[e].b) <= eps_hit)
            return {LocateResult::OnEdge, -1, static_cast<int>(e)};
    }
    return {LocateResult::SurfacePoint, -1, -1};
}

double ConeSurface::min_cone_distance() const {
    if (cones.size() < 2) return kInf;
    if (kind == SurfaceKind::SlitCover) {
        // Cuts do not obstruct straight segments, so chart distance is geodesic.
        double best = kInf;
        for (std::size_t i = 0; i < cones.size(); ++i)
            for (std::size_t j = i + 1; j < cones.size(); ++j)
                best = std::min(best, (cones[i].position - cones[j].position).norm());
        return best;
    }
    std::vector<Vec2> nodes;
    nodes.reserve(cones.size());
    for (const ConePoint& c : cones) nodes.push_back(c.position);
    double best = kInf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto dist = visibility_dijkstra(scene, nodes, i);
        for (std::size_t j = i + 1; j < nodes.size(); ++j) best = std::min(best, dist[j]);
    }
    return best;
}

double ConeSurface::distance(const SurfacePoint& p, const SurfacePoint& q) const {
    double best = kInf;
    if (kind == SurfaceKind::SlitCover) {
        // Straight chart segment: crossing parity must land on q's sheet.
        int crossings = 0;
        for (const GluingEdge& e : edges) {
            auto hit = segment_intersect(p.pos, q.pos, e.a, e.b, 0.0);
            if (hit && hit->t > 1e-12 && hit->t < 1.0 - 1e-12 && hit->s > 1e-12 && hit->s < 1.0 - 1e-12)
                ++crossings;
        }
        if ((p.sheet ^ (crossings & 1)) == q.sheet) best = (q.pos - p.pos).norm();
        // Any sheet is reachable through a cone point.
        for (const ConePoint& c : cones)
            best = std::min(best, (p.pos - c.position).norm() + (q.pos - c.position).norm());
        return best;
    }

    if (p.sheet == q.sheet && segment_in_closed_exterior(scene, p.pos, q.pos))
        best = (q.pos - p.pos).norm();

    if (p.sheet != q.sheet) {
        // Single gluing crossing: unfold q by reflecting across the edge line.
        for (const GluingEdge& e : edges) {
            const Vec2 ed = (e.b - e.a).normalized();
            const Vec2 foot = e.a + ed * (q.pos - e.a).dot(ed);
            const Vec2 q_mirror = foot * 2.0 - q.pos;
            auto hit = segment_intersect(p.pos, q_mirror, e.a, e.b, 1e-12);
            if (!hit) continue;
            if (!segment_in_closed_exterior(scene, p.pos, hit->point)) continue;
            if (!segment_in_closed_exterior(scene, q.pos, hit->point)) continue;
            best = std::min(best, (q_mirror - p.pos).norm());
        }
    }

    // Paths through cone points connect sheets freely.
    if (!cones.empty()) {
        std::vector<Vec2> nodes;
        nodes.push_back(p.pos);
        for (const ConePoint& c : cones) nodes.push_back(c.position);
        nodes.push_back(q.pos);
        const auto dp = visibility_dijkstra(scene, nodes, 0);
        const auto dq = visibility_dijkstra(scene, nodes, nodes.size() - 1);
        for (std::size_t c = 1; c + 1 < nodes.size(); ++c)
            if (dp[c] < kInf && dq[c] < kInf) best = std::min(best, dp[c] + dq[c]);
    }
    return best;
}

ConeSurface double_exterior(const PolygonScene& scene) {
    validate_scene(scene);
    ConeSurface s;
    s.kind = SurfaceKind::DoubledExterior;
    s.scene = scene;
    s.eps_hit = vertex_capture_radius(scene);

    for (const auto& loop : scene.obstacles) {
        const std::size_t n = loop.size();
        const int base = static_cast<int>(s.cones.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double theta_int = interior_angle(loop, i);
            ConePoint c;
            c.id = base + static_cast<int>(i);
            c.position = loop[i];
            c.wedge = kTwoPi - theta_int;
            c.ref_angle = (loop[(i + n - 1) % n] - loop[i]).angle();
            s.cones.push_back(c);
        }
        for (std::size_t i = 0; i < n; ++i) {
            GluingEdge e;
            e.a = loop[i];
            e.b = loop[(i + 1) % n];
            e.cone_a = base + static_cast<int>(i);
            e.cone_b = base + static_cast<int>((i + 1) % n);
            e.style = GluingStyle::Mirror;
            s.edges.push_back(e);
        }
    }
    return s;
}

ConeSurface slit_cover(const std::vector<std::pair<Vec2, Vec2>>& slits, double R0, double R1) {
    if (!(R1 > R0)) throw std::invalid_argument("slit cover: R1 must exceed R0");
    ConeSurface s;
    s.kind = SurfaceKind::SlitCover;
    s.scene.obstacles.clear();
    s.scene.R0 = R0;
    s.scene.R1 = R1;
    s.eps_hit = vertex_capture_radius(s.scene);

    for (std::size_t k = 0; k < slits.size(); ++k) {
        const auto& [a, b] = slits[k];
        if ((b - a).norm() <= 0.0)
            throw std::invalid_argument("slit cover: slit " + std::to_string(k) + " has zero length");
        if (a.norm() >= R0 || b.norm() >= R0)
            throw std::invalid_argument("slit cover: slit " + std::to_string(k) +
                                        " is not strictly inside the R0 disc");
        for (std::size_t j = 0; j < k; ++j) {
            if (segment_intersect(a, b, slits[j].first, slits[j].second, 1e-12))
                throw std::invalid_argument("slit cover: slits " + std::to_string(j) + " and " +
                                            std::to_string(k) + " intersect");
        }
        ConePoint ca, cb;
        ca.id = static_cast<int>(s.cones.size());
        ca.position = a;
        ca.wedge = kTwoPi;
        ca.ref_angle = (b - a).angle();
        s.cones.push_back(ca);
        cb.id = static_cast<int>(s.cones.size());
        cb.position = b;
        cb.wedge = kTwoPi;
        cb.ref_angle = (a - b).angle();
        s.cones.push_back(cb);

        GluingEdge e;
        e.a = a;
        e.b = b;
        e.cone_a = ca.id;
        e.cone_b = cb.id;
        e.style = GluingStyle::BranchCut;
        s.edges.push_back(e);
    }
    return s;
}

ConeSurface surface_from_json(const std::string& text) {
    json j = json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "doubled_exterior") {
        return double_exterior(scene_from_json(j.at("scene").dump()));
    }
    if (kind == "slit_cover") {
        std::vector<std::pair<Vec2, Vec2>> slits;
        for (const auto& js : j.at("slits")) {
            if (!js.is_array() || js.size() != 2)
                throw std::invalid_argument("surface: slit must be a pair of points");
            slits.push_back({{js[0][0].get<double>(), js[0][1].get<double>()},
                             {js[1][0].get<double>(), js[1][1].get<double>()}});
        }
        return slit_cover(slits, j.at("R0").get<double>(), j.at("R1").get<double>());
    }
    throw std::invalid_argument("surface: unknown kind '" + kind + "'");
}

std::string surface_to_json(const ConeSurface& surface) {
    json j;
    if (surface.kind == SurfaceKind::DoubledExterior) {
        j["kind"] = "doubled_exterior";
        j["scene"] = json::parse(scene_to_json(surface.scene));
    } else {
        j["kind"] = "slit_cover";
        j["R0"] = surface.scene.R0;
        j["R1"] = surface.scene.R1;
        j["slits"] = json::array();
        for (const GluingEdge& e : surface.edges)
            j["slits"].push_back({{e.a.x, e.a.y}, {e.b.x, e.b.y}});
    }
    return j.dump(2);
}

ConeSurface load_surface_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open surface file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return surface_from_json(ss.str());
}

void save_surface_file(const ConeSurface& surface, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write surface file '" + path + "'");
    out << surface_to_json(surface) << "\n";
}

}  // namespace conewave
