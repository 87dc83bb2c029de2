#include "conewave/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace conewave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double length_scale(const ConeSurface& s) { return std::max(s.scene.diameter(), 1.0); }

// A straight ray can only leave the feature it starts on, never re-cross it,
// so sub-scale intersection parameters are departure artifacts.
double departure_eps(const ConeSurface& s) { return 1e-12 * length_scale(s); }

struct Frame {
    RayState ray;
    int exclude_edge = -1;
    int exclude_cone = -1;
    std::vector<ChainSegment> segments;
    std::vector<Interaction> interactions;
};

GeodesicChain close_chain(Frame&& f, Terminal terminal, double total_time, bool truncated) {
    GeodesicChain c;
    c.segments = std::move(f.segments);
    c.interactions = std::move(f.interactions);
    c.terminal = terminal;
    c.total_time = total_time;
    c.truncated = truncated;
    return c;
}

}  // namespace

RayState GeodesicChain::state_at(double t) const {
    if (segments.empty()) throw std::logic_error("state_at on empty chain");
    double t0 = total_time;
    for (const ChainSegment& s : segments) t0 -= s.length;  // chain start time
    double acc = t0;
    for (const ChainSegment& s : segments) {
        if (t <= acc + s.length || &s == &segments.back()) {
            double along = t - acc;
            if (&s == &segments.back() && terminal != Terminal::Escaped)
                along = std::min(along, s.length);
            along = std::max(along, 0.0);
            return {{s.start.pos + s.dir * along, s.start.sheet}, s.dir, acc + along};
        }
        acc += s.length;
    }
    const ChainSegment& s = segments.back();
    return {{s.start.pos + s.dir * s.length, s.start.sheet}, s.dir, total_time};
}

SurfacePoint GeodesicChain::end_point() const {
    const ChainSegment& s = segments.back();
    return {s.start.pos + s.dir * s.length, s.start.sheet};
}

Vec2 GeodesicChain::end_dir() const { return segments.back().dir; }

StepEvent step(const ConeSurface& surface, const RayState& ray, int exclude_edge,
               int exclude_cone) {
    const Vec2 pos = ray.point.pos;
    const Vec2 dir = ray.dir;
    const double eps_t = departure_eps(surface);
    const double eps_hit = surface.eps_hit;

    // Earliest gluing-edge crossing.
    double te_best = kInf;
    int edge_best = -1;
    Vec2 edge_point;
    for (std::size_t e = 0; e < surface.edges.size(); ++e) {
        if (static_cast<int>(e) == exclude_edge) continue;
        const GluingEdge& ge = surface.edges[e];
        const Vec2 eseg = ge.b - ge.a;
        const double den = dir.cross(eseg);
        if (std::abs(den) < 1e-16 * eseg.norm()) continue;  // parallel
        const Vec2 w = ge.a - pos;
        const double t = w.cross(eseg) / den;
        const double s = w.cross(dir) / den;
        if (t <= eps_t || s < 0.0 || s > 1.0) continue;
        if (t < te_best) {
            te_best = t;
            edge_best = static_cast<int>(e);
            edge_point = pos + dir * t;
        }
    }

    // Earliest cone-point capture.
    double tv_best = kInf;
    int cone_best = -1;
    for (const ConePoint& c : surface.cones) {
        if (c.id == exclude_cone) continue;
        const Vec2 rel = c.position - pos;
        const double tv = rel.dot(dir);
        if (tv <= eps_t) continue;
        const double miss = std::abs(rel.cross(dir));
        if (miss > eps_hit) continue;
        if (tv < tv_best) {
            tv_best = tv;
            cone_best = c.id;
        }
    }

    // Edge crossings grazing an endpoint resolve as that cone point.
    if (edge_best >= 0) {
        const GluingEdge& ge = surface.edges[edge_best];
        for (int cid : {ge.cone_a, ge.cone_b}) {
            if (cid < 0 || cid == exclude_cone) continue;
            const ConePoint& c = surface.cones[static_cast<std::size_t>(cid)];
            if ((edge_point - c.position).norm() <= eps_hit && te_best < tv_best) {
                tv_best = te_best;
                cone_best = cid;
            }
        }
    }

    // First time the outgoing condition <z, dz> > 0, |z| > R1 holds.
    const double r1 = surface.escape_radius();
    const double radial = pos.dot(dir);
    double t_escape;
    if (radial > 0.0 && pos.norm() > r1) {
        t_escape = 0.0;
    } else {
        const double b2 = std::max(pos.norm2() - radial * radial, 0.0);
        if (b2 < r1 * r1) {
            t_escape = -radial + std::sqrt(r1 * r1 - b2);
        } else {
            t_escape = std::max(-radial, 0.0);  // perigee of a ray missing the ball
        }
    }

    StepEvent ev;
    if (tv_best <= te_best + eps_hit && tv_best < t_escape) {
        const ConePoint& c = surface.cones[static_cast<std::size_t>(cone_best)];
        ev.kind = StepEvent::Kind::ConePointHit;
        ev.t = tv_best;
        ev.cone = cone_best;
        ev.after = {{c.position, ray.point.sheet}, dir, ray.time + tv_best};
        return ev;
    }
    if (te_best < t_escape) {
        const GluingEdge& ge = surface.edges[edge_best];
        ev.kind = StepEvent::Kind::EdgeCross;
        ev.t = te_best;
        ev.edge = edge_best;
        Vec2 out_dir = dir;
        if (ge.style == GluingStyle::Mirror) out_dir = reflect_dir(dir, (ge.b - ge.a).normalized());
        ev.after = {{edge_point, 1 - ray.point.sheet}, out_dir, ray.time + te_best};
        return ev;
    }
    ev.kind = StepEvent::Kind::EscapeSphere;
    ev.t = t_escape;
    ev.after = {{pos + dir * t_escape, ray.point.sheet}, dir, ray.time + t_escape};
    return ev;
}

std::vector<double> continuations(const ConePoint& cone, double link_in,
                                  const ContinuationPolicy& policy) {
    const double theta = cone.cone_angle();
    std::vector<double> out;
    switch (policy.mode) {
        case ContinuationPolicy::Mode::Stop:
            break;
        case ContinuationPolicy::Mode::GeometricBranch:
            // Points of the link at metric distance exactly pi; none exist when
            // the circumference is below 2*pi (max distance theta/2 < pi).
            if (theta > kTwoPi + 1e-12) {
                out.push_back(pos_mod(link_in + kPi, theta));
                out.push_back(pos_mod(link_in - kPi, theta));
            }
            break;
        case ContinuationPolicy::Mode::DiffractiveFan: {
            const int k = std::max(policy.fan_k, 1);
            out.reserve(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j)
                out.push_back(pos_mod(link_in + theta * static_cast<double>(j) / k, theta));
            break;
        }
    }
    return out;
}

InteractionKind classify_interaction(const ConePoint& cone, double link_in, double link_out,
                                     double tol_g) {
    const double d = circle_dist(link_in, link_out, cone.cone_angle());
    return std::abs(d - kPi) <= tol_g ? InteractionKind::Geometric
                                      : InteractionKind::DiffractiveStrict;
}

TraceResult trace(const ConeSurface& surface, const RayState& start, double horizon,
                  const ContinuationPolicy& policy, const TraceOptions& opts) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("trace: horizon must be nonnegative");
    TraceResult result;

    Frame first;
    first.ray = start;
    first.ray.dir = start.dir.normalized();
    const Location loc = surface.locate(start.point);
    if (loc.kind == LocateResult::AtConePoint) {
        // Departures from a cone are anchored at the vertex itself.
        first.ray.point.pos = surface.cones[static_cast<std::size_t>(loc.cone)].position;
        first.exclude_cone = loc.cone;
    }

    std::vector<Frame> frames;
    frames.push_back(std::move(first));

    while (!frames.empty()) {
        if (static_cast<long>(result.chains.size()) >= opts.branch_cap) {
            result.truncated = true;
            for (Frame& f : frames)
                result.chains.push_back(close_chain(std::move(f), Terminal::Horizon, f.ray.time, true));
            break;
        }
        Frame f = std::move(frames.back());
        frames.pop_back();

        for (;;) {
            const double remaining = horizon - f.ray.time;
            if (remaining <= 0.0) {
                f.segments.push_back({f.ray.point, f.ray.dir, 0.0});
                result.chains.push_back(close_chain(std::move(f), Terminal::Horizon, horizon, false));
                break;
            }
            const StepEvent ev = step(surface, f.ray, f.exclude_edge, f.exclude_cone);
            if (ev.t > remaining) {
                f.segments.push_back({f.ray.point, f.ray.dir, remaining});
                result.chains.push_back(close_chain(std::move(f), Terminal::Horizon, horizon, false));
                break;
            }
            if (ev.kind == StepEvent::Kind::EscapeSphere) {
                f.segments.push_back({f.ray.point, f.ray.dir, ev.t});
                result.chains.push_back(
                    close_chain(std::move(f), Terminal::Escaped, ev.after.time, false));
                break;
            }
            if (ev.kind == StepEvent::Kind::EdgeCross) {
                f.segments.push_back({f.ray.point, f.ray.dir, ev.t});
                f.ray = ev.after;
                f.exclude_edge = ev.edge;
                f.exclude_cone = -1;
                continue;
            }
            // Cone-point hit: branch over the policy's continuations.
            f.segments.push_back({f.ray.point, f.ray.dir, ev.t});
            const ConePoint& cone = surface.cones[static_cast<std::size_t>(ev.cone)];
            const double link_in =
                surface.link_of_direction(cone, -f.ray.dir, ev.after.point.sheet);
            const std::vector<double> outs = continuations(cone, link_in, policy);
            if (outs.empty()) {
                result.chains.push_back(
                    close_chain(std::move(f), Terminal::AtConePoint, ev.after.time, false));
                break;
            }
            const bool room =
                static_cast<long>(result.chains.size() + frames.size() + outs.size()) <=
                opts.branch_cap;
            if (!room) {
                result.truncated = true;
                result.chains.push_back(
                    close_chain(std::move(f), Terminal::AtConePoint, ev.after.time, true));
                break;
            }
            for (double link_out : outs) {
                Frame child;
                child.segments = f.segments;
                child.interactions = f.interactions;
                child.interactions.push_back({ev.cone, ev.after.time, link_in, link_out,
                                              classify_interaction(cone, link_in, link_out, opts.tol_g)});
                Vec2 out_dir;
                const SurfacePoint sp = surface.direction_of_link(cone, link_out, &out_dir);
                child.ray = {sp, out_dir, ev.after.time};
                child.exclude_cone = ev.cone;
                child.exclude_edge = -1;
                frames.push_back(std::move(child));
            }
            break;
        }
    }
    return result;
}

namespace {

double match_error(const GeodesicChain& chain, const RayState& q, double t) {
    const RayState st = chain.state_at(t);
    if (st.point.sheet != q.point.sheet) return kInf;
    return std::max((st.point.pos - q.point.pos).norm(), angle_between(st.dir, q.dir));
}

// Re-trace the tail of a chain from its last interaction with a substituted
// outgoing link; returns the match error against q at time t.
double tail_error(const ConeSurface& surface, const GeodesicChain& chain, double link_out,
                  const RayState& q, double t) {
    const Interaction& last = chain.interactions.back();
    const ConePoint& cone = surface.cones[static_cast<std::size_t>(last.cone)];
    Vec2 dir;
    const SurfacePoint sp = surface.direction_of_link(cone, link_out, &dir);
    const RayState from = {sp, dir, last.t_in};
    const TraceResult tail = trace(surface, from, t, ContinuationPolicy::stop());
    double best = kInf;
    for (const GeodesicChain& c : tail.chains) {
        if (c.terminal == Terminal::AtConePoint && c.total_time < t) continue;
        best = std::min(best, match_error(c, q, t));
    }
    return best;
}

}  // namespace

Ternary relates(const ConeSurface& surface, const RayState& p, const RayState& q, double t,
                RelationKind kind, double tol, const TraceOptions& opts) {
    bool truncated = false;

    const TraceResult geo = trace(surface, p, t, ContinuationPolicy::geometric(), opts);
    truncated |= geo.truncated;
    for (const GeodesicChain& c : geo.chains)
        if (match_error(c, q, t) <= tol) return Ternary::True;

    if (kind == RelationKind::Diffractive) {
        const GeodesicChain* best_chain = nullptr;
        double best_err = kInf;
        int best_k = 0;
        for (int k : {64, 256}) {
            const TraceResult fan = trace(surface, p, t, ContinuationPolicy::fan(k), opts);
            truncated |= fan.truncated;
            for (const GeodesicChain& c : fan.chains) {
                const double err = match_error(c, q, t);
                if (err <= tol) return Ternary::True;
                if (!c.interactions.empty() && err < best_err) {
                    best_err = err;
                    best_chain = &c;
                    best_k = k;
                }
            }
            // Polish the final outgoing link of the best fan candidate by
            // golden-section search inside its fan cell.
            if (best_chain) {
                const Interaction& last = best_chain->interactions.back();
                const double theta =
                    surface.cones[static_cast<std::size_t>(last.cone)].cone_angle();
                double lo = last.link_out - theta / best_k;
                double hi = last.link_out + theta / best_k;
                const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                double a = lo, b = hi;
                double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
                double f1 = tail_error(surface, *best_chain, x1, q, t);
                double f2 = tail_error(surface, *best_chain, x2, q, t);
                for (int it = 0; it < 60; ++it) {
                    if (f1 < f2) {
                        b = x2; x2 = x1; f2 = f1;
                        x1 = b - gr * (b - a);
                        f1 = tail_error(surface, *best_chain, x1, q, t);
                    } else {
                        a = x1; x1 = x2; f1 = f2;
                        x2 = a + gr * (b - a);
                        f2 = tail_error(surface, *best_chain, x2, q, t);
                    }
                }
                if (std::min(f1, f2) <= tol) return Ternary::True;
                best_chain = nullptr;
                best_err = kInf;
            }
        }
    }
    return truncated ? Ternary::Indeterminate : Ternary::False;
}

std::optional<DiffractivePath> shortest_diffractive_path(const ConeSurface& surface, const Vec2& a,
                                                         const Vec2& b) {
    const std::size_t nc = surface.cones.size();
    std::vector<Vec2> nodes;
    nodes.reserve(nc + 2);
    nodes.push_back(a);
    for (const ConePoint& c : surface.cones) nodes.push_back(c.position);
    nodes.push_back(b);

    auto leg_ok = [&](const Vec2& u, const Vec2& v) {
        if (surface.kind == SurfaceKind::SlitCover) return true;  // cuts do not obstruct
        return segment_in_closed_exterior(surface.scene, u, v);
    };

    const std::size_t n = nodes.size();
    std::vector<double> dist(n, kInf);
    std::vector<int> prev(n, -1);
    dist[0] = 0.0;
    std::vector<bool> done(n, false);
    for (;;) {
        std::size_t u = n;
        double du = kInf;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && dist[i] < du) { du = dist[i]; u = i; }
        if (u == n) break;
        done[u] = true;
        if (u == n - 1) break;
        for (std::size_t v = 0; v < n; ++v) {
            if (done[v] || !leg_ok(nodes[u], nodes[v])) continue;
            const double nd = du + (nodes[v] - nodes[u]).norm();
            if (nd < dist[v]) { dist[v] = nd; prev[v] = static_cast<int>(u); }
        }
    }
    if (dist[n - 1] == kInf) return std::nullopt;
    DiffractivePath path;
    path.length = dist[n - 1];
    for (int v = prev[n - 1]; v > 0; v = prev[static_cast<std::size_t>(v)])
        path.cones.push_back(v - 1);
    std::reverse(path.cones.begin(), path.cones.end());
    return path;
}

namespace {

struct WalkHit {
    bool hit = false;
    int cone = -1;
    double length = 0.0;
    double link_in = 0.0;
    double signed_miss = 0.0;  // against a designated probe cone
};

// Link of a chart direction at a cone. Near-miss passes can put the reversed
// direction a hair past the wedge boundary, which link_of_direction rejects;
// clamp to the boundary instead. Only consumed for validated hits, where the
// overshoot is below the hit tolerance.
double clamped_link(const ConeSurface& surface, const ConePoint& c, const Vec2& dir, int sheet) {
    const double theta = c.cone_angle();
    double phi = pos_mod(dir.angle() - c.ref_angle, kTwoPi);
    if (surface.kind == SurfaceKind::DoubledExterior) {
        if (phi > c.wedge) phi = (phi - c.wedge < kTwoPi - phi) ? c.wedge : 0.0;
        return sheet == 0 ? phi : pos_mod(2.0 * c.wedge - phi, theta);
    }
    return pos_mod(phi + kTwoPi * sheet, theta);
}

// Straight walk from a cone departure; stops at the first cone capture,
// escape, or length budget. probe_cone (if >= 0) is never captured; instead
// its signed perpendicular miss is recorded.
WalkHit walk_from_cone(const ConeSurface& surface, int from, double link, double max_length,
                       int probe_cone) {
    const ConePoint& src = surface.cones[static_cast<std::size_t>(from)];
    Vec2 dir;
    const SurfacePoint sp = surface.direction_of_link(src, link, &dir);
    RayState ray = {sp, dir, 0.0};
    int excl_edge = -1;
    int excl_cone = from;
    WalkHit out;
    double best_probe = kInf;
    const Vec2 probe_pos =
        probe_cone >= 0 ? surface.cones[static_cast<std::size_t>(probe_cone)].position : Vec2{};

    while (ray.time < max_length) {
        StepEvent ev = step(surface, ray, excl_edge, excl_cone);
        // Suppress capture of the probe cone: re-run ignoring it by treating a
        // capture of probe_cone as a pass-through sample.
        if (ev.kind == StepEvent::Kind::ConePointHit && ev.cone == probe_cone) {
            const Vec2 rel = probe_pos - ray.point.pos;
            const double tv = rel.dot(ray.dir);
            const double miss = rel.cross(ray.dir);  // sign: left of travel positive
            if (std::abs(miss) < std::abs(best_probe) || best_probe == kInf) {
                best_probe = -miss;
                out.length = ray.time + tv;
                out.link_in = clamped_link(
                    surface, surface.cones[static_cast<std::size_t>(probe_cone)], ray.dir * -1.0,
                    ray.point.sheet);
            }
            // Continue the walk past the probe: nudge via a tiny exclusion.
            RayState cont = ray;
            cont.point.pos = ray.point.pos + ray.dir * std::max(tv, 0.0);
            cont.time = ray.time + std::max(tv, 0.0);
            ray = cont;
            excl_cone = probe_cone;
            excl_edge = -1;
            continue;
        }
        if (probe_cone >= 0) {
            // Track the signed miss across this segment even without capture.
            const Vec2 rel = probe_pos - ray.point.pos;
            const double tv = rel.dot(ray.dir);
            if (tv > 0.0 && tv <= ev.t) {
                const double miss = rel.cross(ray.dir);
                if (std::abs(miss) < std::abs(best_probe) || best_probe == kInf) {
                    best_probe = -miss;
                    out.length = ray.time + tv;
                    out.link_in = clamped_link(
                        surface, surface.cones[static_cast<std::size_t>(probe_cone)],
                        ray.dir * -1.0, ray.point.sheet);
                }
            }
        }
        if (ev.kind == StepEvent::Kind::EscapeSphere) break;
        if (ev.kind == StepEvent::Kind::ConePointHit) {
            if (probe_cone < 0) {
                out.hit = true;
                out.cone = ev.cone;
                out.length = ev.after.time;
                out.link_in = clamped_link(surface,
                                           surface.cones[static_cast<std::size_t>(ev.cone)],
                                           ray.dir * -1.0, ev.after.point.sheet);
            }
            break;
        }
        ray = ev.after;
        excl_edge = ev.edge;
        excl_cone = -1;
    }
    if (probe_cone >= 0 && best_probe != kInf) out.signed_miss = best_probe;
    else if (probe_cone >= 0) out.signed_miss = kInf;
    return out;
}

}  // namespace

std::vector<ConeLeg> enumerate_cone_legs(const ConeSurface& surface, double max_length,
                                         int fan_samples) {
    std::vector<ConeLeg> legs;
    if (surface.cones.empty() || max_length <= 0.0) return legs;
    const int n_cones = static_cast<int>(surface.cones.size());
    const double tol_hit = 1e-9 * length_scale(surface);

    auto push_leg = [&legs](const ConeLeg& leg) {
        for (const ConeLeg& other : legs) {
            if (other.from == leg.from && other.to == leg.to &&
                std::abs(other.link_out - leg.link_out) < 1e-7 &&
                std::abs(other.length - leg.length) < 1e-7)
                return;
        }
        legs.push_back(leg);
    };

    // Legs running along a gluing edge between two cone points. The fan scan
    // below cannot find them: the miss function grazes zero at an edge-aligned
    // departure instead of changing sign.
    for (const GluingEdge& ge : surface.edges) {
        if (ge.cone_a < 0 || ge.cone_b < 0 || ge.cone_a == ge.cone_b) continue;
        const ConePoint& ca = surface.cones[static_cast<std::size_t>(ge.cone_a)];
        const ConePoint& cb = surface.cones[static_cast<std::size_t>(ge.cone_b)];
        const double len = (cb.position - ca.position).norm();
        if (len <= 0.0 || len > max_length) continue;
        const Vec2 d = (cb.position - ca.position) / len;
        for (int rev = 0; rev < 2; ++rev) {
            const ConePoint& cf = rev ? cb : ca;
            const ConePoint& ct = rev ? ca : cb;
            const Vec2 dir = rev ? d * -1.0 : d;
            ConeLeg leg;
            leg.from = cf.id;
            leg.to = ct.id;
            leg.link_out = surface.link_of_direction(cf, dir, 0);
            leg.link_in = surface.link_of_direction(ct, dir * -1.0, 0);
            leg.length = len;
            push_leg(leg);
        }
    }

    // Interior legs: for each ordered cone pair, sweep a departure fan and
    // track the signed perpendicular miss at the target. A root of the miss
    // is a geodesic hitting the target; bisect each sign change.
    for (int from = 0; from < n_cones; ++from) {
        const ConePoint& src = surface.cones[static_cast<std::size_t>(from)];
        const double theta = src.cone_angle();
        const double dl = theta / fan_samples;

        for (int to = 0; to < n_cones; ++to) {
            if (to == from) continue;

            std::vector<WalkHit> fan(static_cast<std::size_t>(fan_samples));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (int j = 0; j < fan_samples; ++j) {
                const double link = (j + 0.5) * dl;
                fan[static_cast<std::size_t>(j)] =
                    walk_from_cone(surface, from, link, max_length, to);
            }

            auto miss_at = [&](double link) {
                return walk_from_cone(surface, from, link, max_length, to).signed_miss;
            };

            for (int j = 0; j < fan_samples; ++j) {
                const WalkHit& h0 = fan[static_cast<std::size_t>(j)];
                const WalkHit& h1 = fan[static_cast<std::size_t>((j + 1) % fan_samples)];
                if (!std::isfinite(h0.signed_miss) || !std::isfinite(h1.signed_miss)) continue;
                double a = (j + 0.5) * dl;
                double b = (j + 1.5) * dl;  // wraps past theta; links are taken mod theta
                double ma = h0.signed_miss;
                const double mb = h1.signed_miss;
                double root;
                if (std::abs(ma) <= tol_hit) {
                    root = a;  // sample sits on the root already
                } else if (ma * mb < 0.0) {
                    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
                        const double mid = 0.5 * (a + b);
                        const double mm = miss_at(mid);
                        if (!std::isfinite(mm)) break;
                        if ((mm > 0.0) == (ma > 0.0)) {
                            a = mid;
                            ma = mm;
                        } else {
                            b = mid;
                        }
                    }
                    root = 0.5 * (a + b);
                } else {
                    continue;  // |mb| small: the next cell owns that root
                }
                const double link_star = pos_mod(root, theta);
                const WalkHit refined = walk_from_cone(surface, from, link_star, max_length, to);
                // A sign change across a walk discontinuity is not a hit; the
                // polished departure must actually pass through the target.
                if (!std::isfinite(refined.signed_miss) ||
                    std::abs(refined.signed_miss) > tol_hit)
                    continue;
                if (refined.length > max_length) continue;
                ConeLeg leg;
                leg.from = from;
                leg.to = to;
                leg.link_out = link_star;
                leg.link_in = refined.link_in;
                leg.length = refined.length;
                push_leg(leg);
            }
        }
    }
    return legs;
}

std::string chains_to_csv(const ConeSurface& surface, const TraceResult& result) {
    (void)surface;
    std::ostringstream os;
    os.precision(17);
    os << "chainId,segIndex,sheet,x0,y0,dirx,diry,length,coneId,linkIn,linkOut,kind,terminal\n";
    for (std::size_t ci = 0; ci < result.chains.size(); ++ci) {
        const GeodesicChain& c = result.chains[ci];
        double start_time = c.total_time;
        for (const ChainSegment& s : c.segments) start_time -= s.length;
        double t_end = start_time;
        std::size_t next_inter = 0;
        for (std::size_t si = 0; si < c.segments.size(); ++si) {
            const ChainSegment& s = c.segments[si];
            t_end += s.length;
            os << ci << ',' << si << ',' << s.start.sheet << ',' << s.start.pos.x << ','
               << s.start.pos.y << ',' << s.dir.x << ',' << s.dir.y << ',' << s.length << ',';
            // An interaction row belongs to the segment that arrives at its cone.
            if (next_inter < c.interactions.size() &&
                std::abs(c.interactions[next_inter].t_in - t_end) <= 1e-9 * (1.0 + t_end)) {
                const Interaction& in = c.interactions[next_inter++];
                os << in.cone << ',' << in.link_in << ',' << in.link_out << ','
                   << (in.kind == InteractionKind::Geometric ? "G" : "D") << ',';
            } else {
                os << ",,,,";
            }
            if (si + 1 == c.segments.size()) {
                switch (c.terminal) {
                    case Terminal::Escaped: os << "escaped"; break;
                    case Terminal::Horizon: os << (c.truncated ? "truncated" : "horizon"); break;
                    case Terminal::AtConePoint: os << "at_cone"; break;
                }
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace conewave
