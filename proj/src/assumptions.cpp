#include "conewave/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace conewave {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

// --- non-trapping ---------------------------------------------------------

std::vector<RayState> nontrapping_samples(const ConeSurface& surface, long n, unsigned long seed) {
    const double r1 = surface.escape_radius();
    std::vector<RayState> out;
    out.reserve(static_cast<size_t>(n));
    const bool doubled = surface.kind == SurfaceKind::DoubledExterior;
    unsigned long idx = seed * 2654435761UL + 1;
    while (static_cast<long>(out.size()) < n) {
        ++idx;
        const double r = r1 * std::sqrt(radical_inverse(idx, 2));
        const double ang = kTwoPi * radical_inverse(idx, 3);
        const Vec2 pos{r * std::cos(ang), r * std::sin(ang)};
        if (doubled && classify_point(surface.scene, pos) != PointSide::Outside) continue;
        const double dir = kTwoPi * radical_inverse(idx, 5);
        const int sheet = static_cast<int>(idx & 1UL);
        out.push_back(RayState{SurfacePoint{pos, sheet}, unit_vector(dir), 0.0});
    }
    return out;
}

namespace {

// Slowest branch escape; +inf if any branch reaches the horizon un-escaped,
// NaN if the trace was truncated before resolving.
double escape_time_of(const ConeSurface& surface, const RayState& s, double horizon,
                      const TraceOptions& opts) {
    const TraceResult tr = trace(surface, s, horizon, ContinuationPolicy::geometric(), opts);
    double worst = 0.0;
    bool trapped = false;
    for (const GeodesicChain& c : tr.chains) {
        if (c.truncated) return std::numeric_limits<double>::quiet_NaN();
        if (c.terminal == Terminal::Escaped)
            worst = std::max(worst, c.total_time);
        else if (c.terminal == Terminal::Horizon)
            trapped = true;
        else
            trapped = true;  // flow terminates at a cone point inside the region
    }
    if (tr.truncated) return std::numeric_limits<double>::quiet_NaN();
    if (trapped) return std::numeric_limits<double>::infinity();
    return worst;
}

// Perpendicular rays launched between facing parallel mirror edges. Such a
// bundle bounces between the pair forever, but it has measure zero in the
// sample space, so the sweep cannot rely on generic samples to land on it.
std::vector<RayState> facing_edge_probes(const ConeSurface& surface) {
    std::vector<RayState> probes;
    const double scale = std::max(surface.scene.diameter(), 1e-12);
    const bool doubled = surface.kind == SurfaceKind::DoubledExterior;
    for (size_t i = 0; i < surface.edges.size(); ++i) {
        const GluingEdge& e1 = surface.edges[i];
        if (e1.style != GluingStyle::Mirror) continue;
        const double len1 = (e1.b - e1.a).norm();
        if (len1 <= 0.0) continue;
        const Vec2 u = (e1.b - e1.a) / len1;
        const Vec2 n{-u.y, u.x};
        for (size_t j = i + 1; j < surface.edges.size(); ++j) {
            const GluingEdge& e2 = surface.edges[j];
            if (e2.style != GluingStyle::Mirror) continue;
            const Vec2 v = e2.b - e2.a;
            if (std::abs(u.cross(v)) > 1e-9 * v.norm()) continue;  // not parallel
            const double gap = n.dot(e2.a - e1.a);
            if (std::abs(gap) <= 1e-9 * scale) continue;  // same supporting line
            const double p = u.dot(e2.a - e1.a);
            const double q = u.dot(e2.b - e1.a);
            const double lo = std::max(0.0, std::min(p, q));
            const double hi = std::min(len1, std::max(p, q));
            if (hi - lo <= 1e-9 * scale) continue;  // spans do not face each other
            const Vec2 dir = gap > 0.0 ? n : n * -1.0;
            for (double frac : {0.5, 0.25, 0.75}) {
                const Vec2 foot = e1.a + u * (lo + frac * (hi - lo));
                const Vec2 far = foot + dir * std::abs(gap);
                const Vec2 mid = foot + dir * (0.5 * std::abs(gap));
                const Vec2 start = foot + dir * (1e-3 * std::abs(gap));
                if (doubled && (classify_point(surface.scene, mid) != PointSide::Outside ||
                                classify_point(surface.scene, start) != PointSide::Outside))
                    continue;
                bool clear = true;
                for (const ConePoint& c : surface.cones) {
                    if (point_segment_distance(c.position, start, far) <= 10.0 * surface.eps_hit) {
                        clear = false;
                        break;
                    }
                }
                if (!clear) continue;
                probes.push_back(RayState{SurfacePoint{start, 0}, dir, 0.0});
                break;  // one clear probe per pair is enough
            }
        }
    }
    return probes;
}

}  // namespace

std::vector<double> sample_escape_times(const ConeSurface& surface,
                                        const std::vector<RayState>& samples, double horizon,
                                        const TraceOptions& opts, bool parallel) {
    std::vector<double> times(samples.size(), 0.0);
    const long n = static_cast<long>(samples.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long i = 0; i < n; ++i)
            times[static_cast<size_t>(i)] =
                escape_time_of(surface, samples[static_cast<size_t>(i)], horizon, opts);
    } else {
        for (long i = 0; i < n; ++i)
            times[static_cast<size_t>(i)] =
                escape_time_of(surface, samples[static_cast<size_t>(i)], horizon, opts);
    }
    return times;
}

NonTrappingReport check_nontrapping(const ConeSurface& surface, long n_samples, double horizon,
                                    unsigned long seed, const TraceOptions& opts) {
    if (n_samples <= 0) throw std::invalid_argument("sample count must be positive");
    if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
    NonTrappingReport rep;
    rep.n_samples = n_samples;
    rep.horizon = horizon;

    for (const RayState& probe : facing_edge_probes(surface)) {
        if (!std::isinf(escape_time_of(surface, probe, horizon, opts))) continue;
        rep.verdict = Verdict::Fail;
        const TraceResult tr =
            trace(surface, probe, horizon, ContinuationPolicy::geometric(), opts);
        for (const GeodesicChain& c : tr.chains)
            if (c.terminal != Terminal::Escaped) {
                rep.witness = c;
                break;
            }
        rep.notes = "perpendicular bundle between facing parallel edges does not escape";
        return rep;
    }

    const std::vector<RayState> samples = nontrapping_samples(surface, n_samples, seed);
    const std::vector<double> times = sample_escape_times(surface, samples, horizon, opts, true);

    double worst = 0.0;
    long trapped_at = -1;
    bool truncated = false;
    for (size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (std::isnan(t)) {
            truncated = true;
        } else if (std::isinf(t)) {
            trapped_at = static_cast<long>(i);
            break;
        } else {
            worst = std::max(worst, t);
        }
    }
    rep.max_escape = worst;

    if (trapped_at >= 0) {
        rep.verdict = Verdict::Fail;
        const TraceResult tr =
            trace(surface, samples[static_cast<size_t>(trapped_at)], horizon,
                  ContinuationPolicy::geometric(), opts);
        for (const GeodesicChain& c : tr.chains)
            if (c.terminal != Terminal::Escaped) {
                rep.witness = c;
                break;
            }
        rep.notes = "sampled ray does not escape within the horizon";
        return rep;
    }
    if (truncated) {
        rep.verdict = Verdict::Indeterminate;
        rep.notes = "branch cap reached before every branch resolved";
        return rep;
    }

    // Cell diameter of the sample family in (position, direction) space,
    // inflated by a crude flow Lipschitz factor over the observed time.
    const double r1 = surface.escape_radius();
    const double volume = kPi * r1 * r1 * kTwoPi;
    const double cell = std::cbrt(volume / static_cast<double>(n_samples));
    rep.margin = cell * (1.0 + worst);
    rep.t0 = worst + rep.margin;
    rep.verdict = Verdict::Pass;
    return rep;
}

// --- collinearity ---------------------------------------------------------

namespace {

std::vector<CollinearWitness> collinear_witnesses(const ConeSurface& surface, double max_length,
                                                  int fan_samples, double tol_g) {
    const std::vector<ConeLeg> legs = enumerate_cone_legs(surface, max_length, fan_samples);
    std::vector<std::vector<const ConeLeg*>> arriving(surface.cones.size());
    std::vector<std::vector<const ConeLeg*>> departing(surface.cones.size());
    for (const ConeLeg& l : legs) {
        arriving[static_cast<size_t>(l.to)].push_back(&l);
        departing[static_cast<size_t>(l.from)].push_back(&l);
    }
    std::vector<CollinearWitness> out;
    std::map<std::tuple<int, int, int, long, long>, bool> seen;
    for (size_t mid = 0; mid < surface.cones.size(); ++mid) {
        const double theta = surface.cones[mid].cone_angle();
        for (const ConeLeg* in : arriving[mid])
            for (const ConeLeg* dep : departing[mid]) {
                const double d = circle_dist(in->link_in, dep->link_out, theta);
                if (std::abs(d - kPi) > tol_g) continue;
                const auto key = std::make_tuple(in->from, static_cast<int>(mid), dep->to,
                                                 std::lround(in->link_in * 1e7),
                                                 std::lround(dep->link_out * 1e7));
                if (seen.count(key)) continue;
                seen[key] = true;
                CollinearWitness w;
                w.cone_prev = in->from;
                w.cone_mid = static_cast<int>(mid);
                w.cone_next = dep->to;
                w.link_in = in->link_in;
                w.link_out = dep->link_out;
                w.link_distance = d;
                w.length_in = in->length;
                w.length_out = dep->length;
                out.push_back(w);
            }
    }
    return out;
}

}  // namespace

CollinearReport check_collinear(const ConeSurface& surface, double max_length, int fan_samples,
                                double tol_g) {
    if (max_length <= 0.0) throw std::invalid_argument("max length must be positive");
    if (fan_samples < 8) throw std::invalid_argument("fan samples must be at least 8");
    CollinearReport rep;
    rep.max_length = max_length;
    rep.fan_samples = fan_samples;

    const double sep = surface.min_cone_distance();
    if (surface.cones.size() < 3 || (std::isfinite(sep) && max_length < sep)) {
        rep.verdict = Verdict::Pass;
        rep.notes = "vacuous: no cone-to-cone geodesic fits inside the length bound";
        return rep;
    }

    std::vector<CollinearWitness> coarse =
        collinear_witnesses(surface, max_length, fan_samples, tol_g);
    std::vector<CollinearWitness> fine =
        collinear_witnesses(surface, max_length, 2 * fan_samples, tol_g);
    rep.resolutions_agree = coarse.empty() == fine.empty();
    if (!rep.resolutions_agree) {
        const std::vector<CollinearWitness> finest =
            collinear_witnesses(surface, max_length, 4 * fan_samples, tol_g);
        rep.notes = "fan resolutions disagreed; verdict taken from the finest fan";
        rep.witnesses = finest;
        rep.verdict = finest.empty() ? Verdict::Pass : Verdict::Fail;
        return rep;
    }
    rep.witnesses = fine;
    rep.verdict = fine.empty() ? Verdict::Pass : Verdict::Fail;
    return rep;
}

// --- conjugate points -------------------------------------------------------

JacobiFrame transport_jacobi(const JacobiFrame& f, double length) {
    return JacobiFrame{f.a + f.b * length, f.b};
}

ConjugacyReport check_conjugacy(const ConeSurface& surface, double t_max, int fan_samples) {
    if (surface.metric != MetricKind::Flat) throw std::invalid_argument("unsupported geometry");
    if (t_max <= 0.0) throw std::invalid_argument("time bound must be positive");
    ConjugacyReport rep;
    rep.t_max = t_max;

    const std::vector<ConeLeg> legs = enumerate_cone_legs(surface, t_max, fan_samples);
    std::map<std::tuple<int, int, long>, bool> seen;
    for (const ConeLeg& l : legs) {
        const auto key = std::make_tuple(l.from, l.to, std::lround(l.length * 1e9));
        if (seen.count(key)) continue;
        seen[key] = true;
        // A field vanishing at both ends solves a = 0, a + b*len = 0; the
        // system matrix [[1,0],[1,len]] has determinant len.
        ConjugacyCertificate c;
        c.cone_a = l.from;
        c.cone_b = l.to;
        c.length = l.length;
        c.det = l.length;
        rep.certificates.push_back(c);
    }
    rep.verdict = Verdict::Pass;
    if (rep.certificates.empty())
        rep.notes = "no cone-to-cone geodesic within the time bound; nothing to certify";
    return rep;
}

// --- JSON ------------------------------------------------------------------

namespace {

nlohmann::json chain_json(const GeodesicChain& c) {
    nlohmann::json segs = nlohmann::json::array();
    for (const ChainSegment& s : c.segments)
        segs.push_back({{"x", s.start.pos.x},
                        {"y", s.start.pos.y},
                        {"sheet", s.start.sheet},
                        {"dirx", s.dir.x},
                        {"diry", s.dir.y},
                        {"length", s.length}});
    nlohmann::json inter = nlohmann::json::array();
    for (const Interaction& i : c.interactions)
        inter.push_back({{"cone", i.cone},
                         {"t", i.t_in},
                         {"link_in", i.link_in},
                         {"link_out", i.link_out},
                         {"kind", i.kind == InteractionKind::Geometric ? "geometric" : "diffractive"}});
    return {{"segments", segs},
            {"interactions", inter},
            {"total_time", c.total_time},
            {"terminal", c.terminal == Terminal::Escaped  ? "escaped"
                         : c.terminal == Terminal::Horizon ? "horizon"
                                                           : "at_cone"}};
}

}  // namespace

std::string report_to_json(const NonTrappingReport& r) {
    nlohmann::json j;
    j["assumption"] = 1;
    j["verdict"] = verdict_name(r.verdict);
    j["parameters"] = {{"samples", r.n_samples}, {"horizon", r.horizon}};
    j["certificates"] = nlohmann::json::array();
    j["witnesses"] = nlohmann::json::array();
    if (r.verdict == Verdict::Pass)
        j["certificates"].push_back(
            {{"t0", r.t0}, {"max_escape", r.max_escape}, {"margin", r.margin}});
    if (r.witness) j["witnesses"].push_back(chain_json(*r.witness));
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2);
}

std::string report_to_json(const CollinearReport& r) {
    nlohmann::json j;
    j["assumption"] = 2;
    j["verdict"] = verdict_name(r.verdict);
    j["parameters"] = {{"max_length", r.max_length},
                       {"fan_samples", r.fan_samples},
                       {"resolutions_agree", r.resolutions_agree}};
    j["certificates"] = nlohmann::json::array();
    j["witnesses"] = nlohmann::json::array();
    for (const CollinearWitness& w : r.witnesses)
        j["witnesses"].push_back({{"cone_prev", w.cone_prev},
                                  {"cone_mid", w.cone_mid},
                                  {"cone_next", w.cone_next},
                                  {"link_in", w.link_in},
                                  {"link_out", w.link_out},
                                  {"link_distance", w.link_distance},
                                  {"length_in", w.length_in},
                                  {"length_out", w.length_out}});
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2);
}

std::string report_to_json(const ConjugacyReport& r) {
    nlohmann::json j;
    j["assumption"] = 3;
    j["verdict"] = verdict_name(r.verdict);
    j["parameters"] = {{"t_max", r.t_max}};
    j["witnesses"] = nlohmann::json::array();
    j["certificates"] = nlohmann::json::array();
    for (const ConjugacyCertificate& c : r.certificates)
        j["certificates"].push_back(
            {{"cone_a", c.cone_a}, {"cone_b", c.cone_b}, {"length", c.length}, {"det", c.det}});
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2);
}

}  // namespace conewave
