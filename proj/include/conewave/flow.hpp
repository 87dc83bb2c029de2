#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conewave/surface.hpp"

namespace conewave {

struct RayState {
    SurfacePoint point;
    Vec2 dir;  // unit vector
    double time = 0.0;
};

enum class InteractionKind { Geometric, DiffractiveStrict };

// One cone-point passage: incoming and outgoing link coordinates plus the
// arrival time along the chain.
struct Interaction {
    int cone = -1;
    double t_in = 0.0;
    double link_in = 0.0;
    double link_out = 0.0;
    InteractionKind kind = InteractionKind::DiffractiveStrict;
};

struct ChainSegment {
    SurfacePoint start;
    Vec2 dir;
    double length = 0.0;
};

enum class Terminal { Escaped, Horizon, AtConePoint };

struct GeodesicChain {
    std::vector<ChainSegment> segments;
    std::vector<Interaction> interactions;
    double total_time = 0.0;
    Terminal terminal = Terminal::Horizon;
    bool truncated = false;

    RayState state_at(double t) const;  // extrapolates escaped chains
    SurfacePoint end_point() const;
    Vec2 end_dir() const;
};

struct ContinuationPolicy {
    enum class Mode { GeometricBranch, DiffractiveFan, Stop };
    Mode mode = Mode::GeometricBranch;
    int fan_k = 64;

    static ContinuationPolicy geometric() { return {Mode::GeometricBranch, 0}; }
    static ContinuationPolicy fan(int k = 64) { return {Mode::DiffractiveFan, k}; }
    static ContinuationPolicy stop() { return {Mode::Stop, 0}; }
};

struct TraceOptions {
    double tol_g = 1e-7;        // link-distance tolerance for the geometric test
    long branch_cap = 1000000;  // maximum chains explored before truncation
};

struct TraceResult {
    std::vector<GeodesicChain> chains;
    bool truncated = false;
};

struct StepEvent {
    enum class Kind { ConePointHit, EdgeCross, EscapeSphere } kind;
    double t = 0.0;   // segment length to the event
    int cone = -1;
    int edge = -1;
    RayState after;   // state just past the event (post-gluing for EdgeCross)
};

// Advances a ray to its next event: cone-point capture (within eps_hit),
// gluing-edge crossing, or outward exit through |z| = R1. exclude_edge /
// exclude_cone suppress the feature the ray just left.
StepEvent step(const ConeSurface& surface, const RayState& ray, int exclude_edge = -1,
               int exclude_cone = -1);

// Outgoing link coordinates offered at a cone for an arrival at link_in.
// GeometricBranch yields the (up to two) points at link distance exactly pi;
// it is empty when the cone angle is below 2*pi. DiffractiveFan yields fan_k
// equispaced offsets from link_in (offset 0 first, the exact back-bounce).
std::vector<double> continuations(const ConePoint& cone, double link_in,
                                  const ContinuationPolicy& policy);

InteractionKind classify_interaction(const ConePoint& cone, double link_in, double link_out,
                                     double tol_g);

// Depth-first branched trace up to the time horizon.
TraceResult trace(const ConeSurface& surface, const RayState& start, double horizon,
                  const ContinuationPolicy& policy, const TraceOptions& opts = {});

enum class Ternary { False, True, Indeterminate };
enum class RelationKind { Geometric, Diffractive };

// Does some chain from p (geometric or diffractive continuation) pass within
// tol of q in position and direction at time exactly t? Diffractive search
// refines a fan and polishes the final leg; geometric hits imply diffractive
// ones by construction.
Ternary relates(const ConeSurface& surface, const RayState& p, const RayState& q, double t,
                RelationKind kind, double tol, const TraceOptions& opts = {});

// Shortest chain from a to b whose straight legs join cone points (the taut
// first-arrival path). Returns length and the cone ids visited.
struct DiffractivePath {
    double length = 0.0;
    std::vector<int> cones;
};
std::optional<DiffractivePath> shortest_diffractive_path(const ConeSurface& surface, const Vec2& a,
                                                         const Vec2& b);

// Straight cone-to-cone geodesic legs, found by departure fans with secant
// polishing. Used by the collinearity checker and the word scanner.
struct ConeLeg {
    int from = -1;
    int to = -1;
    double link_out = 0.0;  // departure link at `from`
    double link_in = 0.0;   // arrival link at `to`
    double length = 0.0;
};
std::vector<ConeLeg> enumerate_cone_legs(const ConeSurface& surface, double max_length,
                                         int fan_samples = 4096);

std::string chains_to_csv(const ConeSurface& surface, const TraceResult& result);

}  // namespace conewave
