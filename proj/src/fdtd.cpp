#include "conewave/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "conewave/analysis.hpp"

namespace conewave {

double ricker(double t, double f0, double t0) {
    const double a = kPi * f0 * (t - t0);
    const double a2 = a * a;
    return (1.0 - 2.0 * a2) * std::exp(-a2);
}

namespace {

struct SourceNodes {
    std::vector<std::size_t> idx;
    std::vector<double> weight;
    double f0 = 0.0, t0 = 0.0, amplitude = 0.0;
    double t_off = 0.0;  // effectively silent beyond this time
    int sheet = 0;
};

struct ProbeTap {
    ProbeSpec spec;
    std::size_t corner = 0;  // node (i, j); weights for (i..i+1, j..j+1)
    double w[4] = {0, 0, 0, 0};
};

struct Setup {
    StencilGrid grid;
    SourceNodes src;
    std::vector<ProbeTap> taps;
    long steps = 0;
    double r1 = 0.0;
    double sponge_round_trip = 1.0;
    std::vector<double> chi;  // cutoff profile per node
};

double quintic_cutoff(double r, double r1) {
    const double a = 0.75 * r1;
    if (r <= a) return 1.0;
    if (r >= r1) return 0.0;
    const double s = (r - a) / (r1 - a);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

Setup build_setup(const PolygonScene& scene, const GridSpec& spec, const SourceSpec& source,
                  const std::vector<ProbeSpec>& probes, bool ghost_negate) {
    if (spec.h <= 0.0) throw std::invalid_argument("grid step must be positive");
    const double dt = spec.dt > 0.0 ? spec.dt : 0.7 * spec.h;
    const double cfl = spec.h / std::sqrt(2.0);
    if (dt > cfl * (1.0 + 1e-12))
        throw std::invalid_argument("time step violates the CFL bound h/sqrt(2)");
    if (spec.T <= 0.0) throw std::invalid_argument("final time must be positive");
    if (spec.sponge && spec.sponge_cells < 20)
        throw std::invalid_argument("absorbing layer needs at least 20 cells");

    const double sponge_len = spec.sponge ? spec.sponge_cells * spec.h : 0.0;
    double dom = spec.domain_radius > 0.0 ? spec.domain_radius
                                          : scene.R1 * 1.1 + sponge_len + 2.0 * spec.h;
    if (dom < scene.R1 + sponge_len)
        throw std::invalid_argument("domain radius must cover R1 plus the absorbing layer");

    Setup s;
    StencilGrid& g = s.grid;
    g.h = spec.h;
    g.dt = dt;
    g.nx = std::max(4, static_cast<int>(std::lround(2.0 * dom / spec.h)));
    g.ny = g.nx;
    g.origin = Vec2{-0.5 * g.nx * g.h + 0.5 * g.h, -0.5 * g.ny * g.h + 0.5 * g.h};
    g.ghost_negate = ghost_negate;
    s.r1 = scene.R1;
    s.steps = static_cast<long>(std::ceil(spec.T / dt));

    const std::size_t n = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny);
    g.solid.assign(n, 0);
    g.damp_a.assign(n, 1.0);
    g.damp_b.assign(n, 1.0);
    s.chi.assign(n, 0.0);

    const double sigma_max =
        spec.sponge
            ? (spec.sponge_sigma > 0.0 ? spec.sponge_sigma : 40.0 / (spec.sponge_cells * spec.h))
            : 0.0;
    // Cubic ramp: mean sigma across the layer is sigma_max / 4; amplitude falls
    // by exp(-sigma/2) per unit length, twice through the layer on a round trip.
    if (spec.sponge) s.sponge_round_trip = std::exp(-sigma_max * sponge_len / 4.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = g.at(i, j);
            const Vec2 p = g.node(i, j);
            if (classify_point(scene, p) != PointSide::Outside) g.solid[c] = 1;
            if (spec.sponge) {
                const int depth = std::min(std::min(i, j), std::min(g.nx - 1 - i, g.ny - 1 - j));
                if (depth < spec.sponge_cells) {
                    const double f =
                        double(spec.sponge_cells - depth) / double(spec.sponge_cells);
                    const double sg = sigma_max * f * f * f;
                    g.damp_a[c] = 1.0 - 0.5 * sg * dt;
                    g.damp_b[c] = 1.0 / (1.0 + 0.5 * sg * dt);
                }
            }
            s.chi[c] = g.solid[c] ? 0.0 : quintic_cutoff(p.norm(), scene.R1);
        }

    // Source placement checks: resolved wavelength, exterior, clear of vertices.
    if (source.f0 <= 0.0) throw std::invalid_argument("source frequency must be positive");
    if (1.0 / source.f0 < 10.0 * spec.h)
        throw std::invalid_argument("source wavelength under-resolved on this grid");
    if (classify_point(scene, source.pos) != PointSide::Outside)
        throw std::invalid_argument("source must sit in the open exterior");
    for (const auto& loop : scene.obstacles)
        for (const Vec2& v : loop)
            if ((source.pos - v).norm() < 5.0 * spec.h)
                throw std::invalid_argument("source must stay at least 5 cells from every vertex");

    const double sig = source.sigma > 0.0 ? source.sigma : 2.0 * spec.h;
    s.src.f0 = source.f0;
    s.src.t0 = source.t0 > 0.0 ? source.t0 : 1.5 / source.f0;
    s.src.amplitude = source.amplitude;
    s.src.t_off = s.src.t0 + 1.5 / source.f0;
    s.src.sheet = source.sheet;
    const int reach = std::max(2, static_cast<int>(std::ceil(4.0 * sig / spec.h)));
    const int ci = static_cast<int>(std::lround((source.pos.x - g.origin.x) / spec.h));
    const int cj = static_cast<int>(std::lround((source.pos.y - g.origin.y) / spec.h));
    for (int j = std::max(1, cj - reach); j <= std::min(g.ny - 2, cj + reach); ++j)
        for (int i = std::max(1, ci - reach); i <= std::min(g.nx - 2, ci + reach); ++i) {
            const std::size_t c = g.at(i, j);
            if (g.solid[c]) continue;
            const double r2 = (g.node(i, j) - source.pos).norm2();
            const double w = std::exp(-r2 / (2.0 * sig * sig));
            if (w < 1e-14) continue;
            s.src.idx.push_back(c);
            s.src.weight.push_back(w);
        }
    if (s.src.idx.empty()) throw std::invalid_argument("source does not touch any grid node");

    for (const ProbeSpec& p : probes) {
        const double fx = (p.pos.x - g.origin.x) / spec.h;
        const double fy = (p.pos.y - g.origin.y) / spec.h;
        const int i0 = static_cast<int>(std::floor(fx));
        const int j0 = static_cast<int>(std::floor(fy));
        if (i0 < 1 || j0 < 1 || i0 + 1 > g.nx - 2 || j0 + 1 > g.ny - 2)
            throw std::invalid_argument("probe outside the grid: " + p.id);
        if (g.solid[g.at(i0, j0)] && g.solid[g.at(i0 + 1, j0)] && g.solid[g.at(i0, j0 + 1)] &&
            g.solid[g.at(i0 + 1, j0 + 1)])
            throw std::invalid_argument("probe inside an obstacle: " + p.id);
        ProbeTap tap;
        tap.spec = p;
        tap.corner = g.at(i0, j0);
        const double ax = fx - i0, ay = fy - j0;
        tap.w[0] = (1 - ax) * (1 - ay);
        tap.w[1] = ax * (1 - ay);
        tap.w[2] = (1 - ax) * ay;
        tap.w[3] = ax * ay;
        s.taps.push_back(tap);
    }
    return s;
}

double tap_value(const StencilGrid& g, const ProbeTap& t, const std::vector<double>& u) {
    return t.w[0] * u[t.corner] + t.w[1] * u[t.corner + 1] +
           t.w[2] * u[t.corner + std::size_t(g.nx)] +
           t.w[3] * u[t.corner + std::size_t(g.nx) + 1];
}

// Conserved discrete form sampled between levels: (h^2/2)(|v|^2 + <up, K u0>).
double energy_total(const StencilGrid& g, const std::vector<double>& u0,
                    const std::vector<double>& up, const double* other0, const double* otherp,
                    std::vector<double>& scratch) {
    (void)otherp;
    apply_stiffness(g, u0, other0, scratch);
    double kin = 0.0, pot = 0.0;
    const std::size_t n = u0.size();
    for (std::size_t c = 0; c < n; ++c) {
        const double v = (up[c] - u0[c]) / g.dt;
        kin += v * v;
        pot += up[c] * scratch[c];
    }
    return 0.5 * g.h * g.h * (kin + pot);
}

double energy_chi(const StencilGrid& g, const std::vector<double>& chi,
                  const std::vector<double>& um, const std::vector<double>& u0,
                  const std::vector<double>& up, const double* other) {
    double acc = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const std::size_t c = g.at(i, j);
            if (g.solid[c] || chi[c] == 0.0) continue;
            const double v = (up[c] - um[c]) / (2.0 * g.dt);
            double grad2 = 0.0;
            const std::size_t nb[4] = {c - 1, c + 1, c - std::size_t(g.nx),
                                       c + std::size_t(g.nx)};
            for (std::size_t k = 0; k < 4; ++k) {
                double nval;
                if (!g.solid[nb[k]])
                    nval = u0[nb[k]];
                else if (other)
                    nval = other[c];
                else
                    nval = g.ghost_negate ? -u0[c] : u0[c];
                const double d = (nval - u0[c]) / g.h;
                grad2 += 0.5 * d * d;  // each face shared by two nodes
            }
            acc += chi[c] * (v * v + grad2);
        }
    return 0.5 * g.h * g.h * acc;
}

FdtdResult run_setup(Setup& s, const GridSpec& spec, int sheets, bool parallel) {
    const StencilGrid& g = s.grid;
    const std::size_t n = static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny);

    std::vector<std::vector<double>> um(sheets, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> u0 = um, up = um;
    std::vector<double> scratch(n, 0.0);

    FdtdResult r;
    r.nx = g.nx;
    r.ny = g.ny;
    r.h = g.h;
    r.dt = g.dt;
    r.origin = g.origin;
    r.steps = s.steps;
    r.doubled = sheets == 2;
    r.sponge_round_trip = s.sponge_round_trip;
    for (const ProbeTap& t : s.taps) r.probes.push_back(ProbeSeries{t.spec, {}, {}});

    std::vector<char> snap_done(spec.snapshot_times.size(), 0);

    for (long step = 0; step < s.steps; ++step) {
        const double t_now = step * g.dt;
        for (int sh = 0; sh < sheets; ++sh) {
            const double* other = sheets == 2 ? u0[1 - sh].data() : nullptr;
            if (parallel)
                leapfrog_step_omp(g, um[sh], u0[sh], up[sh], other);
            else
                leapfrog_step_serial(g, um[sh], u0[sh], up[sh], other);
        }
        if (t_now < s.src.t_off) {
            const double sval = s.src.amplitude * ricker(t_now, s.src.f0, s.src.t0);
            std::vector<double>& dst = up[s.src.sheet];
            for (std::size_t k = 0; k < s.src.idx.size(); ++k) {
                const std::size_t c = s.src.idx[k];
                dst[c] += g.damp_b[c] * g.dt * g.dt * sval * s.src.weight[k];
            }
        }

        r.t.push_back(t_now);
        for (std::size_t pi = 0; pi < s.taps.size(); ++pi) {
            const ProbeTap& tap = s.taps[pi];
            const int sh = sheets == 2 ? tap.spec.sheet : 0;
            r.probes[pi].u.push_back(tap_value(g, tap, u0[sh]));
            r.probes[pi].dudt.push_back(
                (tap_value(g, tap, up[sh]) - tap_value(g, tap, um[sh])) / (2.0 * g.dt));
        }

        if (spec.energy_stride > 0 && step % spec.energy_stride == 0) {
            EnergySample es;
            es.t = t_now;
            for (int sh = 0; sh < sheets; ++sh) {
                const double* other0 = sheets == 2 ? u0[1 - sh].data() : nullptr;
                es.e_total += energy_total(g, u0[sh], up[sh], other0, nullptr, scratch);
                es.e_chi += energy_chi(g, s.chi, um[sh], u0[sh], up[sh], other0);
            }
            r.energy.push_back(es);
        }

        for (std::size_t si = 0; si < spec.snapshot_times.size(); ++si) {
            if (snap_done[si]) continue;
            if (std::abs(spec.snapshot_times[si] - t_now) <= 0.5 * g.dt) {
                snap_done[si] = 1;
                for (int sh = 0; sh < sheets; ++sh)
                    r.snapshots.push_back(FieldSnapshot{t_now, sh, u0[sh]});
            }
        }

        for (int sh = 0; sh < sheets; ++sh) {
            um[sh].swap(u0[sh]);
            u0[sh].swap(up[sh]);
        }
    }

    for (int sh = 0; sh < sheets; ++sh) r.final_u.push_back(u0[sh]);

    // Relative energy spread after the source has stopped, per 1000 steps.
    double emin = 0.0, emax = 0.0, t_first = 0.0, t_last = 0.0;
    bool seen = false;
    for (const EnergySample& es : r.energy) {
        if (es.t <= s.src.t_off) continue;
        if (!seen) {
            emin = emax = es.e_total;
            t_first = es.t;
            seen = true;
        }
        emin = std::min(emin, es.e_total);
        emax = std::max(emax, es.e_total);
        t_last = es.t;
    }
    if (seen && t_last > t_first && emax > 0.0)
        r.energy_drift_per_1k =
            (emax - emin) / emax * (1000.0 * g.dt / (t_last - t_first));
    return r;
}

}  // namespace

FdtdResult run_exterior(const PolygonScene& scene, const GridSpec& grid, const SourceSpec& source,
                        const std::vector<ProbeSpec>& probes, bool parallel) {
    validate_scene(scene);
    Setup s = build_setup(scene, grid, source, probes,
                          scene.bc == BoundaryCondition::Dirichlet);
    return run_setup(s, grid, 1, parallel);
}

FdtdResult run_doubled(const ConeSurface& surface, const GridSpec& grid, const SourceSpec& source,
                       const std::vector<ProbeSpec>& probes, bool parallel) {
    if (surface.kind != SurfaceKind::DoubledExterior)
        throw std::invalid_argument("grid solver supports doubled exteriors only");
    Setup s = build_setup(surface.scene, grid, source, probes, true);
    return run_setup(s, grid, 2, parallel);
}

// --- derived reports -----------------------------------------------------------

namespace {

const ProbeSeries& find_probe(const FdtdResult& r, const std::string& id) {
    for (const ProbeSeries& p : r.probes)
        if (p.spec.id == id) return p;
    throw std::invalid_argument("probe not found: " + id);
}

}  // namespace

ContrastReport diffraction_contrast(const FdtdResult& r, const std::string& lit_probe,
                                    const std::string& shadow_probe, double f0) {
    if (f0 <= 0.0) throw std::invalid_argument("band frequency must be positive");
    const ProbeSeries& lit = find_probe(r, lit_probe);
    const ProbeSeries& sh = find_probe(r, shadow_probe);
    ContrastReport c;
    c.f_lo = f0;
    c.f_hi = 2.0 * f0;
    const std::vector<double> bp_lit = band_pass(lit.u, r.dt, c.f_lo, c.f_hi);
    const std::vector<double> bp_sh = band_pass(sh.u, r.dt, c.f_lo, c.f_hi);
    for (double v : bp_lit) c.peak_lit = std::max(c.peak_lit, std::abs(v));
    for (double v : bp_sh) c.peak_shadow = std::max(c.peak_shadow, std::abs(v));
    c.e_lit = band_energy(lit.u, r.dt, c.f_lo, c.f_hi);
    c.e_shadow = band_energy(sh.u, r.dt, c.f_lo, c.f_hi);
    if (!(c.peak_lit > 0.0))
        throw std::runtime_error("line-of-sight probe recorded no band energy");
    c.ratio = c.peak_shadow / c.peak_lit;
    return c;
}

DecayReport decay_report(const FdtdResult& r, double t0, int k_windows, double f0) {
    if (t0 <= 0.0) throw std::invalid_argument("escape time must be positive");
    if (k_windows < 1) throw std::invalid_argument("need at least one window");
    DecayReport d;
    const double t_end = r.steps * r.dt;
    for (int k = 0; k < k_windows; ++k) {
        const double a = 5.0 * k * t0;
        const double b = 5.0 * (k + 1) * t0;
        if (b > t_end + 1e-9)
            throw std::invalid_argument("run too short for the requested decay windows");
        double e = 0.0;
        for (const ProbeSeries& p : r.probes)
            e += band_energy_window(p.u, r.dt, a, b, f0, 2.0 * f0);
        d.window_t0.push_back(a);
        d.window_t1.push_back(b);
        d.window_energy.push_back(e);
    }
    d.strictly_decreasing = true;
    for (std::size_t k = 1; k < d.window_energy.size(); ++k)
        if (!(d.window_energy[k] < d.window_energy[k - 1])) d.strictly_decreasing = false;
    for (const EnergySample& es : r.energy) {
        d.e_chi_max = std::max(d.e_chi_max, es.e_chi);
        d.e_chi_final = es.e_chi;
    }
    d.sponge_ok = r.sponge_round_trip < 0.01;
    return d;
}

// --- snapshots on disk ------------------------------------------------------------

void save_snapshot(const std::string& path, const FieldSnapshot& snap, int nx, int ny, double h,
                   const Vec2& origin) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    char header[128];
    std::snprintf(header, sizeof(header), "conewave-field %d %d %.17g %.17g %.17g %.17g %d\n", nx,
                  ny, h, origin.x, origin.y, snap.t, snap.sheet);
    out << header;
    out.write(reinterpret_cast<const char*>(snap.u.data()),
              static_cast<std::streamsize>(snap.u.size() * sizeof(double)));
}

FieldSnapshot load_snapshot(const std::string& path, int* nx, int* ny, double* h, Vec2* origin) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(in, line);
    FieldSnapshot snap;
    int lnx = 0, lny = 0, sheet = 0;
    double lh = 0, ox = 0, oy = 0, t = 0;
    if (std::sscanf(line.c_str(), "conewave-field %d %d %lg %lg %lg %lg %d", &lnx, &lny, &lh, &ox,
                    &oy, &t, &sheet) != 7)
        throw std::runtime_error("not a field snapshot: " + path);
    snap.t = t;
    snap.sheet = sheet;
    snap.u.resize(static_cast<std::size_t>(lnx) * static_cast<std::size_t>(lny));
    in.read(reinterpret_cast<char*>(snap.u.data()),
            static_cast<std::streamsize>(snap.u.size() * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot payload truncated: " + path);
    if (nx) *nx = lnx;
    if (ny) *ny = lny;
    if (h) *h = lh;
    if (origin) *origin = Vec2{ox, oy};
    return snap;
}

}  // namespace conewave
