#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

#include "conewave/analysis.hpp"
#include "conewave/fdtd.hpp"
#include "conewave/scene.hpp"
#include "conewave/surface.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conewave;
using namespace conewave::testing;

namespace {

// Rectangular slab whose long top face acts as an infinite reflecting plane for
// early times; image-source superposition is then exact for both boundary
// conditions until the first corner-diffracted wave arrives.
PolygonScene slab_scene(BoundaryCondition bc) {
    PolygonScene s;
    s.obstacles = {{{-2.0, -1.8}, {2.0, -1.8}, {2.0, -1.0}, {-2.0, -1.0}}};
    s.R0 = 2.8;
    s.R1 = 3.0;
    s.bc = bc;
    return normalized_scene(s);
}

PolygonScene with_bc(PolygonScene s, BoundaryCondition bc) {
    s.bc = bc;
    return s;
}

double series_max_abs(const std::vector<double>& u, std::size_t lo = 0,
                      std::size_t hi = SIZE_MAX) {
    double m = 0.0;
    for (std::size_t n = lo; n < std::min(hi, u.size()); ++n) m = std::max(m, std::abs(u[n]));
    return m;
}

}  // namespace

TEST_CASE("ricker wavelet peaks at one and decays symmetrically") {
    const double f0 = 4.0, t0 = 0.375;
    CHECK(ricker(t0, f0, t0) == 1.0);
    CHECK(ricker(t0 + 0.1, f0, t0) == doctest::Approx(ricker(t0 - 0.1, f0, t0)));
    // zero crossing where pi f0 (t - t0) = 1/sqrt(2)
    const double tc = t0 + 1.0 / (std::sqrt(2.0) * M_PI * f0);
    CHECK(std::abs(ricker(tc, f0, t0)) < 1e-12);
    CHECK(std::abs(ricker(t0 + 1.5 / f0, f0, t0)) < 1e-7);
}

TEST_CASE("step kernels are bit-identical in serial and parallel") {
    StencilGrid g;
    g.nx = 37;
    g.ny = 29;
    g.h = 1.0 / 32.0;
    g.dt = 0.7 * g.h;
    g.origin = {-0.5, -0.4};
    const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
    g.solid.assign(n, 0);
    g.damp_a.assign(n, 0.0);
    g.damp_b.assign(n, 1.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> um(n), u0(n), other(n);
    for (std::size_t c = 0; c < n; ++c) {
        um[c] = val(rng);
        u0[c] = val(rng);
        other[c] = val(rng);
        if (rng() % 7 == 0) g.solid[c] = 1;
        if (rng() % 5 == 0) {
            g.damp_a[c] = 0.3 * std::abs(val(rng));
            g.damp_b[c] = 1.0 / (1.0 + g.damp_a[c]);
        }
    }

    for (bool negate : {true, false}) {
        for (const double* oth :
             {static_cast<const double*>(nullptr), static_cast<const double*>(other.data())}) {
            g.ghost_negate = negate;
            std::vector<double> up_s(n, 0.0), up_p(n, 0.0);
            leapfrog_step_serial(g, um, u0, up_s, oth);
            leapfrog_step_omp(g, um, u0, up_p, oth);
            CHECK(up_s == up_p);
        }
    }
}

TEST_CASE("time steps above the CFL bound are refused") {
    const PolygonScene scene = corpus_scene("freespace.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 0.5;
    grid.sponge = false;
    grid.domain_radius = 2.5;
    SourceSpec src;
    src.pos = {0.0, 0.0};
    src.f0 = 2.0;  // resolved at h = 1/32

    grid.dt = 0.8 * grid.h;
    CHECK_THROWS_WITH_AS(run_exterior(scene, grid, src, {}),
                         "time step violates the CFL bound h/sqrt(2)", std::invalid_argument);

    grid.dt = 0.999 * grid.h / std::sqrt(2.0);
    CHECK_NOTHROW(run_exterior(scene, grid, src, {}));
}

TEST_CASE("setup validation rejects bad layers, domains, sources, and probes") {
    const PolygonScene square = corpus_scene("square.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 0.2;
    SourceSpec src;
    src.pos = {-1.2, 0.0};
    src.f0 = 2.0;  // resolved at h = 1/32

    GridSpec thin = grid;
    thin.sponge_cells = 10;
    CHECK_THROWS_WITH_AS(run_exterior(square, thin, src, {}),
                         "absorbing layer needs at least 20 cells", std::invalid_argument);

    GridSpec small = grid;
    small.domain_radius = 2.2;  // < R1 + 24 cells of sponge
    CHECK_THROWS_WITH_AS(run_exterior(square, small, src, {}),
                         "domain radius must cover R1 plus the absorbing layer",
                         std::invalid_argument);

    SourceSpec fast = src;
    fast.f0 = 8.0;  // wavelength 1/8 < 10 h
    CHECK_THROWS_WITH_AS(run_exterior(square, grid, fast, {}),
                         "source wavelength under-resolved on this grid", std::invalid_argument);

    SourceSpec buried = src;
    buried.pos = {0.0, 0.0};
    CHECK_THROWS_WITH_AS(run_exterior(square, grid, buried, {}),
                         "source must sit in the open exterior", std::invalid_argument);

    SourceSpec grazing = src;
    grazing.pos = {0.5 + 2.0 * grid.h, 0.5};
    CHECK_THROWS_WITH_AS(run_exterior(square, grid, grazing, {}),
                         "source must stay at least 5 cells from every vertex",
                         std::invalid_argument);

    SourceSpec detached = src;
    detached.sigma = 1e-4;  // support falls between nodes
    detached.pos = {-1.2 + grid.h / 2.0, grid.h / 2.0};
    CHECK_THROWS_WITH_AS(run_exterior(square, grid, detached, {}),
                         "source does not touch any grid node", std::invalid_argument);

    CHECK_THROWS_WITH_AS(run_exterior(square, grid, src, {{"far", {10.0, 10.0}, 0}}),
                         "probe outside the grid: far", std::invalid_argument);
    CHECK_THROWS_WITH_AS(run_exterior(square, grid, src, {{"in", {0.0, 0.0}, 0}}),
                         "probe inside an obstacle: in", std::invalid_argument);

    const ConeSurface slit = corpus_surface("slit_cover.json");
    CHECK_THROWS_WITH_AS(run_doubled(slit, grid, src, {}),
                         "grid solver supports doubled exteriors only", std::invalid_argument);
}

TEST_CASE("zero-amplitude source leaves the field identically zero") {
    const PolygonScene scene = corpus_scene("freespace.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 0.5;
    grid.sponge = false;
    grid.domain_radius = 2.2;
    SourceSpec src;
    src.pos = {0.0, 0.0};
    src.f0 = 2.0;
    src.amplitude = 0.0;

    const FdtdResult r = run_exterior(scene, grid, src,
                                      {{"lit", {0.5, 0.0}, 0}, {"sh", {0.0, 0.5}, 0}});
    for (double v : r.final_u[0]) CHECK(v == 0.0);
    CHECK(series_max_abs(r.probes[0].u) == 0.0);

    // a silent line-of-sight probe cannot anchor a contrast ratio
    CHECK_THROWS_WITH_AS(diffraction_contrast(r, "lit", "sh", src.f0),
                         "line-of-sight probe recorded no band energy", std::runtime_error);
}

TEST_CASE("the discrete field respects the light cone") {
    const PolygonScene scene = corpus_scene("freespace.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 1.2;
    grid.sponge = false;
    grid.domain_radius = 3.0;
    grid.energy_stride = 0;
    SourceSpec src;
    src.pos = {0.0, 0.0};
    src.f0 = 2.0;

    const FdtdResult r = run_exterior(scene, grid, src, {});
    const double t_end = static_cast<double>(r.steps) * r.dt;
    const double sigma = 2.0 * grid.h;
    const double front = t_end + 6.0 * sigma + 0.35;

    double peak = 0.0, outside = 0.0;
    for (int j = 0; j < r.ny; ++j) {
        for (int i = 0; i < r.nx; ++i) {
            const Vec2 p = r.origin + Vec2{i * r.h, j * r.h};
            const double v = std::abs(r.final_u[0][static_cast<std::size_t>(j) * r.nx + i]);
            peak = std::max(peak, v);
            if (p.norm() >= front) outside = std::max(outside, v);
        }
    }
    CHECK(peak > 1e-6);
    CHECK(outside <= 1e-7 * peak);
}

TEST_CASE("energy is conserved in a reflecting box once the source stops") {
    const PolygonScene scene = corpus_scene("freespace.json");
    GridSpec grid;
    grid.h = 1.0 / 64.0;
    grid.T = 2.0;
    grid.sponge = false;
    grid.domain_radius = 2.0;
    grid.energy_stride = 4;
    SourceSpec src;
    src.pos = {0.0, 0.0};
    src.f0 = 4.0;

    const FdtdResult r = run_exterior(scene, grid, src, {});
    CHECK(r.sponge_round_trip == 1.0);
    REQUIRE(!r.energy.empty());

    const double t_off = 0.375 + 1.5 / src.f0;
    double emin = 0.0, emax = 0.0;
    bool seen = false;
    for (const EnergySample& s : r.energy) {
        if (s.t <= t_off) continue;
        if (!seen) {
            emin = emax = s.e_total;
            seen = true;
        }
        emin = std::min(emin, s.e_total);
        emax = std::max(emax, s.e_total);
    }
    REQUIRE(seen);
    CHECK(emax > 0.0);
    CHECK((emax - emin) / emax < 1e-9);
    CHECK(r.energy_drift_per_1k >= 0.0);
    CHECK(r.energy_drift_per_1k <= 1e-6);
}

TEST_CASE("serial and parallel solver paths produce identical results") {
    const ConeSurface surface = corpus_surface("square.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 0.8;
    grid.domain_radius = 2.8;
    SourceSpec src;
    src.pos = {-1.2, 0.3};
    src.f0 = 2.0;
    const std::vector<ProbeSpec> probes = {{"a", {1.1, 0.2}, 0}, {"b", {-0.8, -0.9}, 1}};

    const FdtdResult rs = run_doubled(surface, grid, src, probes, false);
    const FdtdResult rp = run_doubled(surface, grid, src, probes, true);
    REQUIRE(rs.final_u.size() == 2);
    CHECK(rs.final_u[0] == rp.final_u[0]);
    CHECK(rs.final_u[1] == rp.final_u[1]);
    for (std::size_t k = 0; k < probes.size(); ++k) CHECK(rs.probes[k].u == rp.probes[k].u);
    REQUIRE(rs.energy.size() == rp.energy.size());
    for (std::size_t k = 0; k < rs.energy.size(); ++k)
        CHECK(rs.energy[k].e_total == rp.energy[k].e_total);

    const PolygonScene scene = corpus_scene("square.json");
    const FdtdResult es = run_exterior(scene, grid, src, probes, false);
    const FdtdResult ep = run_exterior(scene, grid, src, probes, true);
    CHECK(es.final_u[0] == ep.final_u[0]);
    CHECK(es.probes[0].u == ep.probes[0].u);
}

TEST_CASE("sheet sum and difference reproduce the Neumann and Dirichlet exteriors") {
    const ConeSurface surface = corpus_surface("square.json");
    const PolygonScene base = corpus_scene("square.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 1.5;
    grid.sponge = false;
    grid.domain_radius = 2.2;
    grid.energy_stride = 0;
    SourceSpec src;
    src.pos = {-1.1, 0.07};
    src.f0 = 2.0;
    const Vec2 ppos{-0.9, 0.4};

    const FdtdResult r2 =
        run_doubled(surface, grid, src, {{"a0", ppos, 0}, {"a1", ppos, 1}});
    const FdtdResult rn =
        run_exterior(with_bc(base, BoundaryCondition::Neumann), grid, src, {{"a", ppos, 0}});
    const FdtdResult rd =
        run_exterior(with_bc(base, BoundaryCondition::Dirichlet), grid, src, {{"a", ppos, 0}});

    REQUIRE(r2.nx == rn.nx);
    REQUIRE(r2.ny == rd.ny);
    REQUIRE(r2.origin.x == rn.origin.x);
    REQUIRE(r2.dt == rn.dt);
    REQUIRE(r2.steps == rn.steps);

    const std::vector<double>&f0 = r2.final_u[0], &f1 = r2.final_u[1];
    double scale_n = 0.0, scale_d = 0.0, err_n = 0.0, err_d = 0.0;
    for (std::size_t c = 0; c < f0.size(); ++c) {
        scale_n = std::max(scale_n, std::abs(rn.final_u[0][c]));
        scale_d = std::max(scale_d, std::abs(rd.final_u[0][c]));
        err_n = std::max(err_n, std::abs(f0[c] + f1[c] - rn.final_u[0][c]));
        err_d = std::max(err_d, std::abs(f0[c] - f1[c] - rd.final_u[0][c]));
    }
    CHECK(scale_n > 1e-6);
    CHECK(err_n <= 1e-9 * scale_n);
    CHECK(err_d <= 1e-9 * scale_d);

    // the same identity holds sample by sample at the probes
    const std::vector<double>&a0 = r2.probes[0].u, &a1 = r2.probes[1].u;
    double perr_n = 0.0, perr_d = 0.0;
    for (std::size_t n = 0; n < a0.size(); ++n) {
        perr_n = std::max(perr_n, std::abs(a0[n] + a1[n] - rn.probes[0].u[n]));
        perr_d = std::max(perr_d, std::abs(a0[n] - a1[n] - rd.probes[0].u[n]));
    }
    const double pscale_n = series_max_abs(rn.probes[0].u);
    CHECK(pscale_n > 1e-6);
    CHECK(perr_n <= 1e-9 * pscale_n);
    CHECK(perr_d <= 1e-9 * series_max_abs(rd.probes[0].u));
}

TEST_CASE("a straight face reflects like an image source for both conditions") {
    GridSpec grid;
    grid.h = 1.0 / 96.0;
    grid.T = 3.1;  // first corner-diffracted arrival is at 3.8
    grid.sponge = false;
    grid.domain_radius = 3.0;
    grid.energy_stride = 0;
    SourceSpec src;
    src.pos = {0.0, -0.3};
    src.f0 = 2.0;
    const Vec2 ppos{0.5, -0.2};
    const double sigma = 2.0 * grid.h;
    const double t0 = 1.5 / src.f0;
    const double direct = std::hypot(ppos.x - src.pos.x, ppos.y - src.pos.y);
    const double image = std::hypot(ppos.x - src.pos.x, ppos.y - (-2.0 - src.pos.y));

    const FdtdResult rd =
        run_exterior(slab_scene(BoundaryCondition::Dirichlet), grid, src, {{"p", ppos, 0}});
    const FdtdResult rn =
        run_exterior(slab_scene(BoundaryCondition::Neumann), grid, src, {{"p", ppos, 0}});

    const auto ref =
        free_space_reference({direct, image}, rd.t, src.f0, t0, t0 + 1.5 / src.f0, sigma, 1.0);
    std::vector<double> want_d(rd.t.size()), want_n(rd.t.size());
    for (std::size_t n = 0; n < rd.t.size(); ++n) {
        want_d[n] = ref[0][n] - ref[1][n];
        want_n[n] = ref[0][n] + ref[1][n];
    }
    CHECK(rel_l2(rd.probes[0].u, want_d) < 0.03);
    CHECK(rel_l2(rn.probes[0].u, want_n) < 0.03);

    // the onset of the direct pulse lands where free propagation says it should
    const double fa = first_arrival(rd.probes[0].u, rd.dt, src.f0);
    CHECK(std::abs(fa - t0 - direct) <= 0.5 / src.f0 + 2.0 * grid.h);
}

TEST_CASE("probes at grid nodes match field snapshots exactly") {
    const PolygonScene scene = corpus_scene("freespace.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 0.8;
    grid.sponge = false;
    grid.domain_radius = 2.5;
    grid.snapshot_times = {0.6};
    SourceSpec src;
    src.pos = {0.0, 0.0};
    src.f0 = 2.0;

    // node (90, 70) of the 160x160 grid
    const int nx_want = 160;
    const Vec2 origin_want{-2.5 + grid.h / 2.0, -2.5 + grid.h / 2.0};
    const Vec2 ppos{origin_want.x + 90 * grid.h, origin_want.y + 70 * grid.h};

    const FdtdResult r = run_exterior(scene, grid, src, {{"node", ppos, 0}});
    CHECK(r.nx == nx_want);
    CHECK(r.origin.x == doctest::Approx(origin_want.x).epsilon(1e-15));
    CHECK(r.dt == 0.7 * grid.h);

    REQUIRE(r.snapshots.size() == 1);
    const FieldSnapshot& snap = r.snapshots[0];
    CHECK(snap.sheet == 0);
    CHECK(std::abs(snap.t - 0.6) <= r.dt / 2.0);

    const long n_match = std::lround(snap.t / r.dt);
    REQUIRE(n_match < static_cast<long>(r.t.size()));
    CHECK(r.t[n_match] == snap.t);
    const std::size_t c = static_cast<std::size_t>(70) * r.nx + 90;
    CHECK(r.probes[0].u[static_cast<std::size_t>(n_match)] == snap.u[c]);
    CHECK(series_max_abs(r.probes[0].u) > 1e-6);
}

TEST_CASE("field snapshots round-trip through disk exactly") {
    const PolygonScene scene = corpus_scene("freespace.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 0.5;
    grid.sponge = false;
    grid.domain_radius = 2.2;
    grid.snapshot_times = {0.4};
    SourceSpec src;
    src.pos = {0.0, 0.0};
    src.f0 = 2.0;

    const FdtdResult r = run_exterior(scene, grid, src, {});
    REQUIRE(r.snapshots.size() == 1);

    const std::string path = "snapshot_roundtrip.bin";
    save_snapshot(path, r.snapshots[0], r.nx, r.ny, r.h, r.origin);
    int nx = 0, ny = 0;
    double h = 0.0;
    Vec2 origin;
    const FieldSnapshot back = load_snapshot(path, &nx, &ny, &h, &origin);
    std::remove(path.c_str());

    CHECK(nx == r.nx);
    CHECK(ny == r.ny);
    CHECK(h == r.h);
    CHECK(origin.x == r.origin.x);
    CHECK(origin.y == r.origin.y);
    CHECK(back.t == r.snapshots[0].t);
    CHECK(back.sheet == r.snapshots[0].sheet);
    CHECK(back.u == r.snapshots[0].u);
}

TEST_CASE("the absorbing layer swallows outgoing waves that walls would return") {
    const PolygonScene scene = corpus_scene("square.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 6.0;
    grid.domain_radius = 3.0125;
    SourceSpec src;
    src.pos = {-1.2, 0.0};
    src.f0 = 2.0;
    const std::vector<ProbeSpec> probes = {{"e", {0.2, 1.5}, 0}};

    const FdtdResult ra = run_exterior(scene, grid, src, probes);
    CHECK(ra.sponge_round_trip < 0.01);

    GridSpec walls = grid;
    walls.sponge = false;
    const FdtdResult rw = run_exterior(scene, walls, src, probes);
    CHECK(rw.sponge_round_trip == 1.0);
    REQUIRE(ra.t.size() == rw.t.size());

    std::size_t late = ra.t.size();
    for (std::size_t n = 0; n < ra.t.size(); ++n) {
        if (ra.t[n] >= 5.0) {
            late = n;
            break;
        }
    }
    REQUIRE(late < ra.t.size());
    const double peak_a = series_max_abs(ra.probes[0].u);
    const double peak_w = series_max_abs(rw.probes[0].u);
    const double late_a = series_max_abs(ra.probes[0].u, late);
    const double late_w = series_max_abs(rw.probes[0].u, late);
    // Both runs keep the slow 2D Huygens tail; only the walls run adds the
    // reflected pulse on top of it.
    CHECK(late_w >= 1e-2 * peak_w);
    CHECK(late_a <= 0.1 * peak_a);
    CHECK(late_a <= 0.25 * late_w);
}

TEST_CASE("shadow contrast and decay windows come out of a doubled run") {
    const ConeSurface surface = corpus_surface("square.json");
    GridSpec grid;
    grid.h = 1.0 / 32.0;
    grid.T = 4.0;
    SourceSpec src;
    src.pos = {-1.2, 0.0};
    src.f0 = 2.5;
    const std::vector<ProbeSpec> probes = {
        {"lit", {0.2, 1.5}, 0}, {"sh", {1.2, 0.0}, 0}, {"back", {0.3, -1.2}, 1}};

    const FdtdResult r = run_doubled(surface, grid, src, probes);

    const ContrastReport cr = diffraction_contrast(r, "lit", "sh", src.f0);
    CHECK(cr.f_lo == src.f0);
    CHECK(cr.f_hi == 2.0 * src.f0);
    CHECK(cr.peak_lit > 0.0);
    CHECK(cr.peak_shadow > 0.0);
    CHECK(cr.peak_shadow < cr.peak_lit);
    CHECK(cr.ratio == doctest::Approx(cr.peak_shadow / cr.peak_lit));
    CHECK(cr.ratio > 0.0);
    CHECK(cr.ratio < 1.0);
    CHECK(cr.e_lit > 0.0);
    CHECK(cr.e_shadow > 0.0);
    CHECK_THROWS_WITH_AS(diffraction_contrast(r, "nope", "sh", src.f0), "probe not found: nope",
                         std::invalid_argument);

    const DecayReport dr = decay_report(r, 0.25, 3, src.f0);
    REQUIRE(dr.window_energy.size() == 3);
    CHECK(dr.window_t0[0] == 0.0);
    CHECK(dr.window_t1[0] == doctest::Approx(1.25));
    CHECK(dr.window_t0[2] == doctest::Approx(2.5));
    CHECK(dr.window_t1[2] == doctest::Approx(3.75));
    for (double e : dr.window_energy) CHECK(e >= 0.0);
    CHECK(dr.e_chi_max > 0.0);
    CHECK(dr.sponge_ok);
    CHECK_THROWS_WITH_AS(decay_report(r, 10.0, 3, src.f0),
                         "run too short for the requested decay windows", std::invalid_argument);
}

TEST_CASE("first arrival picks up a delayed wavelet and ignores silence") {
    const double dt = 1e-3, f0 = 5.0;
    std::vector<double> u(3000, 0.0);
    for (std::size_t n = 0; n < u.size(); ++n) u[n] = ricker(n * dt - 1.2, f0, 0.3);
    const double fa = first_arrival(u, dt, f0);
    CHECK(std::abs(fa - 1.5) <= 0.1);

    const std::vector<double> flat(1000, 0.0);
    CHECK(std::isnan(first_arrival(flat, dt, f0)));
}
