#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conewave/surface.hpp"

namespace conewave {

// --- grid and kernels -------------------------------------------------------

// Node-centered square grid over [-D, D]^2; nodes sit at cell centers so
// axis-aligned obstacle edges fall on faces between node rows.
struct StencilGrid {
    int nx = 0, ny = 0;
    double h = 0.0, dt = 0.0;
    Vec2 origin;                          // position of node (0, 0)
    bool ghost_negate = true;             // solid faces: true Dirichlet, false Neumann
    std::vector<std::uint8_t> solid;      // 1 = inside an obstacle
    std::vector<double> damp_a, damp_b;   // sponge coefficients per node

    std::size_t at(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(i);
    }
    Vec2 node(int i, int j) const { return origin + Vec2{i * h, j * h}; }
};

// One leapfrog step up[c] = B (2 u0 - A um + (dt/h)^2 lap). `other` carries the
// partner sheet's current level: a solid neighbor then reads other[center]
// instead of the ghost, which glues the two sheets across the boundary faces.
// Serial and parallel kernels produce bit-identical fields.
void leapfrog_step_serial(const StencilGrid& g, const std::vector<double>& um,
                          const std::vector<double>& u0, std::vector<double>& up,
                          const double* other);
void leapfrog_step_omp(const StencilGrid& g, const std::vector<double>& um,
                       const std::vector<double>& u0, std::vector<double>& up,
                       const double* other);

// Stiffness action (K u)[c] = (4 u_c - sum of neighbor values) / h^2 with the
// same ghost and cross-sheet conventions as the step kernels.
void apply_stiffness(const StencilGrid& g, const std::vector<double>& u, const double* other,
                     std::vector<double>& out);

// --- solver ------------------------------------------------------------------

struct GridSpec {
    double h = 1.0 / 64.0;
    double dt = 0.0;            // 0 selects 0.7 h (below the h/sqrt(2) limit)
    double T = 1.0;
    double domain_radius = 0.0; // 0 selects R1 * 1.1 + sponge + 2h
    bool sponge = true;
    int sponge_cells = 24;
    double sponge_sigma = 0.0;  // 0 selects 40 / (sponge_cells * h)
    int energy_stride = 8;      // steps between energy samples; 0 disables
    std::vector<double> snapshot_times;
};

struct SourceSpec {
    Vec2 pos;
    int sheet = 0;
    double f0 = 4.0;       // Ricker peak frequency; wavelength 1/f0 needs >= 10h
    double sigma = 0.0;    // spatial Gaussian width; 0 selects 2h
    double amplitude = 1.0;
    double t0 = 0.0;       // 0 selects 1.5 / f0
};

double ricker(double t, double f0, double t0);

struct ProbeSpec {
    std::string id;
    Vec2 pos;
    int sheet = 0;
};

struct ProbeSeries {
    ProbeSpec spec;
    std::vector<double> u;
    std::vector<double> dudt;
};

struct EnergySample {
    double t = 0.0;
    double e_total = 0.0;  // discrete conserved form (exact without sponge)
    double e_chi = 0.0;    // cutoff energy inside |z| < R1
};

struct FieldSnapshot {
    double t = 0.0;
    int sheet = 0;
    std::vector<double> u;
};

struct FdtdResult {
    int nx = 0, ny = 0;
    double h = 0.0, dt = 0.0;
    Vec2 origin;
    long steps = 0;
    bool doubled = false;
    // exp(-integral of sigma) across the absorbing layer and back; 1 when the
    // run has no layer and the box walls reflect everything.
    double sponge_round_trip = 1.0;
    std::vector<double> t;  // probe sample times
    std::vector<ProbeSeries> probes;
    std::vector<EnergySample> energy;
    double energy_drift_per_1k = 0.0;  // relative spread after the source stops
    std::vector<FieldSnapshot> snapshots;
    std::vector<std::vector<double>> final_u;  // one field per sheet
};

// Single-sheet exterior run with the scene's boundary condition.
FdtdResult run_exterior(const PolygonScene& scene, const GridSpec& grid, const SourceSpec& source,
                        const std::vector<ProbeSpec>& probes, bool parallel = true);

// Two-sheet run on the doubled exterior; crossing the boundary transports the
// wave onto the partner sheet.
FdtdResult run_doubled(const ConeSurface& surface, const GridSpec& grid, const SourceSpec& source,
                       const std::vector<ProbeSpec>& probes, bool parallel = true);

// --- derived reports -----------------------------------------------------------

struct ContrastReport {
    double ratio = 0.0;  // shadow/lit peak amplitude ratio in the top band
    double peak_lit = 0.0;
    double peak_shadow = 0.0;
    double e_lit = 0.0;
    double e_shadow = 0.0;
    double f_lo = 0.0, f_hi = 0.0;
};

// Ratio of band-passed peak amplitudes (shadow probe over line-of-sight probe)
// in the top band [f0, 2 f0]. Throws when either probe id is missing.
ContrastReport diffraction_contrast(const FdtdResult& r, const std::string& lit_probe,
                                    const std::string& shadow_probe, double f0);

struct DecayReport {
    std::vector<double> window_t0, window_t1;
    std::vector<double> window_energy;  // top-band probe energy per window
    bool strictly_decreasing = false;
    double e_chi_max = 0.0;
    double e_chi_final = 0.0;
    bool sponge_ok = false;  // absorbing layer present and wide enough to trust
};

// Probe band energies over windows [5 k t0, 5 (k+1) t0], k = 0..k_windows-1.
DecayReport decay_report(const FdtdResult& r, double t0, int k_windows, double f0);

// --- field snapshots on disk ------------------------------------------------------

void save_snapshot(const std::string& path, const FieldSnapshot& snap, int nx, int ny, double h,
                   const Vec2& origin);
FieldSnapshot load_snapshot(const std::string& path, int* nx, int* ny, double* h, Vec2* origin);

}  // namespace conewave
