#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "conewave/assumptions.hpp"
#include "conewave/fdtd.hpp"
#include "conewave/flow.hpp"
#include "conewave/scene.hpp"
#include "conewave/surface.hpp"

using namespace conewave;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

PolygonScene square_scene() {
    PolygonScene s;
    s.obstacles = {{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
    s.R0 = 1.0;
    s.R1 = 2.0;
    return normalized_scene(s);
}

void bench_leapfrog() {
    const int n = 1024;
    StencilGrid g;
    g.nx = n;
    g.ny = n;
    g.h = 1.0 / 256.0;
    g.dt = 0.7 * g.h;
    g.origin = {-n * g.h / 2.0 + g.h / 2.0, -n * g.h / 2.0 + g.h / 2.0};
    g.solid.assign(static_cast<std::size_t>(n) * n, 0);
    g.damp_a.assign(static_cast<std::size_t>(n) * n, 1.0);
    g.damp_b.assign(static_cast<std::size_t>(n) * n, 1.0);

    std::vector<double> um(g.solid.size(), 0.0), u0(g.solid.size(), 0.0),
        up(g.solid.size(), 0.0);
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i)
            u0[g.at(i, j)] = std::sin(0.013 * i) * std::cos(0.017 * j);

    const int reps = 200;
    auto run = [&](bool parallel) {
        const auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            if (parallel)
                leapfrog_step_omp(g, um, u0, up, nullptr);
            else
                leapfrog_step_serial(g, um, u0, up, nullptr);
            std::swap(um, u0);
            std::swap(u0, up);
        }
        return seconds_since(t0);
    };

    const double ts = run(false);
    const double tp = run(true);
    const double cells = static_cast<double>(n) * n * reps;
    std::printf("leapfrog %dx%d, %d steps\n", n, n, reps);
    std::printf("  serial   %8.3f s  (%6.1f Mcell/s)\n", ts, cells / ts / 1e6);
    std::printf("  parallel %8.3f s  (%6.1f Mcell/s)  speedup %.2fx\n", tp, cells / tp / 1e6,
                ts / tp);
}

void bench_escape_sampler() {
    const ConeSurface surface = double_exterior(square_scene());
    const auto samples = nontrapping_samples(surface, 20000, 1);

    auto run = [&](bool parallel) {
        const auto t0 = Clock::now();
        const auto times = sample_escape_times(surface, samples, 40.0, {}, parallel);
        double acc = 0.0;
        for (double t : times)
            if (std::isfinite(t)) acc += t;
        std::printf("    (mean escape %.4f)\n", acc / static_cast<double>(times.size()));
        return seconds_since(t0);
    };

    std::printf("escape sweep, %zu rays\n", samples.size());
    std::printf("  serial:\n");
    const double ts = run(false);
    std::printf("  parallel:\n");
    const double tp = run(true);
    std::printf("  serial   %8.3f s\n  parallel %8.3f s  speedup %.2fx\n", ts, tp, ts / tp);
}

}  // namespace

int main() {
    bench_leapfrog();
    std::printf("\n");
    bench_escape_sampler();
    return 0;
}
