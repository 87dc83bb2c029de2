#include <cstddef>

#include "conewave/fdtd.hpp"

namespace conewave {

namespace {

// Neighbor value seen from node c across one face. Solid neighbors read the
// partner sheet's center value when coupled, otherwise the face ghost.
inline double face_value(const StencilGrid& g, const std::vector<double>& u, const double* other,
                         std::size_t center, std::size_t nb) {
    if (!g.solid[nb]) return u[nb];
    if (other) return other[center];
    return g.ghost_negate ? -u[center] : u[center];
}

inline void update_row(const StencilGrid& g, const std::vector<double>& um,
                       const std::vector<double>& u0, std::vector<double>& up,
                       const double* other, int j) {
    const double c2 = (g.dt / g.h) * (g.dt / g.h);
    for (int i = 1; i < g.nx - 1; ++i) {
        const std::size_t c = g.at(i, j);
        if (g.solid[c]) {
            up[c] = 0.0;
            continue;
        }
        const double lap = face_value(g, u0, other, c, c - 1) +
                           face_value(g, u0, other, c, c + 1) +
                           face_value(g, u0, other, c, c - std::size_t(g.nx)) +
                           face_value(g, u0, other, c, c + std::size_t(g.nx)) - 4.0 * u0[c];
        up[c] = g.damp_b[c] * (2.0 * u0[c] - g.damp_a[c] * um[c] + c2 * lap);
    }
}

}  // namespace

void leapfrog_step_serial(const StencilGrid& g, const std::vector<double>& um,
                          const std::vector<double>& u0, std::vector<double>& up,
                          const double* other) {
    for (int j = 1; j < g.ny - 1; ++j) update_row(g, um, u0, up, other, j);
}

void leapfrog_step_omp(const StencilGrid& g, const std::vector<double>& um,
                       const std::vector<double>& u0, std::vector<double>& up,
                       const double* other) {
#pragma omp parallel for schedule(static)
    for (int j = 1; j < g.ny - 1; ++j) update_row(g, um, u0, up, other, j);
}

void apply_stiffness(const StencilGrid& g, const std::vector<double>& u, const double* other,
                     std::vector<double>& out) {
    const double inv_h2 = 1.0 / (g.h * g.h);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = g.at(i, j);
            if (g.solid[c] || i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) {
                out[c] = 0.0;
                continue;
            }
            const double lap = face_value(g, u, other, c, c - 1) +
                               face_value(g, u, other, c, c + 1) +
                               face_value(g, u, other, c, c - std::size_t(g.nx)) +
                               face_value(g, u, other, c, c + std::size_t(g.nx)) - 4.0 * u[c];
            out[c] = -lap * inv_h2;
        }
}

}  // namespace conewave
