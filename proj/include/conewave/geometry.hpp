#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace conewave {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    double angle() const { return std::atan2(y, x); }

    Vec2 normalized() const {
        const double n = norm();
        if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
        return {x / n, y / n};
    }
    Vec2 perp() const { return {-y, x}; }
    Vec2 rotated(double a) const {
        const double c = std::cos(a), s = std::sin(a);
        return {c * x - s * y, s * x + c * y};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Reflect a direction across the line spanned by unit vector e.
inline Vec2 reflect_dir(const Vec2& d, const Vec2& e) {
    const double p = d.dot(e);
    return Vec2{2.0 * p * e.x - d.x, 2.0 * p * e.y - d.y};
}

// Remainder in [0, m).
inline double pos_mod(double a, double m) {
    double r = std::fmod(a, m);
    if (r < 0.0) r += m;
    if (r >= m) r = 0.0;  // guard against fmod rounding exactly to m
    return r;
}

// Metric distance between angles a, b on a circle of circumference theta.
inline double circle_dist(double a, double b, double theta) {
    const double m = pos_mod(a - b, theta);
    return std::min(m, theta - m);
}

// Unsigned angle between two directions, in [0, pi].
inline double angle_between(const Vec2& a, const Vec2& b) {
    return std::atan2(std::abs(a.cross(b)), a.dot(b));
}

struct SegHit {
    double t = 0.0;  // parameter along segment a (0..1)
    double s = 0.0;  // parameter along segment b (0..1)
    Vec2 point;
};

// Intersection of segments [a0,a1] and [b0,b1]. Endpoint touches count when the
// parameters fall inside [-eps, 1+eps]. Parallel segments report no hit.
inline std::optional<SegHit> segment_intersect(const Vec2& a0, const Vec2& a1,
                                               const Vec2& b0, const Vec2& b1,
                                               double eps = 0.0) {
    const Vec2 r = a1 - a0;
    const Vec2 s = b1 - b0;
    const double den = r.cross(s);
    const double scale = std::max({std::abs(r.x), std::abs(r.y), std::abs(s.x), std::abs(s.y), 1e-300});
    if (std::abs(den) <= 1e-14 * scale * scale) return std::nullopt;
    const Vec2 qp = b0 - a0;
    const double t = qp.cross(s) / den;
    const double u = qp.cross(r) / den;
    if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return std::nullopt;
    return SegHit{t, u, a0 + r * t};
}

// Distance from p to segment [a,b]; optionally reports the clamped parameter.
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b,
                                     double* t_out = nullptr) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t_out) *t_out = t;
    return (p - (a + ab * t)).norm();
}

enum class PointSide { Inside, OnBoundary, Outside };

// Crossing-number point location with an explicit boundary band of width tol.
inline PointSide point_in_polygon(const Vec2& p, const std::vector<Vec2>& loop, double tol) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (point_segment_distance(p, loop[i], loop[(i + 1) % n]) <= tol) return PointSide::OnBoundary;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = loop[i];
        const Vec2& b = loop[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside ? PointSide::Inside : PointSide::Outside;
}

inline double polygon_signed_area(const std::vector<Vec2>& loop) {
    double a = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = loop[i];
        const Vec2& q = loop[(i + 1) % n];
        a += p.cross(q);
    }
    return 0.5 * a;
}

// Proper self-intersection test for a closed loop (shared endpoints allowed).
inline bool is_simple_polygon(const std::vector<Vec2>& loop) {
    const std::size_t n = loop.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a0 = loop[i];
        const Vec2& a1 = loop[(i + 1) % n];
        if ((a1 - a0).norm() == 0.0) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Vec2& b0 = loop[j];
            const Vec2& b1 = loop[(j + 1) % n];
            auto hit = segment_intersect(a0, a1, b0, b1, 0.0);
            if (!hit) continue;
            if (adjacent) {
                // Sharing the common endpoint is fine; anything interior is not.
                const bool at_end = (hit->t < 1e-12 || hit->t > 1.0 - 1e-12) &&
                                    (hit->s < 1e-12 || hit->s > 1.0 - 1e-12);
                if (!at_end) return false;
            } else {
                return false;
            }
        }
    }
    return true;
}

// Interior angle at vertex i of a CCW-oriented simple loop, in (0, 2*pi).
inline double interior_angle(const std::vector<Vec2>& loop, std::size_t i) {
    const std::size_t n = loop.size();
    const Vec2 v = loop[i];
    const Vec2 to_prev = (loop[(i + n - 1) % n] - v).normalized();
    const Vec2 to_next = (loop[(i + 1) % n] - v).normalized();
    // For CCW orientation the interior is swept CCW from the outgoing edge
    // (to_next) to the incoming edge reversed (to_prev).
    return pos_mod(to_prev.angle() - to_next.angle(), kTwoPi);
}

// Deterministic low-discrepancy sequence (van der Corput / Halton).
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

}  // namespace conewave
