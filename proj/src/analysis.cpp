#include "conewave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conewave {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * 3.14159265358979323846 / double(len);
        const std::complex<double> wl{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= double(n);
}

}  // namespace

std::vector<std::complex<double>> fft_pow2(const std::vector<std::complex<double>>& in,
                                           bool inverse) {
    std::vector<std::complex<double>> a = in;
    a.resize(next_pow2(std::max<std::size_t>(in.size(), 1)), {0.0, 0.0});
    fft_inplace(a, inverse);
    return a;
}

std::vector<double> band_pass(const std::vector<double>& x, double dt, double f_lo, double f_hi) {
    if (dt <= 0.0) throw std::invalid_argument("sample step must be positive");
    if (!(f_lo < f_hi)) throw std::invalid_argument("band must be nonempty");
    if (x.empty()) return {};
    std::vector<std::complex<double>> a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
    a = fft_pow2(a, false);
    const std::size_t n = a.size();
    const double df = 1.0 / (double(n) * dt);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = (k <= n / 2 ? double(k) : double(k) - double(n)) * df;
        const double af = std::abs(f);
        if (af < f_lo || af > f_hi) a[k] = {0.0, 0.0};
    }
    fft_inplace(a, true);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a[i].real();
    return out;
}

double band_energy(const std::vector<double>& x, double dt, double f_lo, double f_hi) {
    const std::vector<double> b = band_pass(x, dt, f_lo, f_hi);
    double e = 0.0;
    for (double v : b) e += v * v;
    return e * dt;
}

double band_energy_window(const std::vector<double>& x, double dt, double t_lo, double t_hi,
                          double f_lo, double f_hi) {
    if (!(t_lo < t_hi)) throw std::invalid_argument("window must be nonempty");
    std::vector<double> w(x.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = double(i) * dt;
        if (t >= t_lo && t <= t_hi) {
            w[i] = x[i];
            any = true;
        }
    }
    if (!any) return 0.0;
    return band_energy(w, dt, f_lo, f_hi);
}

std::vector<double> envelope_rms(const std::vector<double>& x, int half_width) {
    if (half_width < 0) throw std::invalid_argument("half width must be nonnegative");
    const long n = static_cast<long>(x.size());
    std::vector<double> out(x.size(), 0.0);
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (long i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
    for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - half_width);
        const long hi = std::min(n - 1, i + half_width);
        out[i] = std::sqrt((prefix[hi + 1] - prefix[lo]) / double(hi - lo + 1));
    }
    return out;
}

double first_arrival(const std::vector<double>& u, double dt, double f0, double rel_threshold) {
    if (u.empty() || f0 <= 0.0 || dt <= 0.0) return std::nan("");
    const long n = static_cast<long>(u.size());

    // Matched filter against the emitted wavelet shape; the correlation peaks
    // where the wavelet center passes the probe.
    const double tc = 1.5 / f0;
    const long m = std::max(3L, std::lround(2.0 * tc / dt)) | 1L;
    const long half = m / 2;
    std::vector<double> kern(static_cast<std::size_t>(m));
    for (long j = 0; j < m; ++j) {
        const double a = 3.14159265358979323846 * f0 * (double(j) * dt - tc);
        kern[static_cast<std::size_t>(j)] = (1.0 - 2.0 * a * a) * std::exp(-a * a);
    }
    std::vector<std::complex<double>> corr(u.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long j = std::max(0L, half - i); j < m && i + j - half < n; ++j)
            acc += u[static_cast<std::size_t>(i + j - half)] * kern[static_cast<std::size_t>(j)];
        corr[static_cast<std::size_t>(i)] = {acc, 0.0};
    }

    // Analytic envelope of the correlation: one smooth hump per arrival.
    std::vector<std::complex<double>> spec = fft_pow2(corr, false);
    const std::size_t nfft = spec.size();
    for (std::size_t k = 1; k < nfft / 2; ++k) spec[k] *= 2.0;
    for (std::size_t k = nfft / 2 + 1; k < nfft; ++k) spec[k] = {0.0, 0.0};
    fft_inplace(spec, true);

    double peak = 0.0;
    for (long i = 0; i < n; ++i)
        peak = std::max(peak, std::abs(spec[static_cast<std::size_t>(i)]));
    if (!(peak > 0.0) || peak < 1e-300) return std::nan("");
    const double thr = rel_threshold * peak;
    for (long i = 1; i + 1 < n; ++i) {
        const double e = std::abs(spec[static_cast<std::size_t>(i)]);
        if (e >= thr && e >= std::abs(spec[static_cast<std::size_t>(i - 1)]) &&
            e >= std::abs(spec[static_cast<std::size_t>(i + 1)]))
            return double(i) * dt;
    }
    for (long i = 0; i < n; ++i)
        if (std::abs(spec[static_cast<std::size_t>(i)]) >= thr) return double(i) * dt;
    return std::nan("");
}

}  // namespace conewave
