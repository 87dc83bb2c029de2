#pragma once

#include <complex>
#include <vector>

namespace conewave {

// In-place radix-2 FFT; the input is zero-padded to the next power of two.
std::vector<std::complex<double>> fft_pow2(const std::vector<std::complex<double>>& in,
                                           bool inverse);

// Zero-phase band-pass via the frequency domain (hard band edges in Hz).
std::vector<double> band_pass(const std::vector<double>& x, double dt, double f_lo, double f_hi);

// Integral of the squared band-limited signal (Parseval over the band).
double band_energy(const std::vector<double>& x, double dt, double f_lo, double f_hi);

// Band energy of the samples restricted to t in [t_lo, t_hi].
double band_energy_window(const std::vector<double>& x, double dt, double t_lo, double t_hi,
                          double f_lo, double f_hi);

// Moving RMS envelope with the given half width in samples.
std::vector<double> envelope_rms(const std::vector<double>& x, int half_width);

// Arrival time of the first wavelet: the first local maximum of the
// matched-filter envelope above rel_threshold of its global peak, anchored
// at the wavelet center. NaN when the signal is flat.
double first_arrival(const std::vector<double>& u, double dt, double f0,
                     double rel_threshold = 0.1);

}  // namespace conewave
