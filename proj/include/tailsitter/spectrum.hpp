#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tailsitter {

/// One-sided power spectrum of a real signal (mean removed, optional Hann window).
struct Periodogram {
    std::vector<double> freqs;  // Hz, bin centers 0 .. fs/2
    std::vector<double> power;  // arbitrary consistent units, one-sided
};

/// Bins 0 .. n/2 of the unnormalized DFT of a real signal.
std::vector<std::complex<double>> real_dft(std::span<const double> x);

Periodogram periodogram(std::span<const double> x, double sample_hz, bool hann = true);

/// Fraction of the total (DC-excluded) power in [f_lo, f_hi].
double band_power_fraction(const Periodogram& p, double f_lo, double f_hi);

/// Frequency of the largest periodogram bin in [f_lo, f_hi], refined by parabolic interpolation
/// of the log power. Throws std::invalid_argument when the band holds no bins.
double dominant_frequency(std::span<const double> x, double sample_hz, double f_lo, double f_hi);

}  // namespace tailsitter
