#include "tailsitter/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tailsitter {

namespace {

// FFTW's planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::vector<std::complex<double>> real_dft(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(n), &fftw_free);
    std::copy(x.begin(), x.end(), in.get());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        // FFTW_ESTIMATE leaves the input untouched; std::complex is layout-compatible with fftw_complex.
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

Periodogram periodogram(std::span<const double> x, double sample_hz, bool hann) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("periodogram needs at least two samples");
    if (!(sample_hz > 0.0)) throw std::invalid_argument("sample_hz must be > 0");

    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(n), &fftw_free);
    const std::size_t nout = n / 2 + 1;
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(nout), &fftw_free);
    double wsum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = hann ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)) : 1.0;
        in.get()[i] = (x[i] - mean) * w;
        wsum2 += w * w;
    }
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    Periodogram p;
    p.freqs.resize(nout);
    p.power.resize(nout);
    for (std::size_t k = 0; k < nout; ++k) {
        const double re = out.get()[k][0];
        const double im = out.get()[k][1];
        double pw = (re * re + im * im) / (wsum2 * sample_hz);
        if (k != 0 && !(n % 2 == 0 && k == nout - 1)) pw *= 2.0;
        p.freqs[k] = static_cast<double>(k) * sample_hz / static_cast<double>(n);
        p.power[k] = pw;
    }
    return p;
}

double band_power_fraction(const Periodogram& p, double f_lo, double f_hi) {
    double total = 0.0, band = 0.0;
    for (std::size_t k = 1; k < p.freqs.size(); ++k) {
        total += p.power[k];
        if (p.freqs[k] >= f_lo && p.freqs[k] <= f_hi) band += p.power[k];
    }
    return total > 0.0 ? band / total : 0.0;
}

double dominant_frequency(std::span<const double> x, double sample_hz, double f_lo, double f_hi) {
    const Periodogram p = periodogram(x, sample_hz, true);
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.freqs.size(); ++k) {
        if (p.freqs[k] < f_lo || p.freqs[k] > f_hi) continue;
        if (best == 0 || p.power[k] > p.power[best]) best = k;
    }
    if (best == 0) throw std::invalid_argument("no spectral bins inside the requested band");
    if (best + 1 >= p.power.size()) return p.freqs[best];
    const double a = std::log(std::max(p.power[best - 1], 1e-300));
    const double b = std::log(std::max(p.power[best], 1e-300));
    const double c = std::log(std::max(p.power[best + 1], 1e-300));
    const double den = a - 2.0 * b + c;
    const double shift = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
    return p.freqs[best] + std::clamp(shift, -0.5, 0.5) * (p.freqs[1] - p.freqs[0]);
}

}  // namespace tailsitter
