#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "tailsitter/axis_plant.hpp"
#include "tailsitter/control.hpp"
#include "tailsitter/rigid_body.hpp"

namespace tailsitter {

struct ChirpConfig {
    double f0 = 1.0;   // Hz
    double f1 = 60.0;  // Hz
    double duration = 60.0;
    double amplitude = 0.05;  // normalized torque
    double sample_hz = 250.0;

    /// Throws std::invalid_argument unless 0 < f0 <= f1 < fs/2, duration > 0, amplitude >= 0.
    void validate() const;
};

struct TimeSeries {
    double sample_hz = 250.0;
    double t0 = 0.0;
    std::vector<double> values;

    double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_hz; }
};

/// u(t) = A sin(phi(t)), phi = 2 pi f0 (k^t - 1) / ln k, k = (f1/f0)^(1/T).
/// With f1 == f0 this is a plain sinusoid at f0.
TimeSeries chirp(const ChirpConfig& cfg);
/// Instantaneous frequency f0 k^t.
double chirp_frequency(const ChirpConfig& cfg, double t);

enum class FrfMethod {
    smoothed,  // whole-record spectra smoothed with a frequency-dependent Hann kernel
    welch,     // averaged Hann-windowed segments of frequency-dependent length
};

struct FrfConfig {
    double f_lo = 1.0;
    double f_hi = 60.0;
    std::size_t n_freqs = 120;
    /// Resolution: the kernel (or segment) spans f / cycles_per_window Hz (or cycles_per_window periods).
    double cycles_per_window = 20.0;
    double overlap = 0.5;      // welch only
    int min_kernel_bins = 5;   // smoothed only; floor on the kernel width in DFT bins
    double coherence_threshold = 0.6;
    FrfMethod method = FrfMethod::smoothed;
};

/// Nonparametric frequency response on a log grid, with coherence and a trust flag per bin.
struct FRFEstimate {
    std::vector<double> freqs;
    std::vector<std::complex<double>> h;
    std::vector<double> coherence;
    std::vector<bool> trusted;

    double trusted_fraction() const;
    /// CSV `freq_hz,re,im,coherence`.
    std::string to_csv() const;
    static FRFEstimate from_csv(const std::string& text, double coherence_threshold = 0.6);
};

/// H1 estimate S_uy / S_uu with frequency-dependent resolution f / cycles_per_window.
/// smoothed: spectra of the whole record averaged over a Hann kernel of that width around each
/// output frequency. welch: Hann segments cycles_per_window periods long (capped at the record
/// length), overlapping segments averaged.
/// Coherence |S_uy|^2 / (S_uu S_yy); bins below the threshold stay in the result, marked untrusted.
/// Throws std::invalid_argument for mismatched series.
FRFEstimate estimate_frf(const TimeSeries& u, const TimeSeries& y, const FrfConfig& cfg = {});

/// A simulation leaving its envelope; carries the time of departure.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double t) : NumericalError(what), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

struct SweepRecord {
    TimeSeries u_injected;
    TimeSeries u_total;
    TimeSeries omega_meas;

    /// CSV `t,u_injected,u_total,omega_meas`.
    std::string to_csv() const;
};

/// Injects the chirp at the plant input. With a controller, its output (rate command 0 on
/// `axis`) is added to the chirp, as in flight; without one the chirp drives the plant alone.
/// Throws DivergenceError when |omega| exceeds divergence_limit.
SweepRecord sweep_experiment(AxisPlant& plant, const ChirpConfig& cfg, RateController* controller, int axis = 1,
                             double divergence_limit = 50.0);

}  // namespace tailsitter
