#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "tailsitter/polynomial.hpp"

namespace tailsitter {

using Complex = std::complex<double>;

/// Rational transfer function with a pure input delay:
/// num(s) / den(s) * exp(-s * delay). Coefficients ascend in s.
struct ContinuousTF {
    poly::Coeffs num{1.0};
    poly::Coeffs den{1.0};
    double delay = 0.0;

    ContinuousTF() = default;
    /// Throws std::invalid_argument for an all-zero denominator, empty numerator or negative delay.
    ContinuousTF(poly::Coeffs num, poly::Coeffs den, double delay = 0.0);

    static ContinuousTF gain(double k) { return {{k}, {1.0}}; }
    static ContinuousTF pure_delay(double seconds) { return {{1.0}, {1.0}, seconds}; }
    static ContinuousTF integrator() { return {{1.0}, {0.0, 1.0}}; }

    /// Relative degree check: deg(num) <= deg(den).
    bool proper() const;
};

/// num(jw)/den(jw) * exp(-jw delay) at w = 2 pi freq_hz.
/// A pole on the jw axis (|den| < 1e-12 relative) returns a non-finite value; test with is_unbounded.
/// Throws std::invalid_argument for freq_hz <= 0.
Complex tf_eval(const ContinuousTF& tf, double freq_hz);
inline bool is_unbounded(Complex c) { return !std::isfinite(c.real()) || !std::isfinite(c.imag()); }

/// Series connection: polynomial products, delays add.
ContinuousTF tf_series(const ContinuousTF& a, const ContinuousTF& b);
/// Parallel sum; both delays must match.
ContinuousTF tf_parallel(const ContinuousTF& a, const ContinuousTF& b);

/// 1 / (1 + (sqrt2/wn) s + s^2/wn^2).
ContinuousTF butterworth2(double corner_hz);

struct NotchParams {
    double center_hz = 14.0;
    double k1 = 0.15;  // width: denominator damping term
    double k2 = 0.02;  // depth: numerator damping term, |N(j w0)| = k2/k1
};

/// (a s^2 + c s + 1)/(a s^2 + b s + 1), a = 1/w0^2, b = k1/w0, c = k2/w0.
/// Requires center_hz > 0 and k1 > k2 > 0 (an attenuating notch).
ContinuousTF notch(double center_hz, double k1, double k2);
inline ContinuousTF notch(const NotchParams& p) { return notch(p.center_hz, p.k1, p.k2); }

/// kp + ki/s + kd s B(s) with B = butterworth2(deriv_corner_hz), as one rational function.
ContinuousTF pid_tf(double kp, double ki, double kd, double deriv_corner_hz);

/// Lightly damped second-order ratio
/// (1 + 2 z_num s/w + s^2/w^2) / (1 + 2 z_den s/w + s^2/w^2).
struct ModeParams {
    double freq_hz = 0.0;
    double num_damping = 0.0;
    double den_damping = 0.0;
};

/// Parameters of the identified pitch-rate plant
/// P = P_lf * P_dy * P_peak * P_offpeak * exp(-delay s).
struct PlantFitParams {
    double lf_corner_hz = 0.0;
    double lf_damping = 0.0;
    std::array<double, 3> dy_num{};  // ascending: c0 + c1 s + c2 s^2
    double dy_pole = 0.0;            // time constant of (1 + dy_pole s), s
    ModeParams peak;
    ModeParams offpeak;
    double delay = 0.0;

    /// The reference pitch-axis fit: 1/(1+0.00321s+0.00000531s^2), (260+3.764s+0.01362s^2)/((1+0.0637s)s),
    /// the 14 Hz peak and 27 Hz off-peak pairs, and a 0.021 s delay.
    static PlantFitParams reference_defaults();
    /// Throws std::invalid_argument when a frequency is non-positive or the delay is outside [0, 0.1].
    void validate() const;
};

ContinuousTF lowpass_component(const PlantFitParams& p);
ContinuousTF dynamics_component(const PlantFitParams& p);
ContinuousTF mode_component(const ModeParams& m);
ContinuousTF fitted_plant(const PlantFitParams& p);

// ---------------------------------------------------------------------------
// Frequency-domain analysis

std::vector<double> log_space(double f_lo, double f_hi, std::size_t n);

struct FrequencyResponse {
    std::vector<double> freqs;  // Hz, strictly increasing
    std::vector<Complex> values;

    std::vector<double> magnitude_db() const;
};

FrequencyResponse frequency_response(const ContinuousTF& tf, const std::vector<double>& freqs);

/// Continuous (unwrapped) phase in degrees, delay included. The rational part is
/// summed factor by factor from its roots, so no grid-based unwrapping is involved.
double unwrapped_phase_deg(const ContinuousTF& tf, double freq_hz);

struct GainCrossing {
    double freq_hz = 0.0;
    double phase_margin_deg = 0.0;
    bool downward = true;
};

struct StabilityMargins {
    std::optional<double> gain_crossover_hz;
    std::optional<double> phase_margin_deg;
    std::optional<double> phase_crossover_hz;
    std::optional<double> gain_margin_db;
    std::optional<double> closed_loop_bandwidth_hz;  // |L/(1+L)| first below -3 dB
    std::vector<GainCrossing> crossings;             // every 0 dB crossing in band

    bool has_crossover() const { return gain_crossover_hz.has_value(); }
    /// Several 0 dB crossings with a non-positive margin at one of them
    /// (a resonance poking through 0 dB).
    bool conditionally_unstable() const;
};

/// Margins searched over [f_lo_hz, f_hi_hz] on a 1000 points/decade grid, crossings refined by
/// bisection. Without a downward crossing the result has no gain_crossover_hz rather than a default.
StabilityMargins margins(const ContinuousTF& loop, double f_lo_hz, double f_hi_hz);

/// Least-squares slope of 20 log10 |L| against log10 f over 50 log-spaced points, dB/decade.
double magnitude_slope(const ContinuousTF& loop, double f_lo_hz, double f_hi_hz);

/// Frequency of the largest (or smallest) |tf| in [f_lo, f_hi]; grid search then golden-section refine.
double magnitude_extremum_hz(const ContinuousTF& tf, double f_lo_hz, double f_hi_hz, bool maximum);

/// CSV `freq_hz,mag_db,phase_deg` on a log grid with at least `points_per_decade` points.
std::string bode_csv(const ContinuousTF& tf, double f_lo_hz, double f_hi_hz, int points_per_decade = 100);

// ---------------------------------------------------------------------------
// Digital filters

struct BiquadSection {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;  // a0 normalized to 1
};

/// Cascade of direct-form-II-transposed sections preceded by an integer delay line.
/// Carries mutable state: one owner at a time.
class BiquadCascade {
public:
    BiquadCascade() = default;
    BiquadCascade(std::vector<BiquadSection> sections, double sample_hz, int delay_samples = 0,
                  double discarded_delay_s = 0.0);

    double process(double x);
    void reset();
    /// Sets every internal state to the steady state for a constant input x.
    /// Requires finite DC gain in each section.
    void prime(double x);

    Complex response(double freq_hz) const;
    double dc_gain() const;

    const std::vector<BiquadSection>& sections() const { return sections_; }
    double sample_hz() const { return sample_hz_; }
    int delay_samples() const { return delay_samples_; }
    /// Part of the continuous delay not realized by the delay line (or the allpass).
    double discarded_delay_s() const { return discarded_delay_s_; }

    /// Overall numerator/denominator ascending in z^-1, delay included.
    std::pair<poly::Coeffs, poly::Coeffs> polynomials() const;
    /// CSV `section,b0,b1,b2,a1,a2`.
    std::string to_csv() const;

private:
    std::vector<BiquadSection> sections_;
    std::vector<std::array<double, 2>> state_;
    double sample_hz_ = 1.0;
    int delay_samples_ = 0;
    double discarded_delay_s_ = 0.0;
    std::vector<double> delay_line_;
    std::size_t delay_pos_ = 0;
};

struct TustinOptions {
    /// Pins the whole cascade's response exactly at this frequency.
    std::optional<double> prewarp_hz;
    /// Prewarps each lightly damped pole or zero pair (damping below resonance_damping, below 0.45 fs)
    /// at its own natural frequency, widening its damping so the resonance keeps its width, and keeps
    /// roots at the origin at 2 fs; every other factor uses prewarp_hz.
    bool prewarp_resonances = false;
    double resonance_damping = 0.3;
    /// Realizes the fractional delay remainder with a first-order Thiran allpass
    /// instead of discarding it.
    bool fractional_delay_allpass = false;
    /// Borrows one sample of the pure delay for a three-tap FIR that flattens the remaining
    /// warping error up to this frequency. Needs at least one whole sample of delay.
    std::optional<double> equalize_hz;
};

/// Bilinear transform after factoring into first/second-order sections sorted by pole
/// natural frequency. The delay becomes round(delay * fs) samples; the remainder is reported
/// by discarded_delay_s(). Throws std::invalid_argument for an improper tf or sample_hz <= 0.
BiquadCascade discretize_tustin(const ContinuousTF& tf, double sample_hz, const TustinOptions& options = {});
BiquadCascade discretize_tustin(const ContinuousTF& tf, double sample_hz, std::optional<double> prewarp_hz);

/// Largest |z| among the closed-loop poles of unity negative feedback around the
/// series connection of `path` (each cascade is one block of the loop).
double closed_loop_spectral_radius(const std::vector<const BiquadCascade*>& path);
/// Same for an open loop given as numerator/denominator ascending in z^-1.
double closed_loop_spectral_radius(const poly::Coeffs& b, const poly::Coeffs& a);

}  // namespace tailsitter
