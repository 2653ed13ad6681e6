#pragma once

#include <cstdint>
#include <random>

#include "tailsitter/lti.hpp"

namespace tailsitter {

/// Single-axis plant driven at the controller rate: torque command in, measured rate out.
/// The measurement for a tick is available before that tick's input is chosen.
class AxisPlant {
public:
    virtual ~AxisPlant() = default;
    virtual double measured() const = 0;
    virtual void apply(double u) = 0;
    virtual double sample_hz() const = 0;
};

/// Discrete realization of a continuous plant model (torque command -> measured rate).
///
/// Resonant pairs are prewarped at their own frequency, the fractional delay is a first-order
/// allpass, and one delay sample is traded for a short equalizer, so at 250 Hz the response stays
/// within about 0.2 dB / 2 deg of the continuous model up to 50 Hz.
class LinearAxisPlant : public AxisPlant {
public:
    /// Throws std::invalid_argument for an improper tf.
    LinearAxisPlant(const ContinuousTF& tf, double sample_hz = 250.0, double noise_std = 0.0,
                    std::uint64_t seed = 1);

    double measured() const override { return output_ + noise_; }
    double true_output() const { return output_; }
    void apply(double u) override;
    double sample_hz() const override { return filter_.sample_hz(); }

    /// Response of the realized plant (delay included) at freq_hz.
    Complex response(double freq_hz) const;
    /// Input -> measured() transfer function, ascending in z^-1 (the one-tick output shift included).
    std::pair<poly::Coeffs, poly::Coeffs> polynomials() const;
    const BiquadCascade& realization() const { return filter_; }

private:
    BiquadCascade filter_;
    bool extra_sample_ = false;  // model has under one sample of delay: output lags one tick
    double output_ = 0.0;
    double noise_ = 0.0;
    double noise_std_ = 0.0;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tailsitter
