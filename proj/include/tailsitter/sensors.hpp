#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tailsitter/attitude.hpp"
#include "tailsitter/lti.hpp"

namespace tailsitter {

struct SensorConfig {
    double gyro_noise_std = 0.005;  // rad/s, white, at the raw rate
    double raw_hz = 1000.0;
    double filter_corner_hz = 100.0;
    int decimation = 4;
    double altitude_noise_std = 0.0;  // m
    double vz_noise_std = 0.0;        // m/s
};

struct SensorSample {
    double t = 0.0;
    Vec3 omega_meas = Vec3::Zero();
    double altitude_meas = 0.0;
    double vz_meas = 0.0;
};

/// Gyro path: additive Gaussian noise, 2nd-order Butterworth anti-alias filter, decimation.
/// Deterministic for a given seed.
class GyroPipeline {
public:
    GyroPipeline(const SensorConfig& cfg, std::uint64_t seed);

    /// Feeds one raw-rate sample. Returns the filtered value on every `decimation`-th call.
    std::optional<Vec3> push(const Vec3& true_rate);
    /// Puts the filters in steady state for a constant rate (noise-free).
    void prime(const Vec3& rate);

    const SensorConfig& config() const { return cfg_; }

private:
    SensorConfig cfg_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::vector<BiquadCascade> filters_;
    int count_ = 0;
};

struct RotorVibrationConfig {
    double amplitude = 0.0;  // rad/s per tone
    double f_lo_hz = 75.0;
    double f_hi_hz = 90.0;
    int tones = 6;
};

/// Sum of equal-amplitude tones spread over [f_lo, f_hi] with seeded random phases, one phase set per axis.
class RotorVibration {
public:
    RotorVibration(const RotorVibrationConfig& cfg, std::uint64_t seed);
    Vec3 value(double t) const;
    const std::vector<double>& frequencies() const { return freqs_; }

private:
    RotorVibrationConfig cfg_;
    std::vector<double> freqs_;
    std::vector<Vec3> phases_;
};

}  // namespace tailsitter
