#include "tailsitter/sensors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tailsitter {

GyroPipeline::GyroPipeline(const SensorConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
    if (!(cfg.raw_hz > 0.0) || cfg.decimation < 1) throw std::invalid_argument("sensor rate and decimation must be positive");
    if (!(cfg.filter_corner_hz > 0.0 && cfg.filter_corner_hz < cfg.raw_hz / 2))
        throw std::invalid_argument("sensor filter corner must lie below the raw Nyquist frequency");
    if (cfg.gyro_noise_std < 0.0) throw std::invalid_argument("gyro noise must be >= 0");
    const BiquadCascade f = discretize_tustin(butterworth2(cfg.filter_corner_hz), cfg.raw_hz, cfg.filter_corner_hz);
    filters_.assign(3, f);
}

std::optional<Vec3> GyroPipeline::push(const Vec3& true_rate) {
    Vec3 y;
    for (int i = 0; i < 3; ++i) {
        // Draw even when sigma is zero so the random stream does not depend on the noise level.
        const double n = normal_(rng_);
        y[i] = filters_[static_cast<std::size_t>(i)].process(true_rate[i] + cfg_.gyro_noise_std * n);
    }
    if (++count_ >= cfg_.decimation) {
        count_ = 0;
        return y;
    }
    return std::nullopt;
}

void GyroPipeline::prime(const Vec3& rate) {
    for (int i = 0; i < 3; ++i) filters_[static_cast<std::size_t>(i)].prime(rate[i]);
    count_ = 0;
}

RotorVibration::RotorVibration(const RotorVibrationConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg.tones < 1) throw std::invalid_argument("rotor vibration needs at least one tone");
    if (!(cfg.f_lo_hz > 0.0 && cfg.f_hi_hz >= cfg.f_lo_hz)) throw std::invalid_argument("rotor vibration band is invalid");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < cfg.tones; ++k) {
        const double frac = cfg.tones == 1 ? 0.5 : static_cast<double>(k) / (cfg.tones - 1);
        freqs_.push_back(cfg.f_lo_hz + frac * (cfg.f_hi_hz - cfg.f_lo_hz));
        Vec3 ph;
        for (int a = 0; a < 3; ++a) ph[a] = phase(rng);
        phases_.push_back(ph);
    }
}

Vec3 RotorVibration::value(double t) const {
    Vec3 out = Vec3::Zero();
    if (cfg_.amplitude == 0.0) return out;
    for (std::size_t k = 0; k < freqs_.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * freqs_[k] * t;
        for (int a = 0; a < 3; ++a) out[a] += cfg_.amplitude * std::sin(w + phases_[k][a]);
    }
    return out;
}

}  // namespace tailsitter
