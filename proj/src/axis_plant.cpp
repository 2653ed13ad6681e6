#include "tailsitter/axis_plant.hpp"

#include <cmath>
#include <numbers>

namespace tailsitter {

namespace {

BiquadCascade realize(const ContinuousTF& tf, double sample_hz, bool& extra_sample) {
    TustinOptions opt;
    opt.prewarp_resonances = true;
    opt.fractional_delay_allpass = true;
    opt.equalize_hz = 50.0;
    BiquadCascade c = discretize_tustin(tf, sample_hz, opt);
    // measured() at tick n must not depend on u[n]: realize one sample less of delay and
    // shift the output by one tick. Without a whole sample of delay the loop gains one.
    extra_sample = c.delay_samples() == 0;
    const int delay = extra_sample ? 0 : c.delay_samples() - 1;
    return {c.sections(), sample_hz, delay, c.discarded_delay_s()};
}

}  // namespace

LinearAxisPlant::LinearAxisPlant(const ContinuousTF& tf, double sample_hz, double noise_std, std::uint64_t seed)
    : noise_std_(noise_std), rng_(seed) {
    if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
    filter_ = realize(tf, sample_hz, extra_sample_);
    noise_ = noise_std_ * normal_(rng_);
}

void LinearAxisPlant::apply(double u) {
    output_ = filter_.process(u);
    noise_ = noise_std_ * normal_(rng_);
}

Complex LinearAxisPlant::response(double freq_hz) const {
    const Complex z_inv = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / filter_.sample_hz());
    return filter_.response(freq_hz) * z_inv;
}

std::pair<poly::Coeffs, poly::Coeffs> LinearAxisPlant::polynomials() const {
    auto [b, a] = filter_.polynomials();
    b.insert(b.begin(), 0.0);
    return {b, a};
}

}  // namespace tailsitter
