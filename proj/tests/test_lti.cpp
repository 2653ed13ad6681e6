#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tailsitter/axis_plant.hpp"
#include "tailsitter/lti.hpp"
#include "tailsitter/spectrum.hpp"

using namespace tailsitter;
using oracle::kPi;

namespace {

double phase_deg(Complex c) { return std::arg(c) / oracle::kDeg; }

ContinuousTF reference_plant() { return fitted_plant(PlantFitParams::reference_defaults()); }

}  // namespace

TEST_CASE("polynomial roots round trip") {
    const std::vector<Complex> r{{-1.0, 0.0}, {-2.0, 3.0}, {-2.0, -3.0}, {0.5, 0.0}, {0.0, 0.0}};
    const poly::Coeffs c = poly::from_roots(r);
    const auto back = poly::roots(c);
    REQUIRE(back.size() == r.size());
    for (const Complex& x : r) {
        double best = 1e9;
        for (const Complex& y : back) best = std::min(best, std::abs(x - y));
        CHECK(best < 1e-10);
    }
    CHECK(poly::degree(poly::Coeffs{1.0, 2.0, 0.0}) == 1);
    CHECK(poly::degree(poly::Coeffs{0.0}) == -1);
}

TEST_CASE("tf_eval") {
    const Complex i = tf_eval(ContinuousTF::integrator(), 1.0 / (2.0 * kPi));
    CHECK(std::abs(i) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(phase_deg(i) == doctest::Approx(-90.0));

    const Complex d = tf_eval(ContinuousTF::pure_delay(0.021), 10.0);
    CHECK(std::abs(d) == doctest::Approx(1.0));
    CHECK(phase_deg(d) == doctest::Approx(-75.6).epsilon(1e-12));

    const ContinuousTF lf = lowpass_component(PlantFitParams::reference_defaults());
    CHECK(std::abs(oracle::db(tf_eval(lf, 69.0)) + 3.0) < 0.2);

    CHECK(is_unbounded(tf_eval(ContinuousTF({1.0}, {1.0, 0.0, 1.0 / std::pow(2.0 * kPi, 2)}), 1.0)));
    CHECK_THROWS_AS(tf_eval(lf, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ContinuousTF({1.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ContinuousTF({1.0}, {1.0}, -0.1), std::invalid_argument);
}

TEST_CASE("series and parallel") {
    const ContinuousTF a = reference_plant();
    const ContinuousTF unit;
    for (double f : {0.3, 3.0, 30.0}) CHECK(std::abs(tf_eval(tf_series(a, unit), f) - tf_eval(a, f)) < 1e-12 * std::abs(tf_eval(a, f)));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto random_tf = [&] {
        poly::Coeffs num(3), den(3);
        for (auto& c : num) c = u(rng);
        for (auto& c : den) c = u(rng);
        den[0] += 2.0;
        return ContinuousTF(num, den, 0.01 * (u(rng) + 1.0));
    };
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const ContinuousTF x = random_tf(), y = random_tf();
        const double f = std::pow(10.0, 2.0 * u(rng));
        const Complex expected = tf_eval(x, f) * tf_eval(y, f);
        if (is_unbounded(expected) || std::abs(expected) == 0.0) continue;
        worst = std::max(worst, std::abs(tf_eval(tf_series(x, y), f) - expected) / std::abs(expected));
    }
    CHECK(worst < 1e-9);

    const ContinuousTF p = tf_parallel(ContinuousTF::gain(2.0), ContinuousTF::integrator());
    CHECK(std::abs(tf_eval(p, 1.0) - (2.0 + 1.0 / Complex(0, 2 * kPi))) < 1e-14);
    CHECK_THROWS_AS(tf_parallel(ContinuousTF::pure_delay(0.1), ContinuousTF::gain(1.0)), std::invalid_argument);
}

TEST_CASE("butterworth2") {
    const ContinuousTF b = butterworth2(69.0);
    CHECK(b.den[1] == doctest::Approx(0.00321).epsilon(0.02));
    CHECK(b.den[2] == doctest::Approx(0.00000531).epsilon(0.02));
    CHECK(std::abs(tf_eval(b, 1e-9) - 1.0) < 1e-10);
    CHECK(oracle::db(tf_eval(b, 69.0)) == doctest::Approx(-3.0103).epsilon(1e-4));
    for (double f : log_space(0.1, 1000.0, 100)) {
        const double m2 = std::norm(tf_eval(b, f));
        CHECK(std::abs(m2 - 1.0 / (1.0 + std::pow(f / 69.0, 4))) < 1e-9);
    }
}

TEST_CASE("notch") {
    const ContinuousTF n = notch(14.0, 0.2, 0.05);
    CHECK(oracle::db(tf_eval(n, 14.0)) == doctest::Approx(-12.0412).epsilon(1e-5));
    CHECK(std::abs(tf_eval(n, 1e-8) - 1.0) < 1e-9);
    CHECK(std::abs(tf_eval(n, 1e8) - 1.0) < 1e-6);
    const double lag = phase_deg(tf_eval(n, 7.0));
    CHECK(lag <= -3.8);
    CHECK(lag >= -5.7);

    // Defaults: about 5 deg lag at 7 Hz.
    CHECK(phase_deg(tf_eval(notch(NotchParams{}), 7.0)) == doctest::Approx(-5.0).epsilon(0.02));

    // Symmetric in log frequency about the center.
    for (double r : log_space(1.0, 4.0, 50))
        CHECK(std::abs(oracle::db(tf_eval(n, 14.0 * r)) - oracle::db(tf_eval(n, 14.0 / r))) < 1e-6);

    CHECK_THROWS_AS(notch(14.0, 0.05, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(notch(14.0, 0.05, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(notch(0.0, 0.2, 0.05), std::invalid_argument);
}

TEST_CASE("pid") {
    const ContinuousTF p = pid_tf(0.5, 0.0, 0.0, 18.0);
    for (double f : {0.01, 1.0, 100.0}) CHECK(std::abs(tf_eval(p, f) - 0.5) < 1e-12);

    const ContinuousTF c = pid_tf(0.09, 0.1, 0.01, 18.0);
    const double f = 1e-3;
    CHECK(std::abs(tf_eval(c, f)) == doctest::Approx(0.1 / (2 * kPi * f)).epsilon(1e-3));
    // Derivative branch filtered: gain falls back toward kp well above the corner.
    CHECK(std::abs(tf_eval(c, 100.0)) < std::abs(tf_eval(c, 30.0)));
    CHECK(std::abs(tf_eval(c, 2000.0)) == doctest::Approx(0.09).epsilon(0.01));
    CHECK(c.proper());
    CHECK_THROWS_AS(pid_tf(0.0, 0.0, 0.0, 18.0), std::invalid_argument);
}

TEST_CASE("fitted plant") {
    const PlantFitParams d = PlantFitParams::reference_defaults();
    CHECK(d.peak.freq_hz == doctest::Approx(1.0 / std::sqrt(0.000129) / (2 * kPi)));
    CHECK(d.offpeak.freq_hz == doctest::Approx(1.0 / std::sqrt(0.0000348) / (2 * kPi)));
    CHECK(d.peak.freq_hz == doctest::Approx(14.01).epsilon(1e-3));
    CHECK(d.offpeak.freq_hz == doctest::Approx(26.98).epsilon(1e-3));

    const ContinuousTF p = reference_plant();
    CHECK(p.delay == 0.021);
    for (double f : log_space(0.5, 100.0, 300)) {
        const Complex ref = oracle::reference_plant(f);
        CHECK(std::abs(tf_eval(p, f) - ref) < 1e-9 * std::abs(ref));
    }
    CHECK(oracle::db(tf_eval(p, 14.0)) - oracle::db(tf_eval(p, 27.0)) > 15.0);

    PlantFitParams bad = d;
    bad.delay = 0.2;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("margins") {
    const ContinuousTF l{{10.0}, {0.0, 1.0}};
    const StabilityMargins m = margins(l, 0.1, 100.0);
    REQUIRE(m.has_crossover());
    CHECK(*m.gain_crossover_hz == doctest::Approx(10.0 / (2 * kPi)).epsilon(1e-5));
    CHECK(*m.phase_margin_deg == doctest::Approx(90.0).epsilon(1e-6));
    CHECK_FALSE(m.phase_crossover_hz.has_value());

    const StabilityMargins md = margins(ContinuousTF({10.0}, {0.0, 1.0}, 0.021), 0.1, 100.0);
    CHECK(*md.phase_margin_deg == doctest::Approx(90.0 - 360.0 * (10.0 / (2 * kPi)) * 0.021).epsilon(1e-5));
    REQUIRE(md.phase_crossover_hz.has_value());
    CHECK(oracle::db(tf_eval(ContinuousTF({10.0}, {0.0, 1.0}, 0.021), *md.phase_crossover_hz)) ==
          doctest::Approx(-*md.gain_margin_db).epsilon(1e-6));

    CHECK_FALSE(margins(ContinuousTF::gain(0.5), 0.1, 100.0).has_crossover());

    // Recomputing at the reported crossover reproduces 0 dB and the margin.
    const ContinuousTF loop = tf_series(reference_plant(), tf_series(pid_tf(0.09, 0.1, 0.01, 18.0), notch(NotchParams{})));
    const StabilityMargins ml = margins(loop, 0.1, 100.0);
    REQUIRE(ml.has_crossover());
    CHECK(std::abs(oracle::db(tf_eval(loop, *ml.gain_crossover_hz))) < 1e-3);
    CHECK(std::abs(180.0 + unwrapped_phase_deg(loop, *ml.gain_crossover_hz) - *ml.phase_margin_deg) < 1e-3);
    CHECK(*ml.gain_crossover_hz == doctest::Approx(6.8).epsilon(0.15));
    CHECK(ml.closed_loop_bandwidth_hz.has_value());

    // Without the notch the 14 Hz resonance pokes through 0 dB.
    const StabilityMargins bare = margins(tf_series(reference_plant(), pid_tf(0.09, 0.1, 0.01, 18.0)), 0.1, 100.0);
    CHECK(bare.crossings.size() >= 3);
    CHECK(bare.conditionally_unstable());
}

TEST_CASE("unwrapped phase continues past -180") {
    const ContinuousTF d = ContinuousTF::pure_delay(0.021);
    CHECK(unwrapped_phase_deg(d, 50.0) == doctest::Approx(-378.0));
    const ContinuousTF i3 = tf_series(ContinuousTF::integrator(), tf_series(ContinuousTF::integrator(), ContinuousTF::integrator()));
    CHECK(unwrapped_phase_deg(i3, 1.0) == doctest::Approx(-270.0));
}

TEST_CASE("magnitude slope and extrema") {
    CHECK(magnitude_slope(ContinuousTF::integrator(), 0.1, 10.0) == doctest::Approx(-20.0).epsilon(5e-4));
    CHECK(std::abs(magnitude_slope(ContinuousTF::gain(3.0), 0.1, 10.0)) < 1e-12);
    const ContinuousTF p = reference_plant();
    CHECK(magnitude_extremum_hz(p, 5.0, 20.0, true) == doctest::Approx(14.01).epsilon(0.01));
    CHECK(magnitude_extremum_hz(p, 20.0, 40.0, false) == doctest::Approx(26.98).epsilon(0.01));
}

TEST_CASE("bode csv") {
    const std::string csv = bode_csv(ContinuousTF::integrator(), 0.1, 100.0, 100);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "freq_hz,mag_db,phase_deg");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows >= 300);
}

TEST_CASE("tustin discretization") {
    const double fs = 250.0;
    // Prewarped notch: exact depth at the center.
    const BiquadCascade n = discretize_tustin(notch(14.0, 0.2, 0.05), fs, 14.0);
    CHECK(std::abs(oracle::db(n.response(14.0)) - oracle::db(0.25)) < 0.05);

    // DC gain preserved for stable low-passes.
    for (double corner : {5.0, 30.0, 100.0}) {
        const BiquadCascade b = discretize_tustin(butterworth2(corner), fs, TustinOptions{});
        CHECK(b.dc_gain() == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Delay rounding with the remainder reported.
    const BiquadCascade d = discretize_tustin(reference_plant(), fs, TustinOptions{});
    CHECK(d.delay_samples() == 5);
    CHECK(d.discarded_delay_s() == doctest::Approx(0.001));

    // Fractional remainder realized as an allpass.
    TustinOptions thiran;
    thiran.fractional_delay_allpass = true;
    const BiquadCascade t = discretize_tustin(ContinuousTF::pure_delay(0.0212), fs, thiran);
    // The first-order allpass carries between half and one and a half samples.
    CHECK(t.delay_samples() == 4);
    for (double f : {1.0, 10.0, 25.0})
        CHECK(std::abs(std::arg(t.response(f) / tf_eval(ContinuousTF::pure_delay(0.0212), f))) < 0.02);

    // Every pole of a stable source lies inside the unit circle.
    const BiquadCascade lp = discretize_tustin(tf_series(butterworth2(69.0), notch(NotchParams{})), fs, TustinOptions{});
    for (const auto& s : lp.sections()) {
        for (const Complex& z : poly::roots(poly::Coeffs{s.a2, s.a1, 1.0})) CHECK(std::abs(z) < 1.0);
    }

    CHECK_THROWS_AS(discretize_tustin(ContinuousTF({0.0, 0.0, 1.0}, {1.0, 1.0}), fs, TustinOptions{}), std::invalid_argument);
    CHECK_THROWS_AS(discretize_tustin(butterworth2(10.0), 0.0, TustinOptions{}), std::invalid_argument);
}

TEST_CASE("biquad filtering matches the response") {
    const double fs = 250.0;
    BiquadCascade b = discretize_tustin(tf_series(butterworth2(20.0), notch(NotchParams{})), fs, 14.0);
    const BiquadCascade ref = b;
    for (double f : {3.0, 14.0, 40.0}) {
        b.reset();
        std::vector<double> y;
        for (int k = 0; k < 2500; ++k) y.push_back(b.process(std::cos(2 * kPi * f * k / fs)));
        const Complex measured = oracle::sine_phasor(y, fs, f, 1000);
        CHECK(std::abs(measured - ref.response(f)) < 1e-6);
    }

    // Primed state gives a constant output for a constant input.
    b.prime(0.7);
    CHECK(b.process(0.7) == doctest::Approx(0.7 * b.dc_gain()));
    CHECK(b.process(0.7) == doctest::Approx(0.7 * b.dc_gain()));

    const std::string csv = b.to_csv();
    CHECK(csv.rfind("section,b0,b1,b2,a1,a2\n", 0) == 0);
}

TEST_CASE("white noise through the digital filter") {
    const double fs = 250.0;
    const ContinuousTF tf = tf_series(butterworth2(20.0), notch(NotchParams{}));
    BiquadCascade b = discretize_tustin(tf, fs, 14.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t len = 1 << 18;
    std::vector<double> x(len), y(len);
    for (std::size_t i = 0; i < len; ++i) {
        x[i] = n(rng);
        y[i] = b.process(x[i]);
    }
    const Periodogram px = periodogram(x, fs), py = periodogram(y, fs);
    // Band-averaged power ratio against |TF|^2.
    for (double f : {2.0, 5.0, 10.0, 14.0, 20.0, 24.0}) {
        double sx = 0.0, sy = 0.0, st = 0.0;
        int k = 0;
        for (std::size_t i = 1; i < px.freqs.size(); ++i) {
            if (std::abs(px.freqs[i] - f) > 0.25) continue;
            sx += px.power[i];
            sy += py.power[i];
            st += std::norm(tf_eval(tf, px.freqs[i]));
            ++k;
        }
        CHECK(std::abs(10.0 * std::log10(sy / sx) - 10.0 * std::log10(st / k)) < 0.5);
    }
}

TEST_CASE("closed-loop spectral radius") {
    // Unity feedback around a pure gain k z^-1: pole at -k.
    CHECK(closed_loop_spectral_radius({0.0, 0.5}, {1.0}) == doctest::Approx(0.5));
    CHECK(closed_loop_spectral_radius({0.0, 1.5}, {1.0}) == doctest::Approx(1.5));
}
