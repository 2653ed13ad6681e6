#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tailsitter/axis_plant.hpp"
#include "tailsitter/rigid_body.hpp"
#include "tailsitter/sensors.hpp"
#include "tailsitter/spectrum.hpp"
#include "tailsitter/vehicle.hpp"

using namespace tailsitter;
using oracle::kPi;

TEST_CASE("aerodynamic forces") {
    const AeroTable t = AeroTable::blended_default();
    for (double a : {-3.0, -0.5, 0.0, 0.2, 1.5, 3.0}) {
        const AeroForces f = aero_forces(a, 0.0, t, 1.225, 0.1332);
        CHECK(f.lift == 0.0);
        CHECK(f.drag == 0.0);
    }
    const AeroForces f1 = aero_forces(0.1, 5.0, t, 1.225, 0.1332), f2 = aero_forces(0.1, 10.0, t, 1.225, 0.1332);
    CHECK(f2.lift == doctest::Approx(4.0 * f1.lift));
    CHECK_THROWS_AS(aero_forces(0.1, -1.0, t, 1.225, 0.1332), std::invalid_argument);

    const AeroTable node({0.0, 0.1}, {0.0, 10.0, 20.0}, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0},
                         {0.1, 0.1, 0.1, 0.1, 0.1, 0.1});
    CHECK(aero_forces(0.0, 10.0, node, 1.225, 0.12).lift == doctest::Approx(7.35));
}

TEST_CASE("aero table") {
    const AeroTable t = AeroTable::blended_default();
    CHECK(t.alphas().front() == doctest::Approx(-kPi));
    CHECK(t.alphas().back() == doctest::Approx(kPi));
    for (double a : t.alphas()) {
        for (double v : t.speeds()) CHECK(t.lookup(a, v).cd >= 0.0);
    }
    // Post-stall flat plate.
    const AeroCoefficients c = t.lookup(kPi / 4, 10.0);
    CHECK(c.cl == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(c.cd == doctest::Approx(1.03).epsilon(1e-3));
    // Linear pre-stall lift, monotonic.
    double prev = -1e9;
    for (double a = -0.15; a <= 0.15; a += 0.01) {
        const double cl = t.lookup(a, 10.0).cl;
        CHECK(cl > prev);
        prev = cl;
    }
    CHECK(t.lookup(0.0, 45.0).clamped);
    CHECK_FALSE(t.lookup(0.0, 15.0).clamped);

    const AeroTable back = AeroTable::from_csv(t.to_csv());
    for (double a : {-2.0, 0.05, 1.0}) CHECK(back.lookup(a, 7.0).cl == doctest::Approx(t.lookup(a, 7.0).cl));
    CHECK_THROWS_AS(AeroTable({0.0, 0.0}, {0.0, 1.0}, {0, 0, 0, 0}, {0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(AeroTable({0.0, 1.0}, {0.0, 1.0}, {0, 0, 0, 0}, {0, -0.1, 0, 0}), std::invalid_argument);
}

TEST_CASE("mixer") {
    const AircraftParams p;
    const MotorCommand hover = mixer(Vec3::Zero(), p.hover_command, p);
    for (double u : hover.u) CHECK(u == doctest::Approx(p.hover_command).epsilon(1e-12));
    CHECK_FALSE(hover.saturated);

    const MotorCommand pitch = mixer(Vec3(0.0, 0.05, 0.0), p.hover_command, p);
    CHECK(pitch.u[0] < hover.u[0]);
    CHECK(pitch.u[1] < hover.u[1]);
    CHECK(pitch.u[2] > hover.u[2]);
    CHECK(pitch.u[3] > hover.u[3]);
    double sum = 0.0;
    for (double u : pitch.u) sum += u;
    CHECK(sum == doctest::Approx(4.0 * p.hover_command));

    const Vec3 tau(0.01, -0.03, 0.005);
    const MotorCommand m = mixer(tau, 0.45, p);
    Eigen::Vector4d thrusts;
    for (int i = 0; i < 4; ++i) thrusts(i) = p.thrust_coeff() * m.u[static_cast<std::size_t>(i)];
    const Eigen::Vector4d w = allocation_matrix(p) * thrusts;
    CHECK((w.head<3>() - tau).norm() < 1e-9);
    CHECK(w(3) == doctest::Approx(4.0 * 0.45 * p.thrust_coeff()));

    // Saturation keeps the collective and drops yaw first.
    const MotorCommand sat = mixer(Vec3(0.0, 0.0, 5.0), 0.5, p);
    CHECK(sat.saturated);
    double total = 0.0;
    for (double u : sat.u) {
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
        total += u;
    }
    CHECK(total == doctest::Approx(2.0));

    AircraftParams bad = p;
    bad.rotor_pos = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rigid body dynamics") {
    const AircraftParams p;
    const AeroTable t = AeroTable::blended_default();
    RigidBodyState s;
    s.q = euler_zxy_to_quat({0.0, kPi / 2, 0.0});
    const double dt = 0.001;

    const MotorCommand off;
    const RigidBodyState fall = step_dynamics(s, off, dt, p, t).state;
    CHECK(fall.v.z() / dt == doctest::Approx(p.g).epsilon(1e-6));
    CHECK(std::abs(fall.v.x()) + std::abs(fall.v.y()) < 1e-12);

    RigidBodyState spin = s;
    spin.omega = Vec3(1.0, -2.0, 0.5);
    for (int i = 0; i < 1000; ++i) {
        spin = step_dynamics(spin, mixer(Vec3(0.01, 0.0, 0.0), 0.5, p), dt, p, t).state;
        CHECK(std::abs(spin.q.norm() - 1.0) < 1e-9);
    }

    CHECK_THROWS_AS(step_dynamics(s, off, 0.003, p, t), std::invalid_argument);
    RigidBodyState bad = s;
    bad.omega.x() = std::nan("");
    CHECK_THROWS(step_dynamics(bad, off, dt, p, t));
}

TEST_CASE("aerodynamic force has no side component in the velocity frame") {
    const AircraftParams p;
    const AeroTable t = AeroTable::blended_default();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        RigidBodyState s;
        s.q = UnitQuaternion(n(rng), n(rng), n(rng), n(rng));
        s.v = Vec3(n(rng), n(rng), n(rng)) * 5.0;
        const Wrench w = compute_wrench(s, MotorCommand{}, p, t);
        bool ok = false;
        const Mat3 rv = velocity_frame(s.v, quat_to_rotmat(s.q).m, ok);
        REQUIRE(ok);
        const Vec3 fv = rv.transpose() * w.force_i;
        CHECK(std::abs(fv.y()) < 1e-9 * (1.0 + w.force_i.norm()));
        CHECK(fv.x() == doctest::Approx(-w.drag));
        CHECK(fv.z() == doctest::Approx(-w.lift));
        CHECK((rv.col(0) - s.v.normalized()).norm() < 1e-12);
    }
}

TEST_CASE("linear axis plant") {
    const ContinuousTF tf = fitted_plant(PlantFitParams::reference_defaults());
    const double fs = 250.0;

    // Step: the integrator gives a steady ramp.
    LinearAxisPlant step(tf, fs);
    std::vector<double> y;
    for (int k = 0; k < 500; ++k) {
        y.push_back(step.measured());
        step.apply(0.01);
    }
    const double slope_a = y[400] - y[399], slope_b = y[499] - y[498];
    CHECK(slope_a > 0.0);
    CHECK(slope_b == doctest::Approx(slope_a).epsilon(1e-3));
    CHECK(slope_b * fs == doctest::Approx(0.01 * 260.0).epsilon(1e-2));

    // Sinusoids: amplitude and phase of the continuous model.
    for (double f : {2.0, 5.0, 10.0, 14.0, 20.0, 25.0}) {
        LinearAxisPlant plant(tf, fs);
        std::vector<double> out;
        for (int k = 0; k < 5000; ++k) {
            out.push_back(plant.measured());
            plant.apply(0.01 * std::cos(2 * kPi * f * k / fs));
        }
        const Complex measured = oracle::sine_phasor(out, fs, f, 2500) / 0.01;
        const Complex expected = tf_eval(tf, f);
        CHECK(std::abs(oracle::db(measured) - oracle::db(expected)) < (f == 14.0 ? 0.3 : 1.0));
        CHECK(std::abs(oracle::phase_diff_deg(measured, expected)) < 5.0);
        CHECK(std::abs(measured - plant.response(f)) < 1e-6 * std::abs(measured));
    }

    CHECK_THROWS_AS(LinearAxisPlant(ContinuousTF({0.0, 0.0, 1.0}, {1.0}), fs), std::invalid_argument);

    LinearAxisPlant noisy_a(tf, fs, 0.01, 5), noisy_b(tf, fs, 0.01, 5);
    for (int k = 0; k < 100; ++k) {
        CHECK(noisy_a.measured() == noisy_b.measured());
        noisy_a.apply(0.001);
        noisy_b.apply(0.001);
    }
}

TEST_CASE("gyro pipeline") {
    SensorConfig quiet;
    quiet.gyro_noise_std = 0.0;
    GyroPipeline g(quiet, 1);
    std::optional<Vec3> last;
    for (int i = 0; i < 1000; ++i)
        if (auto s = g.push(Vec3(0.1, -0.2, 0.3))) last = s;
    REQUIRE(last);
    CHECK((*last - Vec3(0.1, -0.2, 0.3)).norm() < 1e-12);

    int outputs = 0;
    GyroPipeline count(quiet, 1);
    for (int i = 0; i < 400; ++i) outputs += count.push(Vec3::Zero()).has_value();
    CHECK(outputs == 100);

    // A 14 Hz tone passes almost untouched.
    GyroPipeline tone(quiet, 1);
    std::vector<double> out;
    for (int i = 0; i < 8000; ++i)
        if (auto s = tone.push(Vec3(0.0, std::sin(2 * kPi * 14.0 * i / 1000.0), 0.0))) out.push_back(s->y());
    const Complex ph = oracle::sine_phasor(out, 250.0, 14.0, 100);
    CHECK(std::abs(oracle::db(ph)) < 0.3);

    // Noise variance shrinks by the filter's noise bandwidth over the raw Nyquist band.
    SensorConfig noisy;
    noisy.gyro_noise_std = 0.05;
    GyroPipeline n(noisy, 7);
    double sum2 = 0.0;
    int cnt = 0;
    for (int i = 0; i < 400000; ++i)
        if (auto s = n.push(Vec3::Zero())) {
            if (i > 1000) {
                sum2 += s->squaredNorm() / 3.0;
                ++cnt;
            }
        }
    const BiquadCascade b = discretize_tustin(butterworth2(100.0), 1000.0, TustinOptions{});
    double band = 0.0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) band += std::norm(b.response((i + 0.5) * 500.0 / m)) / m;
    CHECK(sum2 / cnt / (0.05 * 0.05) == doctest::Approx(band).epsilon(0.1));

    GyroPipeline d1(noisy, 3), d2(noisy, 3);
    for (int i = 0; i < 100; ++i) {
        const auto a = d1.push(Vec3::Ones()), c = d2.push(Vec3::Ones());
        CHECK(a.has_value() == c.has_value());
        if (a) CHECK(*a == *c);
    }
}

TEST_CASE("rotor vibration") {
    RotorVibrationConfig off;
    const RotorVibration zero(off, 1);
    CHECK(zero.value(0.37).norm() == 0.0);

    RotorVibrationConfig cfg;
    cfg.amplitude = 0.05;
    const RotorVibration v(cfg, 4);
    for (double f : v.frequencies()) {
        CHECK(f >= 75.0);
        CHECK(f <= 90.0);
    }
    std::vector<double> x(1 << 15);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = v.value(static_cast<double>(i) / 1000.0).y();
    CHECK(band_power_fraction(periodogram(x, 1000.0), 74.5, 90.5) > 0.99);

    // Attenuation by the 69 Hz flight-stack filter equals the |P_lf|^2 average over the tones.
    const ContinuousTF lf = lowpass_component(PlantFitParams::reference_defaults());
    BiquadCascade b = discretize_tustin(lf, 1000.0, TustinOptions{});
    double pin = 0.0, pout = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = b.process(x[i]);
        if (i > 1000) {
            pin += x[i] * x[i];
            pout += y * y;
        }
    }
    double expected = 0.0;
    for (double f : v.frequencies()) expected += std::norm(b.response(f)) / static_cast<double>(v.frequencies().size());
    CHECK(10.0 * std::log10(pout / pin) == doctest::Approx(10.0 * std::log10(expected)).epsilon(0.05));
    CHECK(10.0 * std::log10(pout / pin) < -3.0);
}

TEST_CASE("vehicle") {
    VehicleConfig cfg;
    cfg.sensor.gyro_noise_std = 0.0;
    RigidBodyState hover;
    hover.p = Vec3(0.0, 0.0, -10.0);
    hover.q = euler_zxy_to_quat({0.0, kPi / 2, 0.0});

    SUBCASE("hover holds") {
        Vehicle v(cfg, hover, 1);
        v.prime(Vec3::Zero());
        for (int i = 0; i < 250; ++i) v.step(Vec3::Zero(), cfg.aircraft.hover_command);
        CHECK((v.state().p - hover.p).norm() < 1e-9);
        CHECK(v.state().omega.norm() < 1e-9);
        CHECK(v.time() == doctest::Approx(1.0));
        CHECK_FALSE(v.saturated());
    }

    SUBCASE("small-signal pitch response follows the identified model") {
        VehicleConfig c = cfg;
        c.actuator.flex_modes = {false, false, false};
        c.actuator.delay_enabled = false;
        const PlantFitParams m = c.actuator.model;
        const ContinuousTF ref = tf_series(lowpass_component(m), dynamics_component(m));
        for (double f : {1.0, 2.0, 3.0, 5.0}) {
            Vehicle v(c, hover, 1);
            v.prime(Vec3::Zero());
            std::vector<double> out;
            for (int k = 0; k < 1250; ++k) {
                const SensorSample s = v.step(Vec3(0.0, 0.002 * std::cos(2 * kPi * f * k / 250.0), 0.0),
                                              c.aircraft.hover_command);
                out.push_back(s.omega_meas.y());
            }
            const Complex h = oracle::sine_phasor(out, 250.0, f, 250) / 0.002;
            CHECK(std::abs(oracle::db(h) - oracle::db(tf_eval(ref, f))) < 3.0);
        }
    }

    SUBCASE("saturation is reported") {
        Vehicle v(cfg, hover, 1);
        v.prime(Vec3::Zero());
        for (int i = 0; i < 25; ++i) v.step(Vec3(0.0, 0.0, 0.5), 0.95);
        CHECK(v.saturated());
        CHECK(v.motors().saturated);
    }

    SUBCASE("seeded noise is reproducible") {
        VehicleConfig n = cfg;
        n.sensor.gyro_noise_std = 0.01;
        Vehicle a(n, hover, 9), b(n, hover, 9), c(n, hover, 10);
        bool differs = false;
        for (int i = 0; i < 50; ++i) {
            const SensorSample sa = a.step(Vec3::Zero(), 0.5), sb = b.step(Vec3::Zero(), 0.5), sc = c.step(Vec3::Zero(), 0.5);
            CHECK(sa.omega_meas == sb.omega_meas);
            differs = differs || sa.omega_meas != sc.omega_meas;
        }
        CHECK(differs);
    }
}
