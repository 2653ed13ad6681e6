#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tailsitter/attitude.hpp"

using namespace tailsitter;
using oracle::kPi;

namespace {

bool same(const UnitQuaternion& a, const UnitQuaternion& b, double tol = 1e-12) {
    return std::abs(a.eta() - b.eta()) < tol && (a.epsilon() - b.epsilon()).norm() < tol;
}

UnitQuaternion random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng), n(rng), n(rng)};
}

// Pure kinematics q' = q (0, w) / 2 with w from the attitude law, RK4.
double angle_after(UnitQuaternion q, const UnitQuaternion& qd, const Vec3& k, double t_end, double dt,
                   bool& monotone) {
    const auto deriv = [&](const Eigen::Vector4d& x) {
        const UnitQuaternion qq(x(0), x.tail<3>());
        const Vec3 w = rate_command(k, attitude_error(qq, qd));
        Eigen::Vector4d d;
        d(0) = -0.5 * x.tail<3>().dot(w);
        d.tail<3>() = 0.5 * (x(0) * w + x.tail<3>().cross(w));
        return d;
    };
    const auto angle = [&](const UnitQuaternion& a) {
        return oracle::rotation_angle(quat_to_rotmat(a).m.transpose() * quat_to_rotmat(qd).m);
    };
    monotone = true;
    double prev = angle(q);
    for (double t = 0.0; t < t_end - 1e-12; t += dt) {
        Eigen::Vector4d x(q.eta(), q.epsilon().x(), q.epsilon().y(), q.epsilon().z());
        const auto k1 = deriv(x);
        const auto k2 = deriv(x + dt / 2 * k1);
        const auto k3 = deriv(x + dt / 2 * k2);
        const auto k4 = deriv(x + dt * k3);
        x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        q = UnitQuaternion(x(0), x.tail<3>());
        const double a = angle(q);
        monotone = monotone && a <= prev + 1e-12;
        prev = a;
    }
    return prev;
}

}  // namespace

TEST_CASE("quaternion product") {
    std::mt19937_64 rng(1);
    const UnitQuaternion q = random_quat(rng);
    CHECK(same(UnitQuaternion::identity() * q, q));
    CHECK(same(q * q.conjugate(), UnitQuaternion::identity()));
    const UnitQuaternion x90 = UnitQuaternion::from_axis_angle(Vec3::UnitX(), kPi / 2);
    const UnitQuaternion x180 = UnitQuaternion::from_axis_angle(Vec3::UnitX(), kPi);
    CHECK(same(x90 * x90, x180));
    CHECK(same(quat_multiply(x90, x90), x180));
}

TEST_CASE("constructor normalizes") {
    const UnitQuaternion q(2.0, 0.0, 0.0, 0.0);
    CHECK(q.eta() == doctest::Approx(1.0));
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rotation matrix") {
    CHECK((quat_to_rotmat(UnitQuaternion::identity()).m - Mat3::Identity()).norm() == 0.0);
    const Mat3 z180 = quat_to_rotmat(UnitQuaternion::from_axis_angle(Vec3::UnitZ(), kPi)).m;
    CHECK((z180 - Vec3(-1, -1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Vec3 axis(n(rng), n(rng), n(rng));
        const double angle = std::abs(n(rng));
        const UnitQuaternion q = UnitQuaternion::from_axis_angle(axis, angle);
        const Mat3 r = quat_to_rotmat(q).m;
        CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((r - oracle::rodrigues(axis, angle)).cwiseAbs().maxCoeff() < 1e-12);
        const Vec3 v(n(rng), n(rng), n(rng));
        CHECK((q.rotate(v) - r * v).norm() < 1e-12);
        const UnitQuaternion back = rotmat_to_quat({r});
        CHECK((same(back, q, 1e-9) || same(back, -q, 1e-9)));
    }
}

TEST_CASE("Z-X-Y Euler angles") {
    CHECK(same(euler_zxy_to_quat({0, 0, 0}), UnitQuaternion::identity()));

    const UnitQuaternion hover = euler_zxy_to_quat({0.0, kPi / 2, 0.0});
    CHECK(same(hover, UnitQuaternion::from_axis_angle(Vec3::UnitY(), kPi / 2)));
    const EulerConversion back = quat_to_euler_zxy(hover);
    CHECK_FALSE(back.near_singularity);
    CHECK(back.angles.pitch == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(std::abs(back.angles.roll) < 1e-15);
    CHECK(std::abs(back.angles.yaw) < 1e-15);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const EulerZXY e{1.4 * u(rng), kPi * u(rng), kPi * u(rng)};
        const Mat3 expected = oracle::rz(e.yaw) * oracle::rx(e.roll) * oracle::ry(e.pitch);
        const UnitQuaternion q = euler_zxy_to_quat(e);
        CHECK((quat_to_rotmat(q).m - expected).cwiseAbs().maxCoeff() < 1e-12);
        const EulerZXY r = quat_to_euler_zxy(q).angles;
        worst = std::max({worst, std::abs(r.roll - e.roll), std::abs(r.pitch - e.pitch), std::abs(r.yaw - e.yaw)});
    }
    CHECK(worst < 1e-9);

    CHECK(quat_to_euler_zxy(euler_zxy_to_quat({kPi / 2, 0.3, 0.2})).near_singularity);
}

TEST_CASE("attitude error") {
    std::mt19937_64 rng(4);
    const UnitQuaternion q = random_quat(rng);
    CHECK(attitude_error(q, q).xi.norm() < 1e-15);

    const UnitQuaternion x90 = UnitQuaternion::from_axis_angle(Vec3::UnitX(), kPi / 2);
    const Vec3 xi = attitude_error(UnitQuaternion::identity(), x90).xi;
    CHECK(xi.x() == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(xi.tail<2>().norm() < 1e-15);

    for (int i = 0; i < 1000; ++i) {
        const UnitQuaternion a = random_quat(rng), b = random_quat(rng);
        const Vec3 e = attitude_error(a, b).xi;
        CHECK(e == attitude_error(a, -b).xi);
        CHECK(e.norm() <= kPi / 2 + 1e-12);
        const double theta = oracle::rotation_angle(quat_to_rotmat(a).m.transpose() * quat_to_rotmat(b).m);
        CHECK(e.norm() == doctest::Approx(theta / 2).epsilon(1e-7));
        // Expressed in the current body frame: rotating by the error from a reaches b.
        if (theta > 1e-3 && theta < kPi - 1e-3) {
            const Mat3 step = oracle::rodrigues(e, 2 * e.norm());
            CHECK((quat_to_rotmat(a).m * step - quat_to_rotmat(b).m).cwiseAbs().maxCoeff() < 1e-9);
        }
    }

    // Small angles: |xi| = theta/2 and the linearized form.
    const UnitQuaternion small = UnitQuaternion::from_axis_angle(Vec3(1, 2, 3), 1e-4);
    CHECK(attitude_error(UnitQuaternion::identity(), small).xi.norm() == doctest::Approx(0.5e-4).epsilon(1e-9));
    const UnitQuaternion tiny = UnitQuaternion::from_axis_angle(Vec3(0, 1, 0), 1e-8);
    CHECK((attitude_error(UnitQuaternion::identity(), tiny).xi - tiny.epsilon()).norm() < 1e-12);

    // Half turn: eta = 0, finite result of length pi/2.
    const UnitQuaternion z180 = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), kPi);
    const Vec3 h = attitude_error(UnitQuaternion::identity(), z180).xi;
    CHECK(h.allFinite());
    CHECK(h.norm() == doctest::Approx(kPi / 2));
}

TEST_CASE("rate command") {
    CHECK(rate_command(Vec3::Constant(5), {}).norm() == 0.0);
    const Vec3 w = rate_command(Vec3::Constant(2), {Vec3(kPi / 4, 0, 0)});
    CHECK(w.x() == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS(rate_command(Vec3(1, 0, 1), {}), std::invalid_argument);
    CHECK_THROWS_AS(rate_command(Vec3(1, -1, 1), {}), std::invalid_argument);
}

TEST_CASE("kinematic convergence") {
    // |xi| is half the error angle, so theta decays at K/2.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 k(3.0, 4.0, 5.0);
    const double rate = 0.5 * k.minCoeff() * (1.0 - 0.05);
    for (int i = 0; i < 20; ++i) {
        const Vec3 axis(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
        const double theta0 = 0.05 + 2.9 * u(rng);
        const UnitQuaternion qd = random_quat(rng);
        const UnitQuaternion q0 = qd * UnitQuaternion::from_axis_angle(axis, theta0);
        for (double t : {0.2, 0.5, 1.0}) {
            bool monotone = false;
            const double theta = angle_after(q0, qd, k, t, 1e-3, monotone);
            CHECK(monotone);
            CHECK(theta <= theta0 * std::exp(-rate * t) + 1e-9);
        }
    }
}
