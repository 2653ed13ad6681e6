#include "tailsitter/attitude.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tailsitter {

namespace {

constexpr double kSmallAngle = 1e-6;
constexpr double kGimbalTolerance = 1e-6;

}  // namespace

UnitQuaternion::UnitQuaternion(double eta, const Vec3& epsilon) : eta_(eta), epsilon_(epsilon) {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("quaternion with zero or non-finite norm");
    }
    eta_ /= n;
    epsilon_ /= n;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
    const double len = axis.norm();
    if (!(len > 0.0)) {
        throw std::invalid_argument("rotation axis has zero length");
    }
    const double half = 0.5 * angle_rad;
    return {std::cos(half), axis / len * std::sin(half)};
}

double UnitQuaternion::norm() const {
    return std::sqrt(eta_ * eta_ + epsilon_.squaredNorm());
}

UnitQuaternion UnitQuaternion::conjugate() const {
    UnitQuaternion q = *this;
    q.epsilon_ = -epsilon_;
    return q;
}

UnitQuaternion UnitQuaternion::operator-() const {
    UnitQuaternion q = *this;
    q.eta_ = -eta_;
    q.epsilon_ = -epsilon_;
    return q;
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& rhs) const {
    const double eta = eta_ * rhs.eta_ - epsilon_.dot(rhs.epsilon_);
    const Vec3 eps = eta_ * rhs.epsilon_ + rhs.eta_ * epsilon_ + epsilon_.cross(rhs.epsilon_);
    return {eta, eps};
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
    const Vec3 t = 2.0 * epsilon_.cross(v);
    return v + eta_ * t + epsilon_.cross(t);
}

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
    return a * b;
}

RotationMatrix quat_to_rotmat(const UnitQuaternion& q) {
    const double w = q.eta();
    const double x = q.epsilon().x();
    const double y = q.epsilon().y();
    const double z = q.epsilon().z();
    RotationMatrix r;
    r.m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

UnitQuaternion rotmat_to_quat(const RotationMatrix& r) {
    // Shepperd's method: branch on the largest diagonal term.
    const Mat3& m = r.m;
    const double tr = m.trace();
    if (tr >= m(0, 0) && tr >= m(1, 1) && tr >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + tr);
        return {0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s};
    }
    if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
        return {(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s};
    }
    if (m(1, 1) >= m(2, 2)) {
        const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
        return {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s};
    }
    const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
    return {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s};
}

UnitQuaternion euler_zxy_to_quat(const EulerZXY& e) {
    if (!std::isfinite(e.roll) || !std::isfinite(e.pitch) || !std::isfinite(e.yaw)) {
        throw std::invalid_argument("non-finite Euler angle");
    }
    const auto qz = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), e.yaw);
    const auto qx = UnitQuaternion::from_axis_angle(Vec3::UnitX(), e.roll);
    const auto qy = UnitQuaternion::from_axis_angle(Vec3::UnitY(), e.pitch);
    return qz * qx * qy;
}

EulerConversion quat_to_euler_zxy(const UnitQuaternion& q) {
    // R(2,1) = sin(roll); R(2,0) = -cos(roll) sin(pitch); R(2,2) = cos(roll) cos(pitch);
    // R(0,1) = -sin(yaw) cos(roll); R(1,1) = cos(yaw) cos(roll).
    const Mat3 r = quat_to_rotmat(q).m;
    EulerConversion out;
    out.angles.roll = std::asin(std::clamp(r(2, 1), -1.0, 1.0));
    out.angles.pitch = std::atan2(-r(2, 0), r(2, 2));
    out.angles.yaw = std::atan2(-r(0, 1), r(1, 1));
    out.near_singularity =
        std::abs(std::numbers::pi / 2 - std::abs(out.angles.roll)) < kGimbalTolerance;
    return out;
}

AxisAngleVector attitude_error(const UnitQuaternion& q_current, const UnitQuaternion& q_desired) {
    const UnitQuaternion qe = q_current.conjugate() * q_desired;
    const double eta = qe.eta();
    const double theta = 2.0 * std::acos(std::min(1.0, std::abs(eta)));
    const double half = 0.5 * theta;
    const double scale = theta > kSmallAngle ? half / std::sin(half) : 1.0 + half * half / 6.0;
    const double sign = eta < 0.0 ? -1.0 : 1.0;
    return {sign * scale * qe.epsilon()};
}

Vec3 rate_command(const Vec3& gain, const AxisAngleVector& error) {
    if (!(gain.array() > 0.0).all()) {
        throw std::invalid_argument("attitude gain must be positive on every axis");
    }
    return gain.cwiseProduct(error.xi);
}

Mat3 hat(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

}  // namespace tailsitter
