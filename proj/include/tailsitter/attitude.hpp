#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tailsitter {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion stored as (eta, epsilon): scalar part first.
///
/// Every constructor and operation renormalizes, so the unit-norm invariant
/// holds on every value that escapes this class. q and -q are distinct values
/// but represent the same rotation.
class UnitQuaternion {
public:
    UnitQuaternion() = default;
    UnitQuaternion(double eta, const Vec3& epsilon);
    UnitQuaternion(double eta, double ex, double ey, double ez)
        : UnitQuaternion(eta, Vec3(ex, ey, ez)) {}

    static UnitQuaternion identity() { return {}; }
    /// Rotation of `angle_rad` about `axis` (need not be normalized).
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);

    double eta() const { return eta_; }
    const Vec3& epsilon() const { return epsilon_; }

    UnitQuaternion conjugate() const;
    UnitQuaternion operator-() const;
    /// Hamilton product, renormalized.
    UnitQuaternion operator*(const UnitQuaternion& rhs) const;

    /// Rotates a vector from the frame this quaternion maps from into the frame it maps to.
    Vec3 rotate(const Vec3& v) const;
    double norm() const;

private:
    double eta_ = 1.0;
    Vec3 epsilon_ = Vec3::Zero();
};

/// Rotation vector produced by attitude_error: axis scaled by half the error angle.
struct AxisAngleVector {
    Vec3 xi = Vec3::Zero();
};

/// Tait-Bryan angles in Z-X-Y order: R = Rz(yaw) * Rx(roll) * Ry(pitch).
///
/// Roll is about body x, pitch about body y, yaw about body z. The singular
/// axis is |roll| = pi/2, so the nose-up hover attitude (pitch = pi/2) is
/// regular.
struct EulerZXY {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

struct EulerConversion {
    EulerZXY angles;
    bool near_singularity = false;  // |roll| within 1e-6 of pi/2
};

/// Orthonormal 3x3 matrix, det +1.
struct RotationMatrix {
    Mat3 m = Mat3::Identity();
};

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b);
RotationMatrix quat_to_rotmat(const UnitQuaternion& q);
UnitQuaternion rotmat_to_quat(const RotationMatrix& r);

UnitQuaternion euler_zxy_to_quat(const EulerZXY& e);
EulerConversion quat_to_euler_zxy(const UnitQuaternion& q);

/// Error rotation from the current attitude to the desired one.
///
/// q_e = q_current^-1 * q_desired = [eta, eps], theta = 2 acos|eta|,
/// xi = sgn(eta) * (theta/2) / sin(theta/2) * eps, with sgn(0) = +1.
/// The result is expressed in the current body frame and |xi| <= pi/2.
AxisAngleVector attitude_error(const UnitQuaternion& q_current, const UnitQuaternion& q_desired);

/// omega_d = K o xi (elementwise). Positive output rotates toward the desired attitude.
/// Throws std::invalid_argument unless every gain is > 0.
Vec3 rate_command(const Vec3& gain, const AxisAngleVector& error);

/// Skew-symmetric cross-product matrix.
Mat3 hat(const Vec3& v);

}  // namespace tailsitter
