#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "tailsitter/aero.hpp"
#include "tailsitter/attitude.hpp"

namespace tailsitter {

/// Raised when a simulation state or controller input stops being finite.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Position and velocity in NED (z down), attitude body->inertial, rates in body axes.
struct RigidBodyState {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    UnitQuaternion q;
    Vec3 omega = Vec3::Zero();

    bool finite() const;
};

/// Physical constants of the tail-sitter. Body x is the thrust axis (nose), y the span.
struct AircraftParams {
    double mass = 1.3;
    Mat3 inertia = Vec3(0.03, 0.012, 0.04).asDiagonal();
    double wing_area = 0.1332;
    double rho = 1.225;
    double g = 9.81;
    /// Rotor hubs in body axes, m. Thrust acts along +x at each hub.
    std::array<Vec3, 4> rotor_pos{Vec3(0.05, 0.2, -0.15), Vec3(0.05, -0.2, -0.15), Vec3(0.05, -0.2, 0.15),
                                  Vec3(0.05, 0.2, 0.15)};
    /// Reaction torque about +x per newton of thrust, signed by spin direction.
    std::array<double, 4> rotor_spin{1.0, -1.0, 1.0, -1.0};
    double reaction_coeff = 0.015;  // N m per N
    double hover_command = 0.5;     // normalized per-motor command that gives T = m g
    Vec3 rate_damping = Vec3(3e-5, 1.2e-5, 4e-5);  // N m s, M_a = -c o omega

    /// Newtons per unit normalized command per motor: m g / (4 T_h).
    double thrust_coeff() const { return mass * g / (4.0 * hover_command); }
    /// Throws std::invalid_argument on non-physical values or a singular rotor geometry.
    void validate() const;
};

struct MotorCommand {
    std::array<double, 4> u{};
    bool saturated = false;
};

/// Maps per-motor thrusts (N) to [tau_x, tau_y, tau_z, total thrust].
Eigen::Matrix4d allocation_matrix(const AircraftParams& p);

/// Inverts the allocation for a torque (N m) and collective command (normalized, mean of the four).
/// Saturation priority: collective, then roll/pitch, then yaw; any reduction sets `saturated`.
MotorCommand mixer(const Vec3& torque_cmd, double thrust_cmd, const AircraftParams& p);

/// Forces and moments on the airframe at a given state and motor command.
struct Wrench {
    Vec3 force_i = Vec3::Zero();   // total non-gravity force, inertial frame
    Vec3 torque_b = Vec3::Zero();  // total moment, body frame
    double alpha = 0.0;            // angle of attack, rad
    double airspeed = 0.0;         // ground speed used as airspeed, m/s
    double lift = 0.0;
    double drag = 0.0;
    bool aero_clamped = false;
};

/// Velocity frame: x_v along v, z_v in the body x-z plane. Columns are x_v, y_v, z_v in inertial axes.
/// Undefined (identity returned, ok = false) at zero speed or when v is along the span.
Mat3 velocity_frame(const Vec3& v_i, const Mat3& r_bi, bool& ok);

Wrench compute_wrench(const RigidBodyState& s, const MotorCommand& m, const AircraftParams& p, const AeroTable& table);

struct StepResult {
    RigidBodyState state;
    bool aero_clamped = false;
};

/// One RK4 step with the motor command held. dt must lie in (0, 2 ms].
/// Throws NumericalError when the new state is not finite.
StepResult step_dynamics(const RigidBodyState& s, const MotorCommand& m, double dt, const AircraftParams& p,
                         const AeroTable& table);

}  // namespace tailsitter
