#pragma once

#include <array>
#include <cstdint>

#include "tailsitter/aero.hpp"
#include "tailsitter/lti.hpp"
#include "tailsitter/rigid_body.hpp"
#include "tailsitter/sensors.hpp"

namespace tailsitter {

/// Torque-path model between the normalized torque command and the mixer.
///
/// Per axis the command passes through P_lf * (s P_dy / P_dy(0)) [* peak * offpeak] [* delay] and is
/// scaled by P_dy(0) * I_axis * axis_gain_ratio to N m. The rigid body supplies the remaining 1/s,
/// so the small-signal rate response reproduces the identified model.
struct ActuatorConfig {
    PlantFitParams model = PlantFitParams::reference_defaults();
    std::array<bool, 3> flex_modes{false, true, false};
    bool delay_enabled = true;
    /// Chosen so the whole sensing + hold + actuator chain adds up to the identified 0.021 s.
    double delay_s = 0.01725;
    Vec3 axis_gain_ratio = Vec3::Ones();
};

struct VehicleConfig {
    AircraftParams aircraft;
    AeroTable table = AeroTable::blended_default();
    ActuatorConfig actuator;
    SensorConfig sensor;
    RotorVibrationConfig vibration;
    double physics_hz = 1000.0;
    double control_hz = 250.0;
};

/// Nonlinear six-degree-of-freedom vehicle with actuator path, sensors and rotor vibration.
/// Single owner; each instance is independent.
class Vehicle {
public:
    Vehicle(const VehicleConfig& cfg, const RigidBodyState& initial, std::uint64_t seed);

    /// Holds the command for one control period (physics_hz / control_hz RK4 steps) and returns
    /// the sensor sample taken at the end of it. Throws NumericalError on a non-finite state.
    SensorSample step(const Vec3& torque_norm, double thrust_cmd);

    /// Steady state for a constant command: filters primed, sensors primed on the current state.
    void prime(const Vec3& torque_norm);

    const RigidBodyState& state() const { return state_; }
    const MotorCommand& motors() const { return motors_; }
    const Wrench& wrench() const { return wrench_; }
    const SensorSample& last_sample() const { return sample_; }
    bool saturated() const { return saturated_; }        // any motor clipped during the last period
    bool aero_clamped() const { return aero_clamped_; }  // table query clamped during the last period
    double time() const { return t_; }
    const VehicleConfig& config() const { return cfg_; }

    /// Torque-path filter for one axis (continuous form).
    static ContinuousTF actuator_tf(const ActuatorConfig& a, int axis);

private:
    VehicleConfig cfg_;
    RigidBodyState state_;
    std::array<BiquadCascade, 3> actuators_;
    Vec3 torque_scale_;
    GyroPipeline gyro_;
    RotorVibration vibration_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    MotorCommand motors_;
    Wrench wrench_;
    SensorSample sample_;
    int substeps_ = 4;
    double t_ = 0.0;
    bool saturated_ = false;
    bool aero_clamped_ = false;
};

}  // namespace tailsitter
