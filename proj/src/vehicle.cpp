#include "tailsitter/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace tailsitter {

ContinuousTF Vehicle::actuator_tf(const ActuatorConfig& a, int axis) {
    const PlantFitParams& m = a.model;
    m.validate();
    if (!(m.dy_num[0] > 0.0)) throw std::invalid_argument("actuator model needs a positive low-frequency gain");
    // s * P_dy / P_dy(0) = (1 + c1/c0 s + c2/c0 s^2) / (1 + tau s)
    ContinuousTF tf{{1.0, m.dy_num[1] / m.dy_num[0], m.dy_num[2] / m.dy_num[0]}, {1.0, m.dy_pole}};
    tf = tf_series(lowpass_component(m), tf);
    if (a.flex_modes[static_cast<std::size_t>(axis)]) {
        tf = tf_series(tf, mode_component(m.peak));
        tf = tf_series(tf, mode_component(m.offpeak));
    }
    if (a.delay_enabled) tf.delay = a.delay_s;
    return tf;
}

Vehicle::Vehicle(const VehicleConfig& cfg, const RigidBodyState& initial, std::uint64_t seed)
    : cfg_(cfg),
      state_(initial),
      gyro_(cfg.sensor, seed ^ 0x9e3779b97f4a7c15ULL),
      vibration_(cfg.vibration, seed ^ 0xbf58476d1ce4e5b9ULL),
      rng_(seed) {
    cfg_.aircraft.validate();
    if (!(cfg.physics_hz > 0.0 && cfg.control_hz > 0.0)) throw std::invalid_argument("rates must be > 0");
    const double ratio = cfg.physics_hz / cfg.control_hz;
    substeps_ = static_cast<int>(std::lround(ratio));
    if (substeps_ < 1 || std::abs(ratio - substeps_) > 1e-9)
        throw std::invalid_argument("physics rate must be an integer multiple of the control rate");
    if (std::abs(cfg.sensor.raw_hz - cfg.physics_hz) > 1e-9 || cfg.sensor.decimation != substeps_)
        throw std::invalid_argument("sensor raw rate and decimation must match the physics and control rates");
    if (!state_.finite()) throw NumericalError("initial state is not finite");

    TustinOptions opt;
    opt.prewarp_resonances = true;
    opt.fractional_delay_allpass = true;
    opt.equalize_hz = 50.0;
    for (int a = 0; a < 3; ++a) {
        actuators_[static_cast<std::size_t>(a)] = discretize_tustin(actuator_tf(cfg.actuator, a), cfg.physics_hz, opt);
        torque_scale_[a] = cfg.actuator.model.dy_num[0] * cfg.aircraft.inertia(a, a) * cfg.actuator.axis_gain_ratio[a];
    }
    gyro_.prime(state_.omega);
    sample_.omega_meas = state_.omega;
    sample_.altitude_meas = -state_.p.z();
    sample_.vz_meas = state_.v.z();
    motors_ = mixer(Vec3::Zero(), cfg.aircraft.hover_command, cfg.aircraft);
    wrench_ = compute_wrench(state_, motors_, cfg_.aircraft, cfg_.table);
}

void Vehicle::prime(const Vec3& torque_norm) {
    for (int a = 0; a < 3; ++a) actuators_[static_cast<std::size_t>(a)].prime(torque_norm[a]);
    gyro_.prime(state_.omega);
}

SensorSample Vehicle::step(const Vec3& torque_norm, double thrust_cmd) {
    if (!torque_norm.allFinite() || !std::isfinite(thrust_cmd)) throw NumericalError("vehicle command is not finite");
    const double dt = 1.0 / cfg_.physics_hz;
    saturated_ = false;
    aero_clamped_ = false;
    std::optional<Vec3> gyro;
    for (int k = 0; k < substeps_; ++k) {
        Vec3 torque;
        for (int a = 0; a < 3; ++a)
            torque[a] = torque_scale_[a] * actuators_[static_cast<std::size_t>(a)].process(torque_norm[a]);
        motors_ = mixer(torque, thrust_cmd, cfg_.aircraft);
        saturated_ = saturated_ || motors_.saturated;
        const StepResult r = step_dynamics(state_, motors_, dt, cfg_.aircraft, cfg_.table);
        aero_clamped_ = aero_clamped_ || r.aero_clamped;
        state_ = r.state;
        t_ += dt;
        gyro = gyro_.push(state_.omega + vibration_.value(t_));
    }
    wrench_ = compute_wrench(state_, motors_, cfg_.aircraft, cfg_.table);
    if (!gyro) throw std::logic_error("sensor decimation out of step with the control period");
    sample_.t = t_;
    sample_.omega_meas = *gyro;
    sample_.altitude_meas = -state_.p.z() + cfg_.sensor.altitude_noise_std * normal_(rng_);
    sample_.vz_meas = state_.v.z() + cfg_.sensor.vz_noise_std * normal_(rng_);
    return sample_;
}

}  // namespace tailsitter
