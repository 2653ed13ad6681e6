#pragma once

#include <array>
#include <optional>

#include "tailsitter/aero.hpp"
#include "tailsitter/attitude.hpp"
#include "tailsitter/lti.hpp"
#include "tailsitter/rigid_body.hpp"

namespace tailsitter {

struct PidGains {
    double kp = 0.09;
    double ki = 0.1;
    double kd = 0.01;
};

enum class DerivativeOn { error, measurement };

struct RateLoopConfig {
    std::array<PidGains, 3> gains{};
    double deriv_corner_hz = 18.0;
    /// Per-axis notch; the pitch axis carries one by default.
    std::array<std::optional<NotchParams>, 3> notch{std::nullopt, NotchParams{}, std::nullopt};
    double integrator_limit = 2.0;  // |integral of rate error|, rad
    double output_limit = 0.5;      // |normalized torque|
    double sample_hz = 250.0;
    DerivativeOn derivative_on = DerivativeOn::measurement;

    /// Throws std::invalid_argument for negative gains, non-positive limits or a rate other than 250 Hz.
    void validate() const;
};

struct RateOutput {
    Vec3 torque = Vec3::Zero();  // normalized
    std::array<bool, 3> clamped{};
};

/// 250 Hz rate loop: PID with filtered derivative, optional notch, clamp, conditional anti-windup.
/// State is explicit and copyable.
class RateController {
public:
    explicit RateController(const RateLoopConfig& cfg);

    /// Throws NumericalError for non-finite inputs.
    RateOutput step(const Vec3& omega_meas, const Vec3& omega_cmd);
    void reset();

    /// Switches a configured notch in or out. Switching in primes the filter at the current
    /// pre-notch value so the output does not jump.
    void set_notch_enabled(int axis, bool enabled);
    bool notch_enabled(int axis) const { return notch_on_[static_cast<std::size_t>(axis)]; }
    bool has_notch(int axis) const { return notch_[static_cast<std::size_t>(axis)].has_value(); }

    const Vec3& integrator() const { return integ_; }
    const RateLoopConfig& config() const { return cfg_; }

    /// Continuous design C(s) for one axis (notch included if present and enabled).
    ContinuousTF design_tf(int axis) const;
    /// Feedback-path response of the digital implementation (unclamped), notch state as currently set.
    /// The derivative is included whichever signal it acts on, so this is the loop's controller factor.
    Complex digital_response(int axis, double freq_hz) const;
    /// Numerator and denominator of that response, ascending in z^-1.
    std::pair<poly::Coeffs, poly::Coeffs> digital_polynomials(int axis) const;

private:
    RateLoopConfig cfg_;
    std::array<BiquadCascade, 3> deriv_;
    std::array<std::optional<BiquadCascade>, 3> notch_;
    std::array<bool, 3> notch_on_{};
    Vec3 integ_ = Vec3::Zero();
    Vec3 prev_err_ = Vec3::Zero();
    Vec3 pre_notch_ = Vec3::Zero();
    Vec3 last_out_ = Vec3::Zero();
    std::array<bool, 3> last_clamped_{};
};

struct AttitudeLoopConfig {
    Vec3 gain = Vec3::Constant(5.0);  // 1/s
    void validate() const;
};

/// omega_cmd = K o attitude_error(q_meas, q_cmd).
Vec3 attitude_controller_step(const UnitQuaternion& q_meas, const UnitQuaternion& q_cmd, const AttitudeLoopConfig& cfg);

struct AltitudeLoopConfig {
    double k_alt = 1.0;   // 1/s
    double k_ff = 1.0;    // 1/s
    double kp_z = 0.15;
    double ki_z = 0.05;
    double vz_limit = 3.0;          // m/s
    double integrator_limit = 4.0;  // |integral of vz error|, m
    double min_vertical_authority = 0.05;
    void validate() const;
};

struct FeedforwardThrust {
    double command = 0.0;  // normalized collective, [0, 1]
    double thrust_n = 0.0;
    bool no_vertical_authority = false;
    bool clamped = false;
};

/// Solves m a_zd = m g + e3 . f_a + r31 T for T with a_zd = k_ff v_zd (NED, z down), then
/// u = (T_h / m g) T clamped to [0, 1]. Aerodynamic force assumes coordinated flight: the
/// velocity lies in the body x-z plane at angle of attack alpha.
/// With |r31| below the authority threshold returns T_h and sets no_vertical_authority.
FeedforwardThrust altitude_ff_thrust(double v_zd, const UnitQuaternion& q, double airspeed, double alpha,
                                     const AltitudeLoopConfig& cfg, const AircraftParams& params,
                                     const AeroTable& table);

struct AltitudeOutput {
    double thrust_cmd = 0.0;
    double v_zd = 0.0;
    FeedforwardThrust ff;
    bool clamped = false;
};

/// Altitude P loop feeding a vertical-velocity loop with feedforward and parallel PI.
/// v_zd = -k_alt (alt_cmd - alt) (NED), clamped to +-vz_limit. The PI acts on v_z - v_zd,
/// so sinking faster than commanded adds thrust.
class AltitudeController {
public:
    AltitudeController(const AltitudeLoopConfig& cfg, double sample_hz = 250.0);

    AltitudeOutput step(double alt_meas, double alt_cmd, double vz_meas, const UnitQuaternion& q, double airspeed,
                        double alpha, const AircraftParams& params, const AeroTable& table);
    void reset() { integ_ = 0.0; }
    double integrator() const { return integ_; }

private:
    AltitudeLoopConfig cfg_;
    double dt_;
    double integ_ = 0.0;
};

}  // namespace tailsitter
