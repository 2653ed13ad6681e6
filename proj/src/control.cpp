#include "tailsitter/control.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tailsitter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void RateLoopConfig::validate() const {
    for (const PidGains& g : gains) {
        if (g.kp < 0.0 || g.ki < 0.0 || g.kd < 0.0) throw std::invalid_argument("rate gains must be >= 0");
        if (!std::isfinite(g.kp + g.ki + g.kd)) throw std::invalid_argument("rate gains must be finite");
    }
    if (!(deriv_corner_hz > 0.0)) throw std::invalid_argument("deriv_corner_hz must be > 0");
    if (!(integrator_limit > 0.0)) throw std::invalid_argument("integrator_limit must be > 0");
    if (!(output_limit > 0.0)) throw std::invalid_argument("output_limit must be > 0");
    if (sample_hz != 250.0) throw std::invalid_argument("the rate loop runs at 250 Hz");
    for (const auto& n : notch)
        if (n) (void)tailsitter::notch(*n);
}

RateController::RateController(const RateLoopConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    for (std::size_t a = 0; a < 3; ++a) {
        const double kd = cfg_.gains[a].kd;
        if (kd > 0.0) {
            ContinuousTF d = tf_series(ContinuousTF{{0.0, kd}, {1.0}}, butterworth2(cfg_.deriv_corner_hz));
            deriv_[a] = discretize_tustin(d, cfg_.sample_hz, cfg_.deriv_corner_hz);
        } else {
            deriv_[a] = BiquadCascade({BiquadSection{0.0, 0.0, 0.0, 0.0, 0.0}}, cfg_.sample_hz);
        }
        if (cfg_.notch[a]) {
            notch_[a] = discretize_tustin(notch(*cfg_.notch[a]), cfg_.sample_hz, cfg_.notch[a]->center_hz);
            notch_on_[a] = true;
        }
    }
}

void RateController::reset() {
    for (auto& d : deriv_) d.reset();
    for (auto& n : notch_)
        if (n) n->reset();
    integ_.setZero();
    prev_err_.setZero();
    pre_notch_.setZero();
    last_out_.setZero();
    last_clamped_ = {};
}

void RateController::set_notch_enabled(int axis, bool enabled) {
    const auto a = static_cast<std::size_t>(axis);
    if (!notch_[a]) {
        if (enabled) throw std::invalid_argument(fmt::format("axis {} has no notch configured", axis));
        return;
    }
    if (enabled && !notch_on_[a]) notch_[a]->prime(pre_notch_[axis]);
    notch_on_[a] = enabled;
}

RateOutput RateController::step(const Vec3& omega_meas, const Vec3& omega_cmd) {
    if (!omega_meas.allFinite() || !omega_cmd.allFinite()) throw NumericalError("rate controller input is not finite");
    const double dt = 1.0 / cfg_.sample_hz;
    RateOutput out;
    for (int i = 0; i < 3; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const PidGains& g = cfg_.gains[a];
        const double e = omega_cmd[i] - omega_meas[i];

        // Conditional integration: hold while the previous output sat on the limit and the
        // error would push further into it.
        const bool hold = last_clamped_[a] && sign_of(e) == sign_of(last_out_[i]);
        if (!hold) {
            integ_[i] += 0.5 * dt * (e + prev_err_[i]);
            integ_[i] = std::clamp(integ_[i], -cfg_.integrator_limit, cfg_.integrator_limit);
        }
        const double d_in = cfg_.derivative_on == DerivativeOn::error ? e : -omega_meas[i];
        const double d = deriv_[a].process(d_in);
        const double pre = g.kp * e + g.ki * integ_[i] + d;
        pre_notch_[i] = pre;
        const double shaped = (notch_[a] && notch_on_[a]) ? notch_[a]->process(pre) : pre;

        const double lim = cfg_.output_limit;
        out.torque[i] = std::clamp(shaped, -lim, lim);
        out.clamped[a] = out.torque[i] != shaped;
        last_out_[i] = shaped;
        last_clamped_[a] = out.clamped[a];
        prev_err_[i] = e;
    }
    return out;
}

ContinuousTF RateController::design_tf(int axis) const {
    const auto a = static_cast<std::size_t>(axis);
    const PidGains& g = cfg_.gains[a];
    ContinuousTF c = pid_tf(g.kp, g.ki, g.kd, cfg_.deriv_corner_hz);
    if (notch_[a] && notch_on_[a]) c = tf_series(c, notch(*cfg_.notch[a]));
    return c;
}

Complex RateController::digital_response(int axis, double freq_hz) const {
    const auto a = static_cast<std::size_t>(axis);
    const PidGains& g = cfg_.gains[a];
    const double dt = 1.0 / cfg_.sample_hz;
    const Complex zi = std::polar(1.0, -kTwoPi * freq_hz / cfg_.sample_hz);
    Complex h = g.kp + g.ki * 0.5 * dt * (1.0 + zi) / (1.0 - zi);
    h += deriv_[a].response(freq_hz);
    if (notch_[a] && notch_on_[a]) h *= notch_[a]->response(freq_hz);
    return h;
}

std::pair<poly::Coeffs, poly::Coeffs> RateController::digital_polynomials(int axis) const {
    const auto a = static_cast<std::size_t>(axis);
    const PidGains& g = cfg_.gains[a];
    const double half_dt = 0.5 / cfg_.sample_hz;
    const auto [bd, ad] = deriv_[a].polynomials();
    const poly::Coeffs diff{1.0, -1.0};
    // kp + ki T/2 (1 + z^-1)/(1 - z^-1) + bd/ad over the common denominator (1 - z^-1) ad.
    poly::Coeffs num = poly::scale(poly::multiply(diff, ad), g.kp);
    num = poly::add(num, poly::scale(poly::multiply(poly::Coeffs{1.0, 1.0}, ad), g.ki * half_dt));
    num = poly::add(num, poly::multiply(bd, diff));
    poly::Coeffs den = poly::multiply(diff, ad);
    if (notch_[a] && notch_on_[a]) {
        const auto [bn, an] = notch_[a]->polynomials();
        num = poly::multiply(num, bn);
        den = poly::multiply(den, an);
    }
    return {num, den};
}

void AttitudeLoopConfig::validate() const {
    if (!(gain.array() > 0.0).all()) throw std::invalid_argument("attitude gains must be > 0");
}

Vec3 attitude_controller_step(const UnitQuaternion& q_meas, const UnitQuaternion& q_cmd, const AttitudeLoopConfig& cfg) {
    return rate_command(cfg.gain, attitude_error(q_meas, q_cmd));
}

void AltitudeLoopConfig::validate() const {
    if (k_alt < 0.0 || k_ff < 0.0 || kp_z < 0.0 || ki_z < 0.0) throw std::invalid_argument("altitude gains must be >= 0");
    if (!(vz_limit > 0.0)) throw std::invalid_argument("vz_limit must be > 0");
    if (!(integrator_limit > 0.0)) throw std::invalid_argument("altitude integrator_limit must be > 0");
    if (!(min_vertical_authority > 0.0 && min_vertical_authority < 1.0))
        throw std::invalid_argument("min_vertical_authority must lie in (0, 1)");
}

FeedforwardThrust altitude_ff_thrust(double v_zd, const UnitQuaternion& q, double airspeed, double alpha,
                                     const AltitudeLoopConfig& cfg, const AircraftParams& params,
                                     const AeroTable& table) {
    FeedforwardThrust out;
    const Mat3 r = quat_to_rotmat(q).m;
    const double r31 = r(2, 0);
    const double k = params.hover_command / (params.mass * params.g);
    if (std::abs(r31) < cfg.min_vertical_authority) {
        out.no_vertical_authority = true;
        out.command = params.hover_command;
        out.thrust_n = params.mass * params.g;
        return out;
    }
    const AeroForces f = aero_forces(alpha, airspeed, table, params.rho, params.wing_area);
    const Vec3 xv_b(std::cos(alpha), 0.0, std::sin(alpha));
    const Vec3 zv_b(-std::sin(alpha), 0.0, std::cos(alpha));
    const Vec3 fa_i = r * (-f.drag * xv_b - f.lift * zv_b);
    const double a_zd = cfg.k_ff * v_zd;
    out.thrust_n = (params.mass * a_zd - params.mass * params.g - fa_i.z()) / r31;
    const double u = k * out.thrust_n;
    out.command = std::clamp(u, 0.0, 1.0);
    out.clamped = out.command != u;
    return out;
}

AltitudeController::AltitudeController(const AltitudeLoopConfig& cfg, double sample_hz)
    : cfg_(cfg), dt_(1.0 / sample_hz) {
    cfg_.validate();
    if (!(sample_hz > 0.0)) throw std::invalid_argument("sample_hz must be > 0");
}

AltitudeOutput AltitudeController::step(double alt_meas, double alt_cmd, double vz_meas, const UnitQuaternion& q,
                                        double airspeed, double alpha, const AircraftParams& params,
                                        const AeroTable& table) {
    if (!std::isfinite(alt_meas) || !std::isfinite(alt_cmd) || !std::isfinite(vz_meas))
        throw NumericalError("altitude controller input is not finite");
    AltitudeOutput out;
    out.v_zd = std::clamp(-cfg_.k_alt * (alt_cmd - alt_meas), -cfg_.vz_limit, cfg_.vz_limit);
    out.ff = altitude_ff_thrust(out.v_zd, q, airspeed, alpha, cfg_, params, table);

    const double e = vz_meas - out.v_zd;
    const double trial = std::clamp(integ_ + e * dt_, -cfg_.integrator_limit, cfg_.integrator_limit);
    const double raw = out.ff.command + cfg_.kp_z * e + cfg_.ki_z * trial;
    out.thrust_cmd = std::clamp(raw, 0.0, 1.0);
    out.clamped = out.thrust_cmd != raw;
    // Keep integrating only when that does not push further into the limit.
    if (!out.clamped || sign_of(e) != sign_of(raw - out.thrust_cmd)) integ_ = trial;
    return out;
}

}  // namespace tailsitter
