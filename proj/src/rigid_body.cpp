#include "tailsitter/rigid_body.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace tailsitter {

namespace {

using Vec4 = Eigen::Vector4d;

struct Derivative {
    Vec3 p_dot;
    Vec3 v_dot;
    Vec4 q_dot;
    Vec3 omega_dot;
};

struct RawState {
    Vec3 p;
    Vec3 v;
    Vec4 q;  // eta, ex, ey, ez
    Vec3 omega;
};

RawState to_raw(const RigidBodyState& s) {
    return {s.p, s.v, Vec4(s.q.eta(), s.q.epsilon().x(), s.q.epsilon().y(), s.q.epsilon().z()), s.omega};
}

RigidBodyState from_raw(const RawState& r) {
    RigidBodyState s;
    s.p = r.p;
    s.v = r.v;
    s.q = UnitQuaternion(r.q[0], Vec3(r.q[1], r.q[2], r.q[3]));
    s.omega = r.omega;
    return s;
}

RawState advance(const RawState& s, const Derivative& d, double h) {
    return {s.p + h * d.p_dot, s.v + h * d.v_dot, s.q + h * d.q_dot, s.omega + h * d.omega_dot};
}

Derivative derivative(const RawState& raw, const MotorCommand& m, const AircraftParams& p, const AeroTable& table,
                      bool& clamped) {
    const RigidBodyState s = from_raw(raw);
    const Wrench w = compute_wrench(s, m, p, table);
    clamped = clamped || w.aero_clamped;

    Derivative d;
    d.p_dot = raw.v;
    d.v_dot = Vec3(0.0, 0.0, p.g) + w.force_i / p.mass;
    // q_dot = 0.5 q (x) [0, omega]; the raw (unnormalized) q keeps RK4 stages consistent.
    const double eta = raw.q[0];
    const Vec3 eps(raw.q[1], raw.q[2], raw.q[3]);
    d.q_dot[0] = -0.5 * eps.dot(raw.omega);
    d.q_dot.tail<3>() = 0.5 * (eta * raw.omega + eps.cross(raw.omega));
    const Vec3 iw = p.inertia * raw.omega;
    d.omega_dot = p.inertia.ldlt().solve(-raw.omega.cross(iw) + w.torque_b);
    return d;
}

}  // namespace

bool RigidBodyState::finite() const {
    return p.allFinite() && v.allFinite() && omega.allFinite() && std::isfinite(q.eta()) && q.epsilon().allFinite();
}

void AircraftParams::validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("mass must be > 0");
    if (!(wing_area > 0.0)) throw std::invalid_argument("wing_area must be > 0");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
    if (!(g > 0.0)) throw std::invalid_argument("g must be > 0");
    if (!(hover_command > 0.0 && hover_command < 1.0)) throw std::invalid_argument("hover_command must lie in (0, 1)");
    if (!(inertia - inertia.transpose()).isZero(1e-12)) throw std::invalid_argument("inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("inertia must be positive definite");
    if ((rate_damping.array() < 0.0).any()) throw std::invalid_argument("rate_damping must be >= 0");
    const Eigen::Matrix4d a = allocation_matrix(*this);
    const Eigen::JacobiSVD<Eigen::Matrix4d> svd(a);
    const auto sv = svd.singularValues();
    if (sv(3) <= 1e-9 * sv(0)) throw std::invalid_argument("rotor geometry gives a singular allocation matrix");
}

Eigen::Matrix4d allocation_matrix(const AircraftParams& p) {
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i) {
        const Vec3& r = p.rotor_pos[static_cast<std::size_t>(i)];
        a(0, i) = p.rotor_spin[static_cast<std::size_t>(i)] * p.reaction_coeff;
        a(1, i) = r.z();
        a(2, i) = -r.y();
        a(3, i) = 1.0;
    }
    return a;
}

namespace {

// Largest s in [0, 1] keeping base + s * dir inside [0, 1].
double feasible_scale(const Vec4& base, const Vec4& dir) {
    double s = 1.0;
    for (int i = 0; i < 4; ++i) {
        if (dir[i] > 0.0)
            s = std::min(s, (1.0 - base[i]) / dir[i]);
        else if (dir[i] < 0.0)
            s = std::min(s, (0.0 - base[i]) / dir[i]);
    }
    return std::clamp(s, 0.0, 1.0);
}

}  // namespace

MotorCommand mixer(const Vec3& torque_cmd, double thrust_cmd, const AircraftParams& p) {
    if (!torque_cmd.allFinite() || !std::isfinite(thrust_cmd)) throw NumericalError("mixer input is not finite");
    const Eigen::Matrix4d inv = allocation_matrix(p).inverse();
    const double c1 = p.thrust_coeff();

    MotorCommand out;
    const double collective = std::clamp(thrust_cmd, 0.0, 1.0);
    out.saturated = collective != thrust_cmd;

    const Vec4 base = inv * Vec4(0.0, 0.0, 0.0, 4.0 * c1 * collective) / c1;
    const Vec4 rp = inv * Vec4(torque_cmd.x(), torque_cmd.y(), 0.0, 0.0) / c1;
    const Vec4 yaw = inv * Vec4(0.0, 0.0, torque_cmd.z(), 0.0) / c1;

    const double s_rp = feasible_scale(base, rp);
    const Vec4 with_rp = base + s_rp * rp;
    const double s_yaw = feasible_scale(with_rp, yaw);
    const Vec4 u = with_rp + s_yaw * yaw;
    if (s_rp < 1.0 || s_yaw < 1.0) out.saturated = true;
    for (int i = 0; i < 4; ++i) {
        const double c = std::clamp(u[i], 0.0, 1.0);
        if (std::abs(c - u[i]) > 1e-12) out.saturated = true;
        out.u[static_cast<std::size_t>(i)] = c;
    }
    return out;
}

Mat3 velocity_frame(const Vec3& v_i, const Mat3& r_bi, bool& ok) {
    ok = false;
    const double speed = v_i.norm();
    if (speed < 1e-9) return Mat3::Identity();
    const Vec3 xv = v_i / speed;
    Vec3 zv = xv.cross(r_bi.col(1));
    const double n = zv.norm();
    if (n < 1e-9) return Mat3::Identity();
    zv /= n;
    Mat3 out;
    out.col(0) = xv;
    out.col(1) = zv.cross(xv);
    out.col(2) = zv;
    ok = true;
    return out;
}

Wrench compute_wrench(const RigidBodyState& s, const MotorCommand& m, const AircraftParams& p, const AeroTable& table) {
    Wrench w;
    const Mat3 r = quat_to_rotmat(s.q).m;
    const double c1 = p.thrust_coeff();

    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double t = c1 * m.u[i];
        const Vec3& pos = p.rotor_pos[i];
        total += t;
        w.torque_b += Vec3(p.rotor_spin[i] * p.reaction_coeff * t, pos.z() * t, -pos.y() * t);
    }
    w.torque_b -= p.rate_damping.cwiseProduct(s.omega);
    w.force_i = r * Vec3(total, 0.0, 0.0);

    w.airspeed = s.v.norm();
    bool ok = false;
    const Mat3 rv = velocity_frame(s.v, r, ok);
    if (ok) {
        const Vec3 vb = r.transpose() * s.v;
        w.alpha = std::atan2(vb.z(), vb.x());
        const AeroForces f = aero_forces(w.alpha, w.airspeed, table, p.rho, p.wing_area);
        w.lift = f.lift;
        w.drag = f.drag;
        w.aero_clamped = f.clamped;
        w.force_i += rv * Vec3(-f.drag, 0.0, -f.lift);
    }
    return w;
}

StepResult step_dynamics(const RigidBodyState& s, const MotorCommand& m, double dt, const AircraftParams& p,
                         const AeroTable& table) {
    if (!(dt > 0.0 && dt <= 0.002 + 1e-15)) throw std::invalid_argument("dt must lie in (0, 2 ms]");
    bool clamped = false;
    const RawState y0 = to_raw(s);
    const Derivative k1 = derivative(y0, m, p, table, clamped);
    const Derivative k2 = derivative(advance(y0, k1, dt / 2), m, p, table, clamped);
    const Derivative k3 = derivative(advance(y0, k2, dt / 2), m, p, table, clamped);
    const Derivative k4 = derivative(advance(y0, k3, dt), m, p, table, clamped);

    RawState y = y0;
    y.p += dt / 6 * (k1.p_dot + 2 * k2.p_dot + 2 * k3.p_dot + k4.p_dot);
    y.v += dt / 6 * (k1.v_dot + 2 * k2.v_dot + 2 * k3.v_dot + k4.v_dot);
    y.q += dt / 6 * (k1.q_dot + 2 * k2.q_dot + 2 * k3.q_dot + k4.q_dot);
    y.omega += dt / 6 * (k1.omega_dot + 2 * k2.omega_dot + 2 * k3.omega_dot + k4.omega_dot);

    if (!y.p.allFinite() || !y.v.allFinite() || !y.q.allFinite() || !y.omega.allFinite() || y.q.norm() == 0.0)
        throw NumericalError(fmt::format("rigid-body state became non-finite (|v| was {:.3g} m/s, |w| {:.3g} rad/s)",
                                         s.v.norm(), s.omega.norm()));
    return {from_raw(y), clamped};
}

}  // namespace tailsitter
