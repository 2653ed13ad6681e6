#pragma once

// Reference computations written independently of the library, used as test oracles.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

inline double db(Complex c) { return 20.0 * std::log10(std::abs(c)); }
inline double db(double x) { return 20.0 * std::log10(std::abs(x)); }

/// Rodrigues' formula for a rotation of `angle` about unit `axis`.
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
    const Eigen::Vector3d k = axis.normalized();
    Eigen::Matrix3d kx;
    kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
    return Eigen::Matrix3d::Identity() + std::sin(angle) * kx + (1.0 - std::cos(angle)) * kx * kx;
}

inline Eigen::Matrix3d rx(double a) { return rodrigues(Eigen::Vector3d::UnitX(), a); }
inline Eigen::Matrix3d ry(double a) { return rodrigues(Eigen::Vector3d::UnitY(), a); }
inline Eigen::Matrix3d rz(double a) { return rodrigues(Eigen::Vector3d::UnitZ(), a); }

/// Rotation angle of a rotation matrix, [0, pi].
inline double rotation_angle(const Eigen::Matrix3d& r) {
    return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

/// The identified pitch plant evaluated term by term from its published coefficients.
inline Complex reference_plant(double f_hz) {
    const Complex s(0.0, 2.0 * kPi * f_hz);
    const Complex lf = 1.0 / (1.0 + 0.00321 * s + 0.00000531 * s * s);
    const Complex dy = (260.0 + 3.764 * s + 0.01362 * s * s) / ((1.0 + 0.0637 * s) * s);
    const Complex peak = (1.0 + 0.00239 * s + 0.000129 * s * s) / (1.0 + 0.000341 * s + 0.000129 * s * s);
    const Complex off = (1.0 + 0.000118 * s + 0.0000348 * s * s) / (1.0 + 0.0013 * s + 0.0000348 * s * s);
    return lf * dy * peak * off * std::exp(-s * 0.021);
}

/// Bisection root of a continuous function with a sign change on [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, int iters = 200) {
    double fa = f(a);
    for (int i = 0; i < iters; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Least-squares fit of x[k] = a cos(w t) + b sin(w t) + c + d t, returns the complex phasor a - j b
/// so that x ~ Re(phasor e^{jwt}).
inline Complex sine_phasor(const std::vector<double>& x, double sample_hz, double f_hz, std::size_t skip = 0) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size() - skip), 4);
    Eigen::VectorXd y(a.rows());
    for (std::size_t k = skip; k < x.size(); ++k) {
        const double t = static_cast<double>(k) / sample_hz;
        const auto r = static_cast<Eigen::Index>(k - skip);
        a(r, 0) = std::cos(2.0 * kPi * f_hz * t);
        a(r, 1) = std::sin(2.0 * kPi * f_hz * t);
        a(r, 2) = 1.0;
        a(r, 3) = t;
        y(r) = x[k];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    return {c(0), -c(1)};
}

/// Wrapped difference of two angles in degrees, in (-180, 180].
inline double phase_diff_deg(Complex a, Complex b) { return std::arg(a / b) / kDeg; }

}  // namespace oracle
