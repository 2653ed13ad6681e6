#pragma once

#include <string>
#include <vector>

namespace tailsitter {

struct AeroCoefficients {
    double cl = 0.0;
    double cd = 0.0;
    bool clamped = false;  // query fell outside the table and was clamped to its edge
};

/// Lift/drag coefficient table over angle of attack x airspeed, bilinear interpolation.
/// Rows are ordered alpha-major: value(i_alpha, i_speed).
class AeroTable {
public:
    AeroTable() = default;
    /// Throws std::invalid_argument for non-increasing axes, size mismatches or negative C_D.
    AeroTable(std::vector<double> alpha_rad, std::vector<double> speed_ms, std::vector<double> cl,
              std::vector<double> cd);

    /// Flat-plate / thin-airfoil blend over alpha in [-pi, pi] (5 deg steps) and V in [0, 30] m/s.
    /// Pre-stall: cl0 + a alpha with the finite-wing slope a = 2 pi AR / (AR + 2).
    /// Post-stall: C_L = 2 sin a cos a, C_D = 2 sin^2 a + cd0.
    static AeroTable blended_default(double aspect_ratio = 6.08, double cl0 = 0.0, double cd0 = 0.03,
                                     double stall_deg = 12.0);
    /// CSV `alpha_rad,V_ms,CL,CD` on a rectangular grid (any row order).
    static AeroTable from_csv(const std::string& text);
    std::string to_csv() const;

    AeroCoefficients lookup(double alpha_rad, double speed_ms) const;

    const std::vector<double>& alphas() const { return alpha_; }
    const std::vector<double>& speeds() const { return speed_; }

private:
    std::vector<double> alpha_;
    std::vector<double> speed_;
    std::vector<double> cl_;
    std::vector<double> cd_;
};

struct AeroForces {
    double lift = 0.0;  // N
    double drag = 0.0;  // N
    bool clamped = false;
};

/// L = 0.5 rho V^2 S C_L(alpha, V), D = 0.5 rho V^2 S C_D(alpha, V). Throws for V < 0.
AeroForces aero_forces(double alpha_rad, double speed_ms, const AeroTable& table, double rho, double wing_area);

}  // namespace tailsitter
