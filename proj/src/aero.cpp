#include "tailsitter/aero.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tailsitter {

namespace {

void check_axis(const std::vector<double>& v, const char* name) {
    if (v.size() < 2) throw std::invalid_argument(fmt::format("aero table {} axis needs at least 2 nodes", name));
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) throw std::invalid_argument(fmt::format("aero table {} axis must increase", name));
}

// Index i with axis[i] <= x <= axis[i+1] and the fraction within it, clamping outside.
std::pair<std::size_t, double> bracket(const std::vector<double>& axis, double x, bool& clamped) {
    if (x < axis.front()) {
        clamped = true;
        return {0, 0.0};
    }
    if (x > axis.back()) {
        clamped = true;
        return {axis.size() - 2, 1.0};
    }
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(axis.begin(), it));
    i = std::min(i == 0 ? 0 : i - 1, axis.size() - 2);
    return {i, (x - axis[i]) / (axis[i + 1] - axis[i])};
}

}  // namespace

AeroTable::AeroTable(std::vector<double> alpha_rad, std::vector<double> speed_ms, std::vector<double> cl,
                     std::vector<double> cd)
    : alpha_(std::move(alpha_rad)), speed_(std::move(speed_ms)), cl_(std::move(cl)), cd_(std::move(cd)) {
    check_axis(alpha_, "alpha");
    check_axis(speed_, "speed");
    const std::size_t n = alpha_.size() * speed_.size();
    if (cl_.size() != n || cd_.size() != n) throw std::invalid_argument("aero table grid size mismatch");
    for (double c : cd_)
        if (!(c >= 0.0)) throw std::invalid_argument("aero table C_D must be >= 0");
}

AeroTable AeroTable::blended_default(double aspect_ratio, double cl0, double cd0, double stall_deg) {
    constexpr double pi = std::numbers::pi;
    const double slope = 2.0 * pi * aspect_ratio / (aspect_ratio + 2.0);
    const double stall = stall_deg * pi / 180.0;
    const double width = 2.0 * pi / 180.0;
    const double k_induced = 1.0 / (pi * 0.8 * aspect_ratio);

    std::vector<double> alpha;
    for (int d = -180; d <= 180; d += 5) alpha.push_back(d * pi / 180.0);
    std::vector<double> speed{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};

    std::vector<double> cl, cd;
    for (double a : alpha) {
        // Attached flow near 0 deg and (reversed) near +-180 deg.
        const double a_att = std::abs(a) <= pi / 2 ? a : a - std::copysign(pi, a);
        const double sigma = 1.0 / (1.0 + std::exp(-(std::abs(a_att) - stall) / width));
        const double cl_lin = (std::abs(a) <= pi / 2 ? cl0 : 0.0) + slope * a_att;
        const double cl_fp = 2.0 * std::sin(a) * std::cos(a);
        const double cl_v = (1.0 - sigma) * cl_lin + sigma * cl_fp;
        const double cd_v = (1.0 - sigma) * (cd0 + k_induced * cl_lin * cl_lin) +
                            sigma * (2.0 * std::sin(a) * std::sin(a) + cd0);
        for (std::size_t j = 0; j < speed.size(); ++j) {
            cl.push_back(cl_v);
            cd.push_back(cd_v);
        }
    }
    return {alpha, speed, cl, cd};
}

AeroTable AeroTable::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::pair<double, double>, std::pair<double, double>> cells;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("alpha_rad,V_ms,CL,CD", 0) != 0)
                throw std::invalid_argument(fmt::format("aero table line {}: expected header alpha_rad,V_ms,CL,CD", lineno));
            continue;
        }
        double a, v, l, d;
        char c1, c2, c3;
        std::istringstream ls(line);
        if (!(ls >> a >> c1 >> v >> c2 >> l >> c3 >> d) || c1 != ',' || c2 != ',' || c3 != ',')
            throw std::invalid_argument(fmt::format("aero table line {}: expected four numbers", lineno));
        cells[{a, v}] = {l, d};
    }
    std::vector<double> alpha, speed;
    for (const auto& [key, _] : cells) {
        alpha.push_back(key.first);
        speed.push_back(key.second);
    }
    std::sort(alpha.begin(), alpha.end());
    alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
    std::sort(speed.begin(), speed.end());
    speed.erase(std::unique(speed.begin(), speed.end()), speed.end());
    if (cells.size() != alpha.size() * speed.size()) throw std::invalid_argument("aero table is not a rectangular grid");
    std::vector<double> cl, cd;
    for (double a : alpha)
        for (double v : speed) {
            const auto& [l, d] = cells.at({a, v});
            cl.push_back(l);
            cd.push_back(d);
        }
    return {alpha, speed, cl, cd};
}

std::string AeroTable::to_csv() const {
    std::string out = "alpha_rad,V_ms,CL,CD\n";
    for (std::size_t i = 0; i < alpha_.size(); ++i)
        for (std::size_t j = 0; j < speed_.size(); ++j) {
            const std::size_t k = i * speed_.size() + j;
            out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", alpha_[i], speed_[j], cl_[k], cd_[k]);
        }
    return out;
}

AeroCoefficients AeroTable::lookup(double alpha_rad, double speed_ms) const {
    if (alpha_.empty()) throw std::logic_error("empty aero table");
    AeroCoefficients out;
    const auto [i, fa] = bracket(alpha_, alpha_rad, out.clamped);
    const auto [j, fv] = bracket(speed_, speed_ms, out.clamped);
    const std::size_t ns = speed_.size();
    const auto blend = [&](const std::vector<double>& g) {
        const double v00 = g[i * ns + j], v01 = g[i * ns + j + 1];
        const double v10 = g[(i + 1) * ns + j], v11 = g[(i + 1) * ns + j + 1];
        return (1 - fa) * ((1 - fv) * v00 + fv * v01) + fa * ((1 - fv) * v10 + fv * v11);
    };
    out.cl = blend(cl_);
    out.cd = blend(cd_);
    return out;
}

AeroForces aero_forces(double alpha_rad, double speed_ms, const AeroTable& table, double rho, double wing_area) {
    if (!(speed_ms >= 0.0)) throw std::invalid_argument("airspeed must be >= 0");
    const AeroCoefficients c = table.lookup(alpha_rad, speed_ms);
    const double q = 0.5 * rho * speed_ms * speed_ms * wing_area;
    return {q * c.cl, q * c.cd, c.clamped};
}

}  // namespace tailsitter
