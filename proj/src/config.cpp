#include "tailsitter/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "yaml_util.hpp"

namespace tailsitter {

namespace {

const char* kAxisNames[3] = {"roll", "pitch", "yaw"};

void read_rate(const YAML::Node& n, RateLoopConfig& r) {
    yaml::check_keys(n, {"gains", "deriv_corner_hz", "notch", "integrator_limit", "output_limit", "sample_hz",
                         "derivative_on"},
                     "rate");
    if (const YAML::Node g = n["gains"]) {
        yaml::check_keys(g, {"roll", "pitch", "yaw"}, "rate.gains");
        for (int a = 0; a < 3; ++a) {
            const YAML::Node ga = g[kAxisNames[a]];
            if (!ga) continue;
            const std::string where = std::string("rate.gains.") + kAxisNames[a];
            yaml::check_keys(ga, {"kp", "ki", "kd"}, where);
            PidGains& p = r.gains[static_cast<std::size_t>(a)];
            yaml::read(ga, "kp", p.kp, where);
            yaml::read(ga, "ki", p.ki, where);
            yaml::read(ga, "kd", p.kd, where);
        }
    }
    yaml::read(n, "deriv_corner_hz", r.deriv_corner_hz, "rate");
    yaml::read(n, "integrator_limit", r.integrator_limit, "rate");
    yaml::read(n, "output_limit", r.output_limit, "rate");
    yaml::read(n, "sample_hz", r.sample_hz, "rate");
    if (const YAML::Node d = n["derivative_on"]) {
        const auto s = yaml::scalar<std::string>(d, "rate.derivative_on");
        if (s == "error")
            r.derivative_on = DerivativeOn::error;
        else if (s == "measurement")
            r.derivative_on = DerivativeOn::measurement;
        else
            yaml::fail(d, "rate.derivative_on must be error or measurement");
    }
    if (const YAML::Node nn = n["notch"]) {
        yaml::check_keys(nn, {"roll", "pitch", "yaw"}, "rate.notch");
        for (int a = 0; a < 3; ++a) {
            const YAML::Node na = nn[kAxisNames[a]];
            if (!na) continue;
            auto& slot = r.notch[static_cast<std::size_t>(a)];
            if (na.IsNull() || (na.IsScalar() && (na.Scalar() == "none" || na.Scalar() == "false"))) {
                slot.reset();
                continue;
            }
            const std::string where = std::string("rate.notch.") + kAxisNames[a];
            yaml::check_keys(na, {"center_hz", "k1", "k2"}, where);
            NotchParams p = slot.value_or(NotchParams{});
            yaml::read(na, "center_hz", p.center_hz, where);
            yaml::read(na, "k1", p.k1, where);
            yaml::read(na, "k2", p.k2, where);
            slot = p;
        }
    }
}

void read_attitude(const YAML::Node& n, AttitudeLoopConfig& c) {
    yaml::check_keys(n, {"gain"}, "attitude");
    if (const YAML::Node g = n["gain"]) {
        const auto v = yaml::triple(g, "attitude.gain");
        c.gain = Vec3(v[0], v[1], v[2]);
    }
}

void read_altitude(const YAML::Node& n, AltitudeLoopConfig& c) {
    yaml::check_keys(n, {"k_alt", "k_ff", "kp_z", "ki_z", "vz_limit", "integrator_limit", "min_vertical_authority"},
                     "altitude");
    yaml::read(n, "k_alt", c.k_alt, "altitude");
    yaml::read(n, "k_ff", c.k_ff, "altitude");
    yaml::read(n, "kp_z", c.kp_z, "altitude");
    yaml::read(n, "ki_z", c.ki_z, "altitude");
    yaml::read(n, "vz_limit", c.vz_limit, "altitude");
    yaml::read(n, "integrator_limit", c.integrator_limit, "altitude");
    yaml::read(n, "min_vertical_authority", c.min_vertical_authority, "altitude");
}

void read_mode(const YAML::Node& n, ModeParams& m, const std::string& where) {
    yaml::check_keys(n, {"freq_hz", "num_damping", "den_damping"}, where);
    yaml::read(n, "freq_hz", m.freq_hz, where);
    yaml::read(n, "num_damping", m.num_damping, where);
    yaml::read(n, "den_damping", m.den_damping, where);
}

void read_plant(const YAML::Node& n, PlantFitParams& p) {
    yaml::check_keys(n, {"lf_corner_hz", "lf_damping", "dy_num", "dy_pole", "peak", "offpeak", "delay"}, "plant");
    yaml::read(n, "lf_corner_hz", p.lf_corner_hz, "plant");
    yaml::read(n, "lf_damping", p.lf_damping, "plant");
    if (const YAML::Node d = n["dy_num"]) p.dy_num = yaml::triple(d, "plant.dy_num");
    yaml::read(n, "dy_pole", p.dy_pole, "plant");
    if (const YAML::Node m = n["peak"]) read_mode(m, p.peak, "plant.peak");
    if (const YAML::Node m = n["offpeak"]) read_mode(m, p.offpeak, "plant.offpeak");
    yaml::read(n, "delay", p.delay, "plant");
}

template <typename F>
void checked(const YAML::Node& n, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), yaml::line_of(n));
    }
}

}  // namespace

void ControllerConfig::validate() const {
    rate.validate();
    attitude.validate();
    altitude.validate();
}

ControllerConfig read_controller_node(const YAML::Node& root, const ControllerConfig& base) {
    ControllerConfig c = base;
    if (!root || root.IsNull()) return c;
    yaml::check_keys(root, {"rate", "attitude", "altitude"}, "controller");
    if (const YAML::Node n = root["rate"]) read_rate(n, c.rate);
    if (const YAML::Node n = root["attitude"]) read_attitude(n, c.attitude);
    if (const YAML::Node n = root["altitude"]) read_altitude(n, c.altitude);
    checked(root, [&] { c.validate(); });
    return c;
}

PlantFitParams read_plant_node(const YAML::Node& root, const PlantFitParams& base) {
    PlantFitParams p = base;
    if (!root || root.IsNull()) return p;
    read_plant(root, p);
    checked(root, [&] { p.validate(); });
    return p;
}

ControllerConfig parse_controller_config(const std::string& yaml_text, const ControllerConfig& base) {
    return read_controller_node(yaml::parse(yaml_text, "controller config"), base);
}

PlantFitParams parse_plant_params(const std::string& yaml_text, const PlantFitParams& base) {
    return read_plant_node(yaml::parse(yaml_text, "plant config"), base);
}

ContinuousTF TfConfig::build() const {
    switch (kind) {
        case Kind::plant:
            return fitted_plant(plant);
        case Kind::controller: {
            RateController c(rate);
            if (c.has_notch(axis)) c.set_notch_enabled(axis, notch);
            return c.design_tf(axis);
        }
        case Kind::loop: {
            RateController c(rate);
            if (c.has_notch(axis)) c.set_notch_enabled(axis, notch);
            return tf_series(fitted_plant(plant), c.design_tf(axis));
        }
        case Kind::rational:
            return rational;
    }
    return rational;
}

TfConfig parse_tf_config(const std::string& yaml_text) {
    const YAML::Node root = yaml::parse(yaml_text, "tf config");
    TfConfig c;
    if (!root || root.IsNull()) return c;
    yaml::check_keys(root, {"kind", "plant", "controller", "axis", "notch", "num", "den", "delay", "band"}, "tf");
    if (const YAML::Node k = root["kind"]) {
        const auto s = yaml::scalar<std::string>(k, "tf.kind");
        if (s == "plant")
            c.kind = TfConfig::Kind::plant;
        else if (s == "controller")
            c.kind = TfConfig::Kind::controller;
        else if (s == "loop")
            c.kind = TfConfig::Kind::loop;
        else if (s == "rational")
            c.kind = TfConfig::Kind::rational;
        else
            yaml::fail(k, "tf.kind must be plant, controller, loop or rational");
    }
    if (const YAML::Node p = root["plant"]) c.plant = read_plant_node(p, c.plant);
    if (const YAML::Node r = root["controller"]) {
        ControllerConfig cc;
        cc.rate = c.rate;
        c.rate = read_controller_node(r, cc).rate;
    }
    if (const YAML::Node a = root["axis"]) c.axis = yaml::axis(a, "tf.axis");
    yaml::read(root, "notch", c.notch, "tf");
    if (c.kind == TfConfig::Kind::rational) {
        if (!root["num"] || !root["den"]) yaml::fail(root, "tf: kind rational needs num and den (ascending in s)");
        double delay = 0.0;
        yaml::read(root, "delay", delay, "tf");
        checked(root, [&] {
            c.rational = ContinuousTF(yaml::numbers(root["num"], "tf.num"), yaml::numbers(root["den"], "tf.den"), delay);
        });
    } else if (root["num"] || root["den"]) {
        yaml::fail(root, "tf: num/den are only used with kind rational");
    }
    if (const YAML::Node b = root["band"]) {
        const auto v = yaml::numbers(b, "tf.band");
        if (v.size() != 2 || !(v[0] > 0.0 && v[1] > v[0])) yaml::fail(b, "tf.band must be [f_lo, f_hi] with 0 < f_lo < f_hi");
        c.f_lo_hz = v[0];
        c.f_hi_hz = v[1];
    }
    return c;
}

std::string reference_config_yaml() {
    const ControllerConfig c;
    const PlantFitParams p = PlantFitParams::reference_defaults();
    std::string out = "# Controller defaults\nrate:\n  gains:\n";
    for (int a = 0; a < 3; ++a) {
        const PidGains& g = c.rate.gains[static_cast<std::size_t>(a)];
        out += fmt::format("    {}: {{kp: {}, ki: {}, kd: {}}}\n", kAxisNames[a], g.kp, g.ki, g.kd);
    }
    out += fmt::format("  deriv_corner_hz: {}\n  notch:\n", c.rate.deriv_corner_hz);
    for (int a = 0; a < 3; ++a) {
        const auto& n = c.rate.notch[static_cast<std::size_t>(a)];
        if (n)
            out += fmt::format("    {}: {{center_hz: {}, k1: {}, k2: {}}}\n", kAxisNames[a], n->center_hz, n->k1, n->k2);
        else
            out += fmt::format("    {}: none\n", kAxisNames[a]);
    }
    out += fmt::format("  integrator_limit: {}\n  output_limit: {}\n  sample_hz: {}\n  derivative_on: {}\n",
                       c.rate.integrator_limit, c.rate.output_limit, c.rate.sample_hz,
                       c.rate.derivative_on == DerivativeOn::error ? "error" : "measurement");
    out += fmt::format("attitude:\n  gain: [{}, {}, {}]\n", c.attitude.gain.x(), c.attitude.gain.y(), c.attitude.gain.z());
    const AltitudeLoopConfig& h = c.altitude;
    out += fmt::format(
        "altitude:\n  k_alt: {}\n  k_ff: {}\n  kp_z: {}\n  ki_z: {}\n  vz_limit: {}\n  integrator_limit: {}\n"
        "  min_vertical_authority: {}\n",
        h.k_alt, h.k_ff, h.kp_z, h.ki_z, h.vz_limit, h.integrator_limit, h.min_vertical_authority);
    out += "# Identified pitch plant (usable as the `plant` section of a tf or pipeline config)\n";
    out += fmt::format("# plant:\n#   lf_corner_hz: {:.17g}\n#   lf_damping: {:.17g}\n#   dy_num: [{}, {}, {}]\n"
                       "#   dy_pole: {}\n",
                       p.lf_corner_hz, p.lf_damping, p.dy_num[0], p.dy_num[1], p.dy_num[2], p.dy_pole);
    const auto mode = [](const char* name, const ModeParams& m) {
        return fmt::format("#   {}: {{freq_hz: {:.17g}, num_damping: {:.17g}, den_damping: {:.17g}}}\n", name, m.freq_hz,
                           m.num_damping, m.den_damping);
    };
    out += mode("peak", p.peak) + mode("offpeak", p.offpeak);
    out += fmt::format("#   delay: {}\n", p.delay);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tailsitter
