#include "tailsitter/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

#include "tailsitter/axis_plant.hpp"
#include "tailsitter/spectrum.hpp"
#include "yaml_util.hpp"

namespace tailsitter {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::map<std::string, std::string>& builtins() {
    static const std::map<std::string, std::string> m{
        {"hover_notch_ab", R"(# Hover with the pitch notch switched off, then back on mid-run.
name: hover_notch_ab
plant: nonlinear
duration: 16
seed: 1
vehicle:
  flex_modes: [false, true, false]
  gyro_noise_std: 0.005
initial: {altitude: 10, pitch_deg: 90}
events:
  - {t: 0, notch: {axis: pitch, enabled: false}}
  - {t: 10, notch: {axis: pitch, enabled: true}}
expect:
  diverged_before_notch: {min: 1}
  oscillation_hz: {min: 13, max: 15}
  convergence_time_s: {max: 3}
)"},
        {"rate_step", R"(# Pitch-rate square wave flown in rate mode at hover.
name: rate_step
plant: nonlinear
duration: 12
seed: 2
vehicle:
  flex_modes: [false, true, false]
  gyro_noise_std: 0.005
initial: {altitude: 10, pitch_deg: 90}
events:
  - {t: 1, rate: [0, 0.5, 0]}
  - {t: 3, rate: [0, -0.5, 0]}
  - {t: 5, rate: [0, 0.5, 0]}
  - {t: 7, rate: [0, -0.5, 0]}
  - {t: 9, rate: [0, 0, 0]}
  - {t: 11, attitude_deg: [0, 90, 0]}
expect:
  rate_overshoot_pct: {max: 5}
)"},
        {"transition", R"(# Hover, linear pitch ramp to 85 deg, forward flight, step back to hover.
name: transition
plant: nonlinear
duration: 30
seed: 3
vehicle:
  flex_modes: [false, true, false]
  gyro_noise_std: 0.005
initial: {altitude: 10, pitch_deg: 90}
events:
  - {t: 0, altitude: 10}
  - {t: 5, pitch_ramp: {to_deg: 85, duration: 5}}
  - {t: 20, attitude_deg: [0, 90, 0]}
expect:
  max_abs_altitude_error_m: {max: 2}
  pitch_step_overshoot_pct: {max: 5}
  pitch_step_r2: {min: 0.95}
)"},
    };
    return m;
}

void read_vehicle(const YAML::Node& n, Scenario& s) {
    yaml::check_keys(n, {"flex_modes", "actuator_delay", "gyro_noise_std", "altitude_noise_std", "vz_noise_std",
                         "vibration_amplitude", "aero_table", "axis_gain_ratio"},
                     "vehicle");
    VehicleConfig& v = s.vehicle;
    if (const YAML::Node f = n["flex_modes"]) {
        if (!f.IsSequence() || f.size() != 3) yaml::fail(f, "vehicle.flex_modes: expected 3 booleans");
        for (std::size_t a = 0; a < 3; ++a) v.actuator.flex_modes[a] = yaml::scalar<bool>(f[a], "vehicle.flex_modes");
    }
    yaml::read(n, "actuator_delay", v.actuator.delay_enabled, "vehicle");
    yaml::read(n, "gyro_noise_std", v.sensor.gyro_noise_std, "vehicle");
    yaml::read(n, "altitude_noise_std", v.sensor.altitude_noise_std, "vehicle");
    yaml::read(n, "vz_noise_std", v.sensor.vz_noise_std, "vehicle");
    yaml::read(n, "vibration_amplitude", v.vibration.amplitude, "vehicle");
    if (const YAML::Node r = n["axis_gain_ratio"]) {
        const auto g = yaml::triple(r, "vehicle.axis_gain_ratio");
        v.actuator.axis_gain_ratio = Vec3(g[0], g[1], g[2]);
    }
    if (const YAML::Node t = n["aero_table"]) {
        const auto path = yaml::scalar<std::string>(t, "vehicle.aero_table");
        try {
            v.table = AeroTable::from_csv(read_text_file(path));
        } catch (const std::invalid_argument& e) {
            yaml::fail(t, path + ": " + e.what());
        }
    }
}

ScenarioEvent read_event(const YAML::Node& n) {
    yaml::check_keys(n, {"t", "attitude_deg", "pitch_ramp", "altitude", "notch", "rate", "sweep"}, "event");
    ScenarioEvent e;
    if (!n["t"]) yaml::fail(n, "event: missing t");
    e.t = yaml::scalar<double>(n["t"], "event.t");
    int kinds = 0;
    if (const YAML::Node a = n["attitude_deg"]) {
        ++kinds;
        e.kind = ScenarioEvent::Kind::attitude;
        const auto v = yaml::triple(a, "event.attitude_deg");
        e.euler_deg = {v[0], v[1], v[2]};
    }
    if (const YAML::Node r = n["pitch_ramp"]) {
        ++kinds;
        e.kind = ScenarioEvent::Kind::pitch_ramp;
        yaml::check_keys(r, {"to_deg", "duration"}, "event.pitch_ramp");
        if (!r["to_deg"] || !r["duration"]) yaml::fail(r, "event.pitch_ramp needs to_deg and duration");
        e.value = yaml::scalar<double>(r["to_deg"], "event.pitch_ramp.to_deg");
        e.duration = yaml::scalar<double>(r["duration"], "event.pitch_ramp.duration");
        if (!(e.duration > 0.0)) yaml::fail(r, "event.pitch_ramp.duration must be > 0");
    }
    if (const YAML::Node h = n["altitude"]) {
        ++kinds;
        e.kind = ScenarioEvent::Kind::altitude;
        e.value = yaml::scalar<double>(h, "event.altitude");
    }
    if (const YAML::Node c = n["notch"]) {
        ++kinds;
        e.kind = ScenarioEvent::Kind::notch;
        yaml::check_keys(c, {"axis", "enabled"}, "event.notch");
        if (c["axis"]) e.axis = yaml::axis(c["axis"], "event.notch.axis");
        if (!c["enabled"]) yaml::fail(c, "event.notch needs enabled");
        e.enabled = yaml::scalar<bool>(c["enabled"], "event.notch.enabled");
    }
    if (const YAML::Node r = n["rate"]) {
        ++kinds;
        e.kind = ScenarioEvent::Kind::rate;
        const auto v = yaml::triple(r, "event.rate");
        e.rate = Vec3(v[0], v[1], v[2]);
    }
    if (const YAML::Node w = n["sweep"]) {
        ++kinds;
        e.kind = ScenarioEvent::Kind::sweep;
        yaml::check_keys(w, {"axis", "f0", "f1", "duration", "amplitude"}, "event.sweep");
        if (w["axis"]) e.axis = yaml::axis(w["axis"], "event.sweep.axis");
        yaml::read(w, "f0", e.chirp.f0, "event.sweep");
        yaml::read(w, "f1", e.chirp.f1, "event.sweep");
        yaml::read(w, "duration", e.chirp.duration, "event.sweep");
        yaml::read(w, "amplitude", e.chirp.amplitude, "event.sweep");
        try {
            e.chirp.validate();
        } catch (const std::invalid_argument& ex) {
            yaml::fail(w, ex.what());
        }
    }
    if (kinds != 1) yaml::fail(n, "event: exactly one command per event");
    return e;
}

UnitQuaternion euler_deg_quat(const EulerZXY& d) {
    return euler_zxy_to_quat({d.roll * kDeg, d.pitch * kDeg, d.yaw * kDeg});
}

double pitch_deg_of(double eta, double x, double y, double z) {
    return quat_to_euler_zxy(UnitQuaternion(eta, x, y, z)).angles.pitch / kDeg;
}

}  // namespace

void Scenario::validate() const {
    if (!(duration > 0.0)) throw ConfigError("scenario duration must be > 0");
    if (!(rate_abort_limit > 0.0)) throw ConfigError("rate_abort_limit must be > 0");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].t < events[i - 1].t) throw ConfigError("scenario events must be time-ordered");
    for (const auto& e : events) {
        if (e.t < 0.0 || e.t > duration) throw ConfigError(fmt::format("event at t = {} lies outside the run", e.t));
        if (e.kind == ScenarioEvent::Kind::notch && !controller.rate.notch[static_cast<std::size_t>(e.axis)])
            throw ConfigError(fmt::format("notch event at t = {} on an axis without a configured notch", e.t));
        if (plant == PlantMode::linear_axis && e.axis != 1 &&
            (e.kind == ScenarioEvent::Kind::sweep || e.kind == ScenarioEvent::Kind::notch))
            throw ConfigError("linear-axis scenarios model the pitch axis only");
    }
}

Scenario parse_scenario(const std::string& yaml_text, const std::string& base_dir) {
    const YAML::Node root = yaml::parse(yaml_text, "scenario");
    yaml::check_keys(root, {"name", "plant", "duration", "seed", "controller", "vehicle", "initial", "linear",
                            "rate_abort_limit", "events", "expect"},
                     "scenario");
    Scenario s;
    if (!root["name"]) yaml::fail(root, "scenario: missing name");
    s.name = yaml::scalar<std::string>(root["name"], "scenario.name");
    if (const YAML::Node p = root["plant"]) {
        const auto m = yaml::scalar<std::string>(p, "scenario.plant");
        if (m == "nonlinear")
            s.plant = PlantMode::nonlinear;
        else if (m == "linear_axis" || m == "linear-axis")
            s.plant = PlantMode::linear_axis;
        else
            yaml::fail(p, "scenario.plant must be nonlinear or linear_axis");
    }
    yaml::read(root, "duration", s.duration, "scenario");
    yaml::read(root, "seed", s.seed, "scenario");
    yaml::read(root, "rate_abort_limit", s.rate_abort_limit, "scenario");
    if (const YAML::Node c = root["controller"]) {
        if (c.IsScalar()) {
            std::filesystem::path path(c.Scalar());
            if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
            s.controller = parse_controller_config(read_text_file(path.string()));
        } else {
            s.controller = read_controller_node(c, s.controller);
        }
    }
    if (const YAML::Node v = root["vehicle"]) read_vehicle(v, s);
    if (const YAML::Node i = root["initial"]) {
        yaml::check_keys(i, {"altitude", "pitch_deg"}, "initial");
        yaml::read(i, "altitude", s.initial_altitude, "initial");
        yaml::read(i, "pitch_deg", s.initial_pitch_deg, "initial");
    }
    if (const YAML::Node l = root["linear"]) {
        yaml::check_keys(l, {"noise_std", "plant"}, "linear");
        yaml::read(l, "noise_std", s.linear_noise_std, "linear");
        if (const YAML::Node p = l["plant"]) s.linear_plant = read_plant_node(p, s.linear_plant);
    }
    if (const YAML::Node ev = root["events"]) {
        if (!ev.IsSequence()) yaml::fail(ev, "scenario.events: expected a list");
        for (const auto& e : ev) {
            s.events.push_back(read_event(e));
            if (s.events.size() > 1 && s.events.back().t < s.events[s.events.size() - 2].t)
                yaml::fail(e, "scenario.events must be time-ordered");
        }
    }
    if (const YAML::Node ex = root["expect"]) {
        if (!ex.IsMap()) yaml::fail(ex, "scenario.expect: expected a mapping of metric: {min, max}");
        for (const auto& kv : ex) {
            ExpectRule r;
            r.metric = kv.first.as<std::string>();
            yaml::check_keys(kv.second, {"min", "max"}, "expect." + r.metric);
            if (kv.second["min"]) r.min = yaml::scalar<double>(kv.second["min"], "expect.min");
            if (kv.second["max"]) r.max = yaml::scalar<double>(kv.second["max"], "expect.max");
            s.expect.push_back(r);
        }
    }
    try {
        s.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), yaml::line_of(root));
    }
    return s;
}

Scenario load_scenario(const std::string& path_or_builtin) {
    const std::string prefix = "builtin:";
    if (path_or_builtin.rfind(prefix, 0) == 0) return parse_scenario(builtin_scenario_text(path_or_builtin.substr(prefix.size())));
    const std::filesystem::path p(path_or_builtin);
    return parse_scenario(read_text_file(path_or_builtin), p.parent_path().empty() ? "." : p.parent_path().string());
}

std::vector<std::string> builtin_scenario_names() {
    std::vector<std::string> out;
    for (const auto& [k, _] : builtins()) out.push_back(k);
    return out;
}

std::string builtin_scenario_text(const std::string& name) {
    const auto it = builtins().find(name);
    if (it == builtins().end()) throw ConfigError("unknown built-in scenario '" + name + "'");
    return it->second;
}

ScenarioRun run_scenario(const Scenario& s, const RunOptions& opt) {
    s.validate();
    const std::uint64_t seed = opt.seed.value_or(s.seed);
    const double fs = s.controller.rate.sample_hz;
    const double dt = 1.0 / fs;
    const auto ticks = static_cast<std::size_t>(std::llround(s.duration * fs));

    RateController rate(s.controller.rate);
    AltitudeController altitude(s.controller.altitude, fs);

    EulerZXY cmd_deg{0.0, s.initial_pitch_deg, 0.0};
    const UnitQuaternion q0 = euler_deg_quat(cmd_deg);
    double alt_cmd = s.initial_altitude;

    std::optional<Vehicle> vehicle;
    std::optional<LinearAxisPlant> axis_plant;
    double lin_pitch = s.initial_pitch_deg * kDeg;
    if (s.plant == PlantMode::nonlinear) {
        VehicleConfig vc = s.vehicle;
        vc.control_hz = fs;
        RigidBodyState init;
        init.p = Vec3(0.0, 0.0, -s.initial_altitude);
        init.q = q0;
        vehicle.emplace(vc, init, seed);
        vehicle->prime(Vec3::Zero());
    } else {
        axis_plant.emplace(fitted_plant(s.linear_plant), fs, s.linear_noise_std, seed);
    }

    bool rate_mode = false;
    Vec3 rate_cmd = Vec3::Zero();
    struct Ramp {
        double t0, duration, from, to;
    };
    std::optional<Ramp> ramp;
    struct Injection {
        double t0;
        int axis;
        TimeSeries u;
    };
    std::vector<Injection> sweeps;
    std::size_t next_event = 0;

    TelemetryLog log;
    StateLog state_log;
    RunReport report;
    report.name = s.name;
    std::optional<double> abort_t;

    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * dt;
        while (next_event < s.events.size() && s.events[next_event].t <= t + 1e-9) {
            const ScenarioEvent& e = s.events[next_event++];
            switch (e.kind) {
                case ScenarioEvent::Kind::attitude:
                    cmd_deg = e.euler_deg;
                    ramp.reset();
                    rate_mode = false;
                    break;
                case ScenarioEvent::Kind::pitch_ramp:
                    ramp = Ramp{e.t, e.duration, cmd_deg.pitch, e.value};
                    rate_mode = false;
                    break;
                case ScenarioEvent::Kind::altitude:
                    alt_cmd = e.value;
                    break;
                case ScenarioEvent::Kind::notch:
                    rate.set_notch_enabled(e.axis, e.enabled);
                    break;
                case ScenarioEvent::Kind::rate:
                    rate_mode = true;
                    rate_cmd = e.rate;
                    break;
                case ScenarioEvent::Kind::sweep: {
                    ChirpConfig c = e.chirp;
                    c.sample_hz = fs;
                    sweeps.push_back({e.t, e.axis, chirp(c)});
                    break;
                }
            }
        }
        if (ramp) {
            const double frac = std::clamp((t - ramp->t0) / ramp->duration, 0.0, 1.0);
            cmd_deg.pitch = ramp->from + frac * (ramp->to - ramp->from);
            if (frac >= 1.0) ramp.reset();
        }
        const UnitQuaternion q_cmd = euler_deg_quat(cmd_deg);

        Vec3 w_meas;
        UnitQuaternion q_meas;
        double alt_meas = alt_cmd, vz_meas = 0.0;
        if (vehicle) {
            const SensorSample& smp = vehicle->last_sample();
            w_meas = smp.omega_meas;
            q_meas = vehicle->state().q;
            alt_meas = smp.altitude_meas;
            vz_meas = smp.vz_meas;
        } else {
            w_meas = Vec3(0.0, axis_plant->measured(), 0.0);
            q_meas = euler_zxy_to_quat({0.0, lin_pitch, 0.0});
        }
        if (!w_meas.allFinite() || w_meas.cwiseAbs().maxCoeff() > s.rate_abort_limit) {
            abort_t = t;
            break;
        }

        std::uint32_t flags = 0;
        Vec3 w_cmd = rate_mode ? rate_cmd : attitude_controller_step(q_meas, q_cmd, s.controller.attitude);
        if (axis_plant) w_cmd.x() = w_cmd.z() = 0.0;
        const RateOutput ro = rate.step(w_meas, w_cmd);
        Vec3 torque = ro.torque;
        for (const auto& inj : sweeps) {
            const double rel = t - inj.t0;
            if (rel < -1e-9) continue;
            const auto i = static_cast<std::size_t>(std::llround(rel * fs));
            if (i < inj.u.values.size()) {
                torque[inj.axis] += inj.u.values[i];
                flags |= kFlagSweep;
            }
        }
        if (ro.clamped[0] || ro.clamped[1] || ro.clamped[2]) flags |= kFlagRateClamped;
        if (rate.has_notch(1) && rate.notch_enabled(1)) flags |= kFlagPitchNotch;
        if (rate_mode) flags |= kFlagRateMode;

        double thrust = s.vehicle.aircraft.hover_command;
        if (vehicle) {
            const Wrench& w = vehicle->wrench();
            const AltitudeOutput ao = altitude.step(alt_meas, alt_cmd, vz_meas, q_meas, w.airspeed, w.alpha,
                                                    s.vehicle.aircraft, s.vehicle.table);
            thrust = ao.thrust_cmd;
            if (ao.clamped) flags |= kFlagThrustClamped;
            if (ao.ff.no_vertical_authority) flags |= kFlagNoVerticalAuthority;
        }

        TelemetryRow row;
        row.t = t;
        row.q_cmd = q_cmd;
        row.q_meas = q_meas;
        row.w_cmd = w_cmd;
        row.w_meas = w_meas;
        row.torque_cmd = torque;
        row.thrust_cmd = thrust;
        row.alt_cmd = alt_cmd;
        row.alt_meas = alt_meas;
        row.vz_meas = vz_meas;

        if (vehicle) {
            vehicle->step(torque, thrust);
            if (vehicle->saturated()) flags |= kFlagMotorSaturated;
            if (vehicle->aero_clamped()) flags |= kFlagAeroClamped;
            state_log.append(vehicle->time(), vehicle->state(), vehicle->motors(), vehicle->saturated());
        } else {
            lin_pitch += dt * axis_plant->true_output();
            axis_plant->apply(torque.y());
        }
        row.flags = flags;
        log.append(row);
    }

    ScenarioRun run;
    run.telemetry_csv = log.to_csv();
    if (vehicle) run.state_csv = state_log.to_csv();
    run.report = evaluate_log(s, CsvTable::parse(run.telemetry_csv));
    run.report.set("seed", static_cast<double>(seed));
    run.report.set("aborted", abort_t ? 1.0 : 0.0);
    if (abort_t) {
        run.report.set("abort_time_s", *abort_t);
        run.report.notes.push_back(
            fmt::format("run stopped at t = {:.3f} s: measured rate left the +-{} rad/s envelope", *abort_t, s.rate_abort_limit));
    }
    run.report.evaluate(s.expect);
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        const std::string log_path = (std::filesystem::path(opt.out_dir) / (s.name + "_telemetry.csv")).string();
        const std::string rep_path = (std::filesystem::path(opt.out_dir) / (s.name + "_report.txt")).string();
        write_text_file(log_path, run.telemetry_csv);
        run.report.artifacts = {log_path, rep_path};
        if (!run.state_csv.empty()) {
            const std::string state_path = (std::filesystem::path(opt.out_dir) / (s.name + "_state.csv")).string();
            write_text_file(state_path, run.state_csv);
            run.report.artifacts.push_back(state_path);
        }
        write_text_file(rep_path, run.report.to_text());
    }
    return run;
}

RunReport evaluate_log(const Scenario& s, const CsvTable& log) {
    RunReport r;
    r.name = s.name;
    const double fs = s.controller.rate.sample_hz;
    const auto& t = log.column("t");
    const std::size_t n = log.rows();
    r.set("duration_s", n ? t.back() + 1.0 / fs : 0.0);
    if (n < 2) {
        r.evaluate(s.expect);
        return r;
    }
    const auto index_at = [&](double time) {
        return static_cast<std::size_t>(std::min<double>(static_cast<double>(n), std::max(0.0, std::round(time * fs))));
    };
    const std::vector<double>& wy = log.column("w_meas_y");
    std::vector<double> pitch(n);
    {
        const auto& e = log.column("q_meas_eta");
        const auto& x = log.column("q_meas_x");
        const auto& y = log.column("q_meas_y");
        const auto& z = log.column("q_meas_z");
        for (std::size_t i = 0; i < n; ++i) pitch[i] = pitch_deg_of(e[i], x[i], y[i], z[i]);
    }
    double max_rate = 0.0;
    for (const char* c : {"w_meas_x", "w_meas_y", "w_meas_z"})
        for (double v : log.column(c)) max_rate = std::max(max_rate, std::abs(v));
    r.set("max_abs_rate_rad_s", max_rate);

    if (s.plant == PlantMode::nonlinear) {
        const auto& ac = log.column("alt_cmd");
        const auto& am = log.column("alt_meas");
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(ac[i] - am[i]));
        r.set("max_abs_altitude_error_m", m);
    }
    {
        const auto& fl = log.column("flags");
        std::size_t sat = 0;
        for (double f : fl)
            if (static_cast<std::uint32_t>(f) & kFlagMotorSaturated) ++sat;
        r.set("motor_saturated_fraction", static_cast<double>(sat) / static_cast<double>(n));
    }

    // Notch A/B: the first time the pitch notch goes off, and the next time it comes back on.
    std::optional<double> off_t, on_t;
    for (const auto& e : s.events) {
        if (e.kind != ScenarioEvent::Kind::notch || e.axis != 1) continue;
        if (!e.enabled && !off_t) off_t = e.t;
        if (e.enabled && off_t && !on_t) on_t = e.t;
    }
    if (off_t) {
        const std::size_t i0 = index_at(*off_t);
        const std::size_t i1 = on_t ? index_at(*on_t) : n;
        const std::span<const double> before(wy.data() + i0, i1 - i0);
        const DivergenceScan scan = divergence_scan(before, fs);
        r.set("divergence_growth_max_per_s", scan.max_rate);
        r.set("diverged_before_notch", scan.diverged() ? 1.0 : 0.0);
        if (scan.first_flagged_t) r.set("divergence_detected_t_s", *off_t + *scan.first_flagged_t);
        const std::size_t tail = std::min(before.size(), static_cast<std::size_t>(4.0 * fs));
        if (tail >= 64)
            r.set("oscillation_hz", dominant_frequency(before.subspan(before.size() - tail), fs, 2.0, 0.45 * fs));
        if (on_t && i1 < n) {
            const std::span<const double> all(wy.data() + i0, n - i0);
            const auto conv = convergence_time(all, fs, *on_t - *off_t);
            r.set("convergence_time_s", conv ? *conv : std::numeric_limits<double>::infinity());
            const std::span<const double> after(wy.data() + i1, n - i1);
            if (after.size() > static_cast<std::size_t>(2.5 * fs))
                r.set("growth_after_notch_per_s", divergence_scan(after, fs).max_rate);
        }
    }

    // Rate steps: each rate command change is one step, analysed until the next event.
    {
        double worst = 0.0;
        double rise = 0.0;
        int steps = 0;
        Vec3 prev = Vec3::Zero();
        for (std::size_t k = 0; k < s.events.size(); ++k) {
            const ScenarioEvent& e = s.events[k];
            if (e.kind != ScenarioEvent::Kind::rate) continue;
            const double end_t = k + 1 < s.events.size() ? s.events[k + 1].t : s.duration;
            const std::size_t i0 = index_at(e.t), i1 = index_at(end_t);
            const double change = e.rate.y() - prev.y();
            prev = e.rate;
            if (std::abs(change) < 1e-9 || i1 <= i0 + 8) continue;
            // Overshoot relative to the commanded level, not the settled value.
            double excess = 0.0;
            const double dir = change > 0.0 ? 1.0 : -1.0;
            for (std::size_t i = i0; i < i1; ++i) excess = std::max(excess, dir * (wy[i] - e.rate.y()));
            worst = std::max(worst, 100.0 * excess / std::abs(change));
            const StepMetrics m = step_metrics(std::span<const double>(wy.data() + i0, i1 - i0), fs);
            if (std::isfinite(m.rise_time_s)) rise = std::max(rise, m.rise_time_s);
            ++steps;
        }
        if (steps) {
            r.set("rate_steps", steps);
            r.set("rate_overshoot_pct", worst);
            r.set("rate_rise_time_s", rise);
        }
    }

    // Pitch step: the last instantaneous attitude command that changes pitch.
    {
        double prev_pitch = s.initial_pitch_deg;
        std::optional<std::size_t> step_k;
        for (std::size_t k = 0; k < s.events.size(); ++k) {
            const ScenarioEvent& e = s.events[k];
            if (e.kind == ScenarioEvent::Kind::pitch_ramp) prev_pitch = e.value;
            if (e.kind != ScenarioEvent::Kind::attitude) continue;
            if (std::abs(e.euler_deg.pitch - prev_pitch) > 1e-6) step_k = k;
            prev_pitch = e.euler_deg.pitch;
        }
        if (step_k) {
            const ScenarioEvent& e = s.events[*step_k];
            const double end_t = *step_k + 1 < s.events.size() ? s.events[*step_k + 1].t : s.duration;
            const std::size_t i0 = index_at(e.t), i1 = index_at(end_t);
            if (i1 > i0 + 8) {
                const StepMetrics m = step_metrics(std::span<const double>(pitch.data() + i0, i1 - i0), fs);
                r.set("pitch_step_from_deg", m.initial);
                r.set("pitch_step_final_deg", m.final_value);
                r.set("pitch_step_overshoot_pct", m.overshoot_pct);
                r.set("pitch_step_r2", m.r2);
                r.set("pitch_step_tau_s", m.tau_s);
                r.set("pitch_step_dead_time_s", m.dead_time_s);
            }
        }
        double min_pitch = 1e9;
        for (double p : pitch) min_pitch = std::min(min_pitch, p);
        r.set("min_pitch_deg", min_pitch);
    }
    r.evaluate(s.expect);
    return r;
}

}  // namespace tailsitter
