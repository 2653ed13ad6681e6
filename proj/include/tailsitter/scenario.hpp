#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailsitter/config.hpp"
#include "tailsitter/logs.hpp"
#include "tailsitter/metrics.hpp"
#include "tailsitter/sysid.hpp"
#include "tailsitter/vehicle.hpp"

namespace tailsitter {

enum class PlantMode { nonlinear, linear_axis };

/// One timed command of a scenario script.
struct ScenarioEvent {
    enum class Kind {
        attitude,    // set the attitude command (Z-X-Y Euler, deg), leaves rate mode
        pitch_ramp,  // linear pitch ramp from the current command to `value` deg over `duration` s
        altitude,    // altitude command, m
        notch,       // switch a configured notch on `axis`
        rate,        // direct body-rate command (attitude loop bypassed), rad/s
        sweep,       // chirp injected on the torque of `axis`
    };
    double t = 0.0;
    Kind kind = Kind::attitude;
    EulerZXY euler_deg;
    double value = 0.0;
    double duration = 0.0;
    int axis = 1;
    bool enabled = true;
    Vec3 rate = Vec3::Zero();
    ChirpConfig chirp;
};

struct Scenario {
    std::string name;
    PlantMode plant = PlantMode::nonlinear;
    double duration = 10.0;
    std::uint64_t seed = 1;
    ControllerConfig controller;
    VehicleConfig vehicle;
    double initial_altitude = 10.0;
    double initial_pitch_deg = 90.0;
    /// Linear-axis mode: identified pitch model and white gyro noise at the control rate.
    PlantFitParams linear_plant = PlantFitParams::reference_defaults();
    double linear_noise_std = 0.0;
    /// Abort (recorded as a metric) once any measured rate exceeds this, rad/s.
    double rate_abort_limit = 50.0;
    std::vector<ScenarioEvent> events;  // sorted by time
    std::vector<ExpectRule> expect;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Relative `controller:` file references resolve against base_dir.
Scenario parse_scenario(const std::string& yaml_text, const std::string& base_dir = ".");
/// A file path, or `builtin:<name>`.
Scenario load_scenario(const std::string& path_or_builtin);

std::vector<std::string> builtin_scenario_names();
/// YAML text of a built-in scenario. Throws ConfigError for an unknown name.
std::string builtin_scenario_text(const std::string& name);

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the scenario seed
    std::string out_dir;                 // empty: write nothing
};

struct ScenarioRun {
    RunReport report;
    std::string telemetry_csv;
    std::string state_csv;  // nonlinear mode only
};

/// Runs the simulation, then computes every metric from the telemetry CSV text alone.
/// Throws NumericalError when the state stops being finite for reasons other than divergence.
ScenarioRun run_scenario(const Scenario& s, const RunOptions& opt = {});

/// Metrics and rule verdicts recomputed from a telemetry log.
RunReport evaluate_log(const Scenario& s, const CsvTable& log);

}  // namespace tailsitter
