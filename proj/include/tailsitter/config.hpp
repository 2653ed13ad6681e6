#pragma once

#include <stdexcept>
#include <string>

#include "tailsitter/control.hpp"
#include "tailsitter/lti.hpp"

namespace tailsitter {

/// Bad configuration text; line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct ControllerConfig {
    RateLoopConfig rate;
    AttitudeLoopConfig attitude;
    AltitudeLoopConfig altitude;

    void validate() const;
};

/// YAML with optional sections `rate`, `attitude`, `altitude`; omitted keys keep their defaults.
ControllerConfig parse_controller_config(const std::string& yaml_text, const ControllerConfig& base = {});
PlantFitParams parse_plant_params(const std::string& yaml_text,
                                  const PlantFitParams& base = PlantFitParams::reference_defaults());

/// A transfer function to analyse: the plant, the rate controller of one axis, their loop, or
/// an explicit rational function.
struct TfConfig {
    enum class Kind { plant, controller, loop, rational };
    Kind kind = Kind::loop;
    PlantFitParams plant = PlantFitParams::reference_defaults();
    RateLoopConfig rate;
    int axis = 1;
    bool notch = true;
    ContinuousTF rational;
    double f_lo_hz = 0.1;
    double f_hi_hz = 100.0;

    ContinuousTF build() const;
};

TfConfig parse_tf_config(const std::string& yaml_text);

/// Every controller and plant default as a loadable YAML document.
std::string reference_config_yaml();

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tailsitter
