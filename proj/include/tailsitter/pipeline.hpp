#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailsitter/control.hpp"
#include "tailsitter/fit.hpp"
#include "tailsitter/metrics.hpp"
#include "tailsitter/sysid.hpp"

namespace tailsitter {

/// Loop-shaping numbers for plant * rate controller on one axis.
struct LoopAnalysis {
    StabilityMargins margins;
    double slope_db_per_dec = 0.0;       // over [slope_f_lo, slope_f_hi]
    double magnitude_at_peak_db = 0.0;   // |L| at the plant's resonance frequency
    double spectral_radius = 0.0;        // discrete closed loop at 250 Hz
    bool discrete_stable() const { return spectral_radius < 1.0; }
};

struct LoopBands {
    double f_lo = 0.1;
    double f_hi = 100.0;
    double slope_f_lo = 0.6;
    double slope_f_hi = 14.0;
};

/// Continuous margins of P C and the discrete closed-loop spectral radius of the realized plant
/// with the digital controller, the notch as configured in `rate`.
LoopAnalysis analyze_loop(const PlantFitParams& plant, const RateLoopConfig& rate, int axis, const LoopBands& bands = {});

/// Largest common scale of the PID gains (notch removed) that keeps the discrete loop stable,
/// and the crossover the scaled loop reaches.
struct GainLimit {
    double max_scale = 0.0;
    std::optional<double> crossover_hz;
    std::optional<double> phase_margin_deg;
};

GainLimit notch_free_gain_limit(const PlantFitParams& plant, const RateLoopConfig& rate, int axis,
                                const LoopBands& bands = {});

struct PipelineConfig {
    PlantFitParams plant = PlantFitParams::reference_defaults();  // the simulated airframe
    double noise_std = 0.0;  // gyro noise on the measured rate, rad/s
    std::uint64_t seed = 1;
    int axis = 1;
    bool closed_loop_sweep = true;
    ChirpConfig chirp{1.0, 60.0, 60.0, 0.05, 250.0};
    FrfConfig frf;
    FitConfig fit;
    RateLoopConfig rate;  // gains and notch shape; the notch center is moved to the fitted peak
    LoopBands bands;
    std::vector<ExpectRule> expect;
};

PipelineConfig parse_pipeline_config(const std::string& yaml_text);

struct PipelineResult {
    RunReport report;
    SweepRecord sweep;
    FRFEstimate frf;
    FitResult fit;
    RateLoopConfig designed;  // rate config with the placed notch
    LoopAnalysis with_notch;
    LoopAnalysis without_notch;
    GainLimit notch_free_limit;
    std::string fit_text;
};

/// sweep -> FRF -> fit -> notch at the fitted peak -> margins, writing CSV/text artifacts to out_dir
/// when it is not empty. A fit that does not converge is reported as a failed stage.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir = "");

}  // namespace tailsitter
