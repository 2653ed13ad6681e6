#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tailsitter/lti.hpp"
#include "tailsitter/sysid.hpp"

namespace tailsitter {

struct FitConfig {
    double f_lo = 1.0;
    double f_hi = 60.0;
    double phase_weight = 0.1;  // cost = sum w (dB err)^2 + phase_weight (deg err)^2, w = coherence
    int restarts = 5;
    std::uint64_t seed = 7;
    int max_evaluations = 6000;  // per restart
    /// Weighted mean cost above which the fit is reported as not converged.
    double cost_threshold = 4.0;
    /// Low-pass stage held fixed (it belongs to the flight stack, not the airframe).
    double lf_corner_hz = PlantFitParams::reference_defaults().lf_corner_hz;
    double lf_damping = PlantFitParams::reference_defaults().lf_damping;
};

struct BandError {
    double f_lo = 0.0;
    double f_hi = 0.0;
    int bins = 0;
    double max_mag_db = 0.0;
    double max_phase_deg = 0.0;
};

struct FitResult {
    PlantFitParams params;   // best fit (stage-1 values when not converged)
    PlantFitParams initial;  // stage-1 estimate
    double cost = 0.0;       // weighted mean
    double initial_cost = 0.0;
    bool converged = false;
    int best_restart = 0;
    std::string diagnostic;
    std::vector<BandError> band_errors;
};

/// Response of the fitted structure evaluated factor by factor (no polynomial expansion).
Complex plant_model_response(const PlantFitParams& p, double freq_hz);

/// Two-stage fit of the low-pass * dynamics * peak * off-peak * delay structure:
/// stage 1 reads the resonances, low-frequency gain and delay off the data; stage 2 runs
/// Nelder-Mead on log-scaled parameters with seeded restarts and keeps the lowest cost
/// (ties to the lowest restart index). Requires at least half the bins in band trusted.
FitResult fit_plant_model(const FRFEstimate& frf, const FitConfig& cfg = {});

/// Per-band magnitude/phase error of a model against the trusted bins of an FRF.
std::vector<BandError> band_errors(const PlantFitParams& p, const FRFEstimate& frf,
                                   const std::vector<std::pair<double, double>>& bands);

/// Structured text report: parameters, cost, convergence and per-band error table.
std::string fit_report(const FitResult& r);

}  // namespace tailsitter
