#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tailsitter {

/// Exponential envelope growth over sliding windows. The envelope is the RMS of mean-removed
/// blocks; each window fits ln(envelope) against time by least squares.
struct DivergenceScan {
    std::vector<double> t;     // window centers, s (relative to the first sample)
    std::vector<double> rate;  // growth rate per window, 1/s
    double max_rate = 0.0;
    std::optional<double> first_flagged_t;

    bool diverged() const { return first_flagged_t.has_value(); }
};

DivergenceScan divergence_scan(std::span<const double> x, double sample_hz, double window_s = 2.0,
                               double block_s = 0.25, double threshold = 0.1);

/// Block-RMS envelope (mean removed per block), one value per block.
std::vector<double> envelope(std::span<const double> x, double sample_hz, double block_s = 0.25);

/// Time after `t_from` (s, relative to the first sample) until the envelope drops below
/// `fraction` of its largest value in the second before t_from and stays there to the end.
std::optional<double> convergence_time(std::span<const double> x, double sample_hz, double t_from,
                                       double fraction = 0.1, double block_s = 0.25);

struct StepMetrics {
    double initial = 0.0;
    double final_value = 0.0;   // mean of the last 20% of the window
    double overshoot_pct = 0.0; // excess past final_value, % of the step size
    double rise_time_s = 0.0;   // 10% -> 90%; NaN when never reached
    double tau_s = 0.0;         // first-order fit time constant
    double dead_time_s = 0.0;   // first-order fit dead time
    double r2 = 0.0;            // coefficient of determination of the first-order fit
};

/// Response y sampled at `sample_hz` starting at the step instant. Fits
/// y = yf + (y0 - yf) exp(-(t - td) / tau) for t >= td (y0 before) by a dead-time grid and a
/// golden-section search on tau. Throws std::invalid_argument for fewer than 8 samples.
StepMetrics step_metrics(std::span<const double> y, double sample_hz);

struct ExpectRule {
    std::string metric;
    std::optional<double> min;
    std::optional<double> max;
};

struct RuleResult {
    ExpectRule rule;
    std::optional<double> value;  // missing metric: rule fails
    bool passed = false;
};

/// Outcome of a scenario or pipeline run.
struct RunReport {
    std::string name;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<RuleResult> rules;
    std::vector<std::string> artifacts;
    std::vector<std::string> notes;

    void set(const std::string& metric, double value);
    std::optional<double> get(const std::string& metric) const;
    void evaluate(const std::vector<ExpectRule>& expect);
    bool passed() const;
    std::string to_text() const;
};

}  // namespace tailsitter
