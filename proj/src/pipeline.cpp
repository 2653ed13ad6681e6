#include "tailsitter/pipeline.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>

#include "tailsitter/axis_plant.hpp"
#include "tailsitter/config.hpp"
#include "yaml_util.hpp"

namespace tailsitter {

namespace {

double db(Complex c) { return 20.0 * std::log10(std::abs(c)); }

double radius_of(const LinearAxisPlant& plant, const RateController& c, int axis) {
    const auto [bp, ap] = plant.polynomials();
    const auto [bc, ac] = c.digital_polynomials(axis);
    return closed_loop_spectral_radius(poly::multiply(bp, bc), poly::multiply(ap, ac));
}

RateLoopConfig scaled(RateLoopConfig r, int axis, double k) {
    PidGains& g = r.gains[static_cast<std::size_t>(axis)];
    g.kp *= k;
    g.ki *= k;
    g.kd *= k;
    return r;
}

}  // namespace

LoopAnalysis analyze_loop(const PlantFitParams& plant, const RateLoopConfig& rate, int axis, const LoopBands& bands) {
    const ContinuousTF p = fitted_plant(plant);
    const RateController c(rate);
    const ContinuousTF loop = tf_series(p, c.design_tf(axis));
    LoopAnalysis out;
    out.margins = margins(loop, bands.f_lo, bands.f_hi);
    out.slope_db_per_dec = magnitude_slope(loop, bands.slope_f_lo, bands.slope_f_hi);
    out.magnitude_at_peak_db = db(tf_eval(loop, plant.peak.freq_hz));
    out.spectral_radius = radius_of(LinearAxisPlant(p, rate.sample_hz), c, axis);
    return out;
}

GainLimit notch_free_gain_limit(const PlantFitParams& plant, const RateLoopConfig& rate, int axis,
                                const LoopBands& bands) {
    RateLoopConfig base = rate;
    base.notch[static_cast<std::size_t>(axis)].reset();
    const ContinuousTF p = fitted_plant(plant);
    const LinearAxisPlant realized(p, base.sample_hz);
    const auto stable = [&](double k) { return radius_of(realized, RateController(scaled(base, axis, k)), axis) < 1.0; };

    GainLimit out;
    constexpr double step = 0.02, cap = 4.0;
    double lo = 0.0, hi = 0.0;
    for (double k = step; k <= cap + 1e-12; k += step) {
        if (!stable(k)) {
            hi = k;
            break;
        }
        lo = k;
    }
    if (hi > 0.0 && lo > 0.0) {
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            (stable(mid) ? lo : hi) = mid;
        }
    }
    out.max_scale = lo;
    if (lo > 0.0) {
        const StabilityMargins m =
            margins(tf_series(p, RateController(scaled(base, axis, lo)).design_tf(axis)), bands.f_lo, bands.f_hi);
        out.crossover_hz = m.gain_crossover_hz;
        out.phase_margin_deg = m.phase_margin_deg;
    }
    return out;
}

PipelineConfig parse_pipeline_config(const std::string& yaml_text) {
    const YAML::Node root = yaml::parse(yaml_text, "pipeline config");
    PipelineConfig c;
    if (!root || root.IsNull()) return c;
    yaml::check_keys(root, {"plant", "noise_std", "seed", "axis", "closed_loop_sweep", "chirp", "frf", "fit", "controller",
                            "bands", "expect"},
                     "pipeline");
    if (const YAML::Node p = root["plant"]) c.plant = read_plant_node(p, c.plant);
    yaml::read(root, "noise_std", c.noise_std, "pipeline");
    yaml::read(root, "seed", c.seed, "pipeline");
    if (const YAML::Node a = root["axis"]) c.axis = yaml::axis(a, "pipeline.axis");
    yaml::read(root, "closed_loop_sweep", c.closed_loop_sweep, "pipeline");
    if (const YAML::Node n = root["chirp"]) {
        yaml::check_keys(n, {"f0", "f1", "duration", "amplitude"}, "chirp");
        yaml::read(n, "f0", c.chirp.f0, "chirp");
        yaml::read(n, "f1", c.chirp.f1, "chirp");
        yaml::read(n, "duration", c.chirp.duration, "chirp");
        yaml::read(n, "amplitude", c.chirp.amplitude, "chirp");
    }
    if (const YAML::Node n = root["frf"]) {
        yaml::check_keys(n, {"f_lo", "f_hi", "n_freqs", "cycles_per_window", "overlap", "min_kernel_bins", "coherence_threshold",
                             "method"}, "frf");
        yaml::read(n, "f_lo", c.frf.f_lo, "frf");
        yaml::read(n, "f_hi", c.frf.f_hi, "frf");
        yaml::read(n, "n_freqs", c.frf.n_freqs, "frf");
        yaml::read(n, "cycles_per_window", c.frf.cycles_per_window, "frf");
        yaml::read(n, "overlap", c.frf.overlap, "frf");
        yaml::read(n, "coherence_threshold", c.frf.coherence_threshold, "frf");
        yaml::read(n, "min_kernel_bins", c.frf.min_kernel_bins, "frf");
        if (const YAML::Node m = n["method"]) {
            const std::string s = yaml::scalar<std::string>(m, "frf.method");
            if (s == "smoothed")
                c.frf.method = FrfMethod::smoothed;
            else if (s == "welch")
                c.frf.method = FrfMethod::welch;
            else
                yaml::fail(m, "frf.method must be smoothed or welch");
        }
    }
    if (const YAML::Node n = root["fit"]) {
        yaml::check_keys(n, {"f_lo", "f_hi", "phase_weight", "restarts", "seed", "max_evaluations", "cost_threshold"}, "fit");
        yaml::read(n, "f_lo", c.fit.f_lo, "fit");
        yaml::read(n, "f_hi", c.fit.f_hi, "fit");
        yaml::read(n, "phase_weight", c.fit.phase_weight, "fit");
        yaml::read(n, "restarts", c.fit.restarts, "fit");
        yaml::read(n, "seed", c.fit.seed, "fit");
        yaml::read(n, "max_evaluations", c.fit.max_evaluations, "fit");
        yaml::read(n, "cost_threshold", c.fit.cost_threshold, "fit");
    }
    if (const YAML::Node n = root["controller"]) {
        ControllerConfig cc;
        cc.rate = c.rate;
        c.rate = read_controller_node(n, cc).rate;
    }
    if (const YAML::Node n = root["bands"]) {
        yaml::check_keys(n, {"f_lo", "f_hi", "slope_f_lo", "slope_f_hi"}, "bands");
        yaml::read(n, "f_lo", c.bands.f_lo, "bands");
        yaml::read(n, "f_hi", c.bands.f_hi, "bands");
        yaml::read(n, "slope_f_lo", c.bands.slope_f_lo, "bands");
        yaml::read(n, "slope_f_hi", c.bands.slope_f_hi, "bands");
    }
    if (const YAML::Node ex = root["expect"]) {
        if (!ex.IsMap()) yaml::fail(ex, "pipeline.expect: expected a mapping of metric: {min, max}");
        for (const auto& kv : ex) {
            ExpectRule r;
            r.metric = kv.first.as<std::string>();
            yaml::check_keys(kv.second, {"min", "max"}, "expect." + r.metric);
            if (kv.second["min"]) r.min = yaml::scalar<double>(kv.second["min"], "expect.min");
            if (kv.second["max"]) r.max = yaml::scalar<double>(kv.second["max"], "expect.max");
            c.expect.push_back(r);
        }
    }
    try {
        c.chirp.validate();
        c.rate.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), yaml::line_of(root));
    }
    if (c.chirp.sample_hz != c.rate.sample_hz) throw ConfigError("chirp and rate loop must share the 250 Hz rate");
    return c;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
    PipelineResult r;
    RunReport& rep = r.report;
    rep.name = "design_pipeline";
    const ContinuousTF truth = fitted_plant(cfg.plant);

    // 1. Sweep on the simulated airframe.
    LinearAxisPlant plant(truth, cfg.chirp.sample_hz, cfg.noise_std, cfg.seed);
    std::optional<RateController> ctl;
    if (cfg.closed_loop_sweep) ctl.emplace(cfg.rate);
    r.sweep = sweep_experiment(plant, cfg.chirp, ctl ? &*ctl : nullptr, cfg.axis);

    // 2. Nonparametric estimate and parametric fit.
    r.frf = estimate_frf(r.sweep.u_total, r.sweep.omega_meas, cfg.frf);
    rep.set("frf_trusted_fraction", r.frf.trusted_fraction());
    r.fit = fit_plant_model(r.frf, cfg.fit);
    r.fit_text = fit_report(r.fit);
    const PlantFitParams& fp = r.fit.params;
    rep.set("fit_converged", r.fit.converged ? 1.0 : 0.0);
    rep.set("fit_cost", r.fit.cost);
    rep.set("fitted_peak_hz", fp.peak.freq_hz);
    rep.set("fitted_offpeak_hz", fp.offpeak.freq_hz);
    rep.set("fitted_delay_s", fp.delay);
    rep.set("peak_error_pct", 100.0 * (fp.peak.freq_hz / cfg.plant.peak.freq_hz - 1.0));
    rep.set("delay_error_pct", 100.0 * (fp.delay / cfg.plant.delay - 1.0));
    {
        double vs_frf = 0.0, vs_truth = 0.0;
        for (std::size_t i = 0; i < r.frf.freqs.size(); ++i) {
            const double f = r.frf.freqs[i];
            if (!r.frf.trusted[i] || f < 1.5 || f > 50.0) continue;
            const Complex m = plant_model_response(fp, f);
            vs_frf = std::max(vs_frf, std::abs(db(m / r.frf.h[i])));
            vs_truth = std::max(vs_truth, std::abs(db(m / tf_eval(truth, f))));
        }
        rep.set("fit_vs_frf_max_db", vs_frf);
        rep.set("fit_vs_plant_max_db", vs_truth);
    }
    if (!r.fit.converged) rep.notes.push_back("fit stage failed: " + r.fit.diagnostic);

    // 3. Notch at the fitted peak, then loop shaping on the fitted model.
    r.designed = cfg.rate;
    auto& notch_slot = r.designed.notch[static_cast<std::size_t>(cfg.axis)];
    notch_slot = notch_slot.value_or(NotchParams{});
    notch_slot->center_hz = fp.peak.freq_hz;
    r.with_notch = analyze_loop(fp, r.designed, cfg.axis, cfg.bands);
    RateLoopConfig bare = r.designed;
    bare.notch[static_cast<std::size_t>(cfg.axis)].reset();
    r.without_notch = analyze_loop(fp, bare, cfg.axis, cfg.bands);

    const auto put = [&](const std::string& prefix, const LoopAnalysis& a) {
        if (a.margins.gain_crossover_hz) rep.set(prefix + "crossover_hz", *a.margins.gain_crossover_hz);
        if (a.margins.phase_margin_deg) rep.set(prefix + "phase_margin_deg", *a.margins.phase_margin_deg);
        if (a.margins.gain_margin_db) rep.set(prefix + "gain_margin_db", *a.margins.gain_margin_db);
        rep.set(prefix + "slope_db_per_dec", a.slope_db_per_dec);
        rep.set(prefix + "magnitude_at_peak_db", a.magnitude_at_peak_db);
        rep.set(prefix + "zero_db_crossings", static_cast<double>(a.margins.crossings.size()));
        rep.set(prefix + "conditionally_unstable", a.margins.conditionally_unstable() ? 1.0 : 0.0);
        rep.set(prefix + "spectral_radius", a.spectral_radius);
    };
    put("", r.with_notch);
    put("no_notch_", r.without_notch);

    r.notch_free_limit = notch_free_gain_limit(fp, r.designed, cfg.axis, cfg.bands);
    rep.set("notch_free_max_gain_scale", r.notch_free_limit.max_scale);
    if (r.notch_free_limit.crossover_hz) {
        rep.set("notch_free_max_crossover_hz", *r.notch_free_limit.crossover_hz);
        if (r.with_notch.margins.gain_crossover_hz)
            rep.set("bandwidth_gain_pct",
                    100.0 * (*r.with_notch.margins.gain_crossover_hz / *r.notch_free_limit.crossover_hz - 1.0));
    }
    rep.evaluate(cfg.expect);
    if (!r.fit.converged) rep.rules.push_back({{"fit_converged", 1.0, std::nullopt}, 0.0, false});

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        const auto emit = [&](const std::string& name, const std::string& text) {
            const std::string path = (fs::path(out_dir) / name).string();
            write_text_file(path, text);
            rep.artifacts.push_back(path);
        };
        const ContinuousTF p = fitted_plant(fp);
        const ContinuousTF c = RateController(r.designed).design_tf(cfg.axis);
        const ContinuousTF c_bare = RateController(bare).design_tf(cfg.axis);
        emit("sweep.csv", r.sweep.to_csv());
        emit("frf.csv", r.frf.to_csv());
        emit("fit_report.txt", r.fit_text);
        emit("bode_plant.csv", bode_csv(p, cfg.bands.f_lo, cfg.bands.f_hi));
        emit("bode_controller.csv", bode_csv(c, cfg.bands.f_lo, cfg.bands.f_hi));
        emit("bode_loop.csv", bode_csv(tf_series(p, c), cfg.bands.f_lo, cfg.bands.f_hi));
        emit("bode_loop_no_notch.csv", bode_csv(tf_series(p, c_bare), cfg.bands.f_lo, cfg.bands.f_hi));
        const std::string path = (fs::path(out_dir) / "pipeline_report.txt").string();
        rep.artifacts.push_back(path);
        write_text_file(path, rep.to_text());
    }
    return r;
}

}  // namespace tailsitter
