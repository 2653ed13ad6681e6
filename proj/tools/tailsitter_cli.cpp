#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tailsitter/tailsitter.h"

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kNumerical = 3 };

int exit_for(ts_status s) {
    switch (s) {
        case TS_OK: return kPass;
        case TS_ERR_NUMERICAL: return kNumerical;
        case TS_ERR_CONFIG:
        case TS_ERR_ARGUMENT:
        case TS_ERR_IO:
        case TS_ERR_SCHEMA: return kConfig;
        default: return kNumerical;
    }
}

int report_error(ts_status s) {
    std::cerr << "error: " << ts_last_error() << "\n";
    return exit_for(s);
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

bool write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return true;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

std::string metrics_csv(const ts_report* r) {
    std::string s = "metric,value\n";
    char buf[64];
    for (size_t i = 0; i < ts_report_metric_count(r); ++i) {
        const char* name = nullptr;
        double v = 0.0;
        ts_report_metric_at(r, i, &name, &v);
        std::snprintf(buf, sizeof buf, "%.17g", v);
        s += std::string(name) + "," + buf + "\n";
    }
    return s;
}

int print_report(ts_report* r, const std::string& format) {
    if (format == "csv")
        std::cout << metrics_csv(r);
    else
        std::cout << ts_report_text(r);
    const int code = ts_report_passed(r) ? kPass : kFail;
    ts_report_free(r);
    return code;
}

struct TfHandle {
    ts_tf* tf = nullptr;
    double lo = 0.1, hi = 100.0;
    ~TfHandle() { ts_tf_free(tf); }
};

ts_status load_tf(const std::string& path, TfHandle& h) {
    std::string text;
    if (!read_file(path, text)) {
        std::cerr << "error: cannot read " << path << "\n";
        return TS_ERR_CONFIG;
    }
    return ts_tf_from_config(text.c_str(), &h.tf, &h.lo, &h.hi);
}

std::string fmt_opt(int has, double v) {
    if (!has) return "none";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail-sitter flight-control toolkit"};
    app.require_subcommand(1);

    std::int64_t seed = -1;
    std::string out_dir;
    std::string format = "text";
    auto add_common = [&](CLI::App* c) {
        c->add_option("--seed", seed, "RNG seed overriding the one in the scenario");
        c->add_option("--out-dir", out_dir, "Directory for logs and reports");
        c->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "csv"}));
    };

    std::string scenario;
    auto* run = app.add_subcommand("run", "Run a scenario file or builtin:<name>");
    run->add_option("scenario", scenario)->required();
    add_common(run);

    std::string pipeline_cfg;
    auto* pipe = app.add_subcommand("pipeline", "Sweep, FRF, fit, notch placement and margins");
    pipe->add_option("config", pipeline_cfg)->required();
    add_common(pipe);

    std::string tf_cfg, bode_out;
    int ppd = 100;
    auto* bode = app.add_subcommand("bode", "Export a Bode table as CSV");
    bode->add_option("tf_config", tf_cfg)->required();
    bode->add_option("--out", bode_out, "Output CSV file, - for stdout");
    bode->add_option("--points-per-decade", ppd)->check(CLI::Range(1, 10000));
    add_common(bode);

    auto* marg = app.add_subcommand("margins", "Gain and phase margins of a loop");
    marg->add_option("tf_config", tf_cfg)->required();
    add_common(marg);

    std::string log_a, log_b;
    auto* cmp = app.add_subcommand("compare", "Compare two telemetry logs");
    cmp->add_option("a", log_a)->required();
    cmp->add_option("b", log_b)->required();
    add_common(cmp);

    auto* defaults = app.add_subcommand("defaults", "Print reference controller and plant defaults");
    bool list = false;
    auto* scenarios = app.add_subcommand("scenarios", "List or print built-in scenarios");
    std::string show;
    scenarios->add_flag("--list", list);
    scenarios->add_option("--show", show, "Print the YAML of one built-in scenario");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kConfig;
    }

    const char* dir = out_dir.empty() ? nullptr : out_dir.c_str();

    if (*run) {
        ts_report* r = nullptr;
        const ts_status s = ts_run_scenario(scenario.c_str(), seed, dir, &r);
        if (s != TS_OK) return report_error(s);
        return print_report(r, format);
    }
    if (*pipe) {
        ts_report* r = nullptr;
        const ts_status s = ts_run_pipeline(pipeline_cfg.c_str(), dir, &r);
        if (s != TS_OK) return report_error(s);
        return print_report(r, format);
    }
    if (*bode) {
        TfHandle h;
        ts_status s = load_tf(tf_cfg, h);
        if (s != TS_OK) return report_error(s);
        char* csv = nullptr;
        s = ts_tf_bode_csv(h.tf, h.lo, h.hi, ppd, &csv);
        if (s != TS_OK) return report_error(s);
        std::string path = bode_out;
        if (path.empty() && dir) path = (std::filesystem::path(out_dir) / "bode.csv").string();
        const bool ok = write_output(path, csv);
        ts_string_free(csv);
        if (!ok) {
            std::cerr << "error: cannot write " << path << "\n";
            return kConfig;
        }
        return kPass;
    }
    if (*marg) {
        TfHandle h;
        ts_status s = load_tf(tf_cfg, h);
        if (s != TS_OK) return report_error(s);
        ts_margins m{};
        s = ts_tf_margins(h.tf, h.lo, h.hi, &m);
        if (s != TS_OK) return report_error(s);
        double slope = 0.0;
        ts_tf_slope(h.tf, h.lo, std::min(h.hi, 14.0), &slope);
        const std::pair<const char*, std::string> rows[] = {
            {"crossover_hz", fmt_opt(m.has_crossover, m.crossover_hz)},
            {"phase_margin_deg", fmt_opt(m.has_crossover, m.phase_margin_deg)},
            {"phase_crossover_hz", fmt_opt(m.has_phase_crossover, m.phase_crossover_hz)},
            {"gain_margin_db", fmt_opt(m.has_phase_crossover, m.gain_margin_db)},
            {"zero_db_crossings", std::to_string(m.crossings)},
            {"conditionally_unstable", std::to_string(m.conditionally_unstable)},
            {"slope_db_per_dec", fmt_opt(1, slope)},
        };
        if (format == "csv") std::cout << "metric,value\n";
        for (const auto& [k, v] : rows) std::cout << k << (format == "csv" ? "," : ": ") << v << "\n";
        return kPass;
    }
    if (*cmp) {
        ts_report* r = nullptr;
        const ts_status s = ts_compare_logs(log_a.c_str(), log_b.c_str(), &r);
        if (s != TS_OK) return report_error(s);
        return print_report(r, format);
    }
    if (*defaults) {
        char* text = nullptr;
        const ts_status s = ts_reference_config(&text);
        if (s != TS_OK) return report_error(s);
        std::cout << text;
        ts_string_free(text);
        return kPass;
    }
    if (*scenarios) {
        char* text = nullptr;
        const ts_status s = show.empty() ? ts_builtin_scenarios(&text) : ts_builtin_scenario_text(show.c_str(), &text);
        if (s != TS_OK) return report_error(s);
        std::cout << text;
        ts_string_free(text);
        return kPass;
    }
    return kConfig;
}
