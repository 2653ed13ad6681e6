#include "tailsitter/tailsitter.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "tailsitter/config.hpp"
#include "tailsitter/logs.hpp"
#include "tailsitter/pipeline.hpp"
#include "tailsitter/scenario.hpp"

struct ts_tf {
    tailsitter::ContinuousTF tf;
};

struct ts_report {
    std::string text;
    bool passed = false;
    std::vector<std::pair<std::string, double>> metrics;
};

namespace {

thread_local std::string g_error;
thread_local int g_error_line = 0;

ts_status fail(ts_status s, const std::string& what, int line = 0) {
    g_error = what;
    g_error_line = line;
    return s;
}

// Maps C++ exceptions onto status codes; the most specific types come first.
template <typename F>
ts_status guard(F&& f) {
    try {
        g_error.clear();
        g_error_line = 0;
        return f();
    } catch (const tailsitter::ConfigError& e) {
        return fail(TS_ERR_CONFIG, e.what(), e.line());
    } catch (const tailsitter::SchemaError& e) {
        return fail(TS_ERR_SCHEMA, e.what());
    } catch (const tailsitter::NumericalError& e) {
        return fail(TS_ERR_NUMERICAL, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(TS_ERR_ARGUMENT, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(TS_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(TS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(TS_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

ts_report* make_report(const tailsitter::RunReport& r) {
    auto* out = new ts_report;
    out->text = r.to_text();
    out->passed = r.passed();
    out->metrics = r.metrics;
    return out;
}

}  // namespace

extern "C" {

const char* ts_last_error(void) { return g_error.c_str(); }
int ts_last_error_line(void) { return g_error_line; }
const char* ts_version(void) { return "1.0.0"; }
void ts_string_free(char* s) { std::free(s); }

ts_status ts_tf_create(const double* num, size_t num_len, const double* den, size_t den_len, double delay_s, ts_tf** out) {
    if (!num || !den || !out || num_len == 0 || den_len == 0) return fail(TS_ERR_ARGUMENT, "null or empty argument");
    return guard([&] {
        *out = new ts_tf{tailsitter::ContinuousTF({num, num + num_len}, {den, den + den_len}, delay_s)};
        return TS_OK;
    });
}

ts_status ts_tf_from_config(const char* yaml_text, ts_tf** out, double* band_lo, double* band_hi) {
    if (!yaml_text || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        const tailsitter::TfConfig c = tailsitter::parse_tf_config(yaml_text);
        *out = new ts_tf{c.build()};
        if (band_lo) *band_lo = c.f_lo_hz;
        if (band_hi) *band_hi = c.f_hi_hz;
        return TS_OK;
    });
}

ts_status ts_tf_reference_plant(ts_tf** out) {
    if (!out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        *out = new ts_tf{tailsitter::fitted_plant(tailsitter::PlantFitParams::reference_defaults())};
        return TS_OK;
    });
}

void ts_tf_free(ts_tf* tf) { delete tf; }

ts_status ts_tf_eval(const ts_tf* tf, double freq_hz, double* re, double* im) {
    if (!tf || !re || !im) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        const auto v = tailsitter::tf_eval(tf->tf, freq_hz);
        *re = v.real();
        *im = v.imag();
        return TS_OK;
    });
}

ts_status ts_tf_bode_csv(const ts_tf* tf, double f_lo, double f_hi, int points_per_decade, char** csv) {
    if (!tf || !csv) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        *csv = dup(tailsitter::bode_csv(tf->tf, f_lo, f_hi, points_per_decade));
        return TS_OK;
    });
}

ts_status ts_tf_margins(const ts_tf* tf, double f_lo, double f_hi, ts_margins* out) {
    if (!tf || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        const auto m = tailsitter::margins(tf->tf, f_lo, f_hi);
        *out = ts_margins{};
        out->has_crossover = m.gain_crossover_hz.has_value();
        out->crossover_hz = m.gain_crossover_hz.value_or(0.0);
        out->phase_margin_deg = m.phase_margin_deg.value_or(0.0);
        out->has_phase_crossover = m.phase_crossover_hz.has_value();
        out->phase_crossover_hz = m.phase_crossover_hz.value_or(0.0);
        out->gain_margin_db = m.gain_margin_db.value_or(0.0);
        out->crossings = static_cast<int>(m.crossings.size());
        out->conditionally_unstable = m.conditionally_unstable();
        return TS_OK;
    });
}

ts_status ts_tf_slope(const ts_tf* tf, double f_lo, double f_hi, double* db_per_decade) {
    if (!tf || !db_per_decade) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        *db_per_decade = tailsitter::magnitude_slope(tf->tf, f_lo, f_hi);
        return TS_OK;
    });
}

ts_status ts_run_scenario(const char* path, int64_t seed, const char* out_dir, ts_report** out) {
    if (!path || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        const tailsitter::Scenario s = tailsitter::load_scenario(path);
        tailsitter::RunOptions opt;
        if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
        if (out_dir) opt.out_dir = out_dir;
        *out = make_report(tailsitter::run_scenario(s, opt).report);
        return TS_OK;
    });
}

ts_status ts_run_pipeline(const char* config_path, const char* out_dir, ts_report** out) {
    if (!config_path || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        const auto cfg = tailsitter::parse_pipeline_config(tailsitter::read_text_file(config_path));
        *out = make_report(tailsitter::run_pipeline(cfg, out_dir ? out_dir : "").report);
        return TS_OK;
    });
}

ts_status ts_compare_logs(const char* path_a, const char* path_b, ts_report** out) {
    if (!path_a || !path_b || !out) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        using tailsitter::CsvTable;
        const auto a = CsvTable::parse(tailsitter::read_text_file(path_a));
        const auto b = CsvTable::parse(tailsitter::read_text_file(path_b));
        const auto c = tailsitter::compare_logs(a, b);
        auto* r = new ts_report;
        r->text = c.to_text();
        r->passed = c.identical;
        r->metrics.emplace_back("identical", c.identical ? 1.0 : 0.0);
        r->metrics.emplace_back("rows", static_cast<double>(c.rows));
        for (const auto& col : c.columns) {
            r->metrics.emplace_back(col.name + ".max_abs", col.max_abs);
            r->metrics.emplace_back(col.name + ".rms", col.rms);
        }
        *out = r;
        return TS_OK;
    });
}

void ts_report_free(ts_report* r) { delete r; }
int ts_report_passed(const ts_report* r) { return r && r->passed ? 1 : 0; }
const char* ts_report_text(const ts_report* r) { return r ? r->text.c_str() : ""; }
size_t ts_report_metric_count(const ts_report* r) { return r ? r->metrics.size() : 0; }

ts_status ts_report_metric_at(const ts_report* r, size_t index, const char** name, double* value) {
    if (!r || !name || !value) return fail(TS_ERR_ARGUMENT, "null argument");
    if (index >= r->metrics.size()) return fail(TS_ERR_ARGUMENT, "metric index out of range");
    *name = r->metrics[index].first.c_str();
    *value = r->metrics[index].second;
    return TS_OK;
}

ts_status ts_report_metric(const ts_report* r, const char* name, double* value) {
    if (!r || !name || !value) return fail(TS_ERR_ARGUMENT, "null argument");
    for (const auto& [k, v] : r->metrics)
        if (k == name) {
            *value = v;
            return TS_OK;
        }
    return fail(TS_ERR_ARGUMENT, std::string("no metric named ") + name);
}

ts_status ts_reference_config(char** yaml_text) {
    if (!yaml_text) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        *yaml_text = dup(tailsitter::reference_config_yaml());
        return TS_OK;
    });
}

ts_status ts_builtin_scenarios(char** names) {
    if (!names) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        std::string s;
        for (const auto& n : tailsitter::builtin_scenario_names()) s += n + "\n";
        *names = dup(s);
        return TS_OK;
    });
}

ts_status ts_builtin_scenario_text(const char* name, char** yaml_text) {
    if (!name || !yaml_text) return fail(TS_ERR_ARGUMENT, "null argument");
    return guard([&] {
        *yaml_text = dup(tailsitter::builtin_scenario_text(name));
        return TS_OK;
    });
}

}  // extern "C"
