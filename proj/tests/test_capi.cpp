#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "tailsitter/tailsitter.h"

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string take(char* s) {
    std::string out = s ? s : "";
    ts_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("transfer functions") {
    const double num[] = {10.0}, den[] = {0.0, 1.0};
    ts_tf* tf = nullptr;
    REQUIRE(ts_tf_create(num, 1, den, 2, 0.0, &tf) == TS_OK);
    double re = 0.0, im = 0.0;
    REQUIRE(ts_tf_eval(tf, 1.0, &re, &im) == TS_OK);
    CHECK(re == doctest::Approx(0.0));
    CHECK(im == doctest::Approx(-10.0 / (2 * kPi)));

    ts_margins m{};
    REQUIRE(ts_tf_margins(tf, 0.01, 100.0, &m) == TS_OK);
    CHECK(m.has_crossover == 1);
    CHECK(m.crossover_hz == doctest::Approx(10.0 / (2 * kPi)).epsilon(1e-6));
    CHECK(m.phase_margin_deg == doctest::Approx(90.0).epsilon(1e-6));
    CHECK(m.has_phase_crossover == 0);
    double slope = 0.0;
    REQUIRE(ts_tf_slope(tf, 0.1, 10.0, &slope) == TS_OK);
    CHECK(slope == doctest::Approx(-20.0).epsilon(1e-6));

    char* csv = nullptr;
    REQUIRE(ts_tf_bode_csv(tf, 1.0, 10.0, 10, &csv) == TS_OK);
    const std::string text = take(csv);
    CHECK(text.rfind("freq_hz,mag_db,phase_deg\n", 0) == 0);
    ts_tf_free(tf);

    ts_tf* plant = nullptr;
    REQUIRE(ts_tf_reference_plant(&plant) == TS_OK);
    REQUIRE(ts_tf_eval(plant, 14.0, &re, &im) == TS_OK);
    CHECK(std::hypot(re, im) > 1.0);
    ts_tf_free(plant);

    ts_tf* lp = nullptr;
    double lo = 0.0, hi = 0.0;
    REQUIRE(ts_tf_from_config("kind: rational\nnum: [1]\nden: [1, 0.0183776, 0.0000791]\nband: [1, 200]\n", &lp, &lo, &hi) ==
            TS_OK);
    CHECK(lo == 1.0);
    CHECK(hi == 200.0);
    REQUIRE(ts_tf_eval(lp, 1e-6, &re, &im) == TS_OK);
    CHECK(re == doctest::Approx(1.0));
    ts_tf_free(lp);
    ts_tf_free(nullptr);
}

TEST_CASE("errors are reported through status and last_error") {
    ts_tf* tf = nullptr;
    const double den[] = {0.0, 1.0};
    CHECK(ts_tf_create(nullptr, 1, den, 2, 0.0, &tf) == TS_ERR_ARGUMENT);
    CHECK(std::strlen(ts_last_error()) > 0);
    const double num[] = {1.0}, zero[] = {0.0};
    CHECK(ts_tf_create(num, 1, zero, 1, 0.0, &tf) == TS_ERR_ARGUMENT);
    CHECK(ts_tf_create(num, 1, den, 0, 0.0, &tf) == TS_ERR_ARGUMENT);
    CHECK(ts_tf_create(num, 1, den, 2, -1.0, &tf) == TS_ERR_ARGUMENT);
    CHECK(ts_tf_eval(nullptr, 1.0, nullptr, nullptr) == TS_ERR_ARGUMENT);

    CHECK(ts_tf_from_config("kind: loop\naxis: pitch\nwhat: 1\n", &tf, nullptr, nullptr) == TS_ERR_CONFIG);
    CHECK(ts_last_error_line() == 3);
    CHECK(std::string(ts_last_error()).find("what") != std::string::npos);

    ts_report* r = nullptr;
    CHECK(ts_run_scenario("/nonexistent.yaml", -1, nullptr, &r) == TS_ERR_CONFIG);
    CHECK(r == nullptr);
    CHECK(ts_run_scenario("builtin:nope", -1, nullptr, &r) == TS_ERR_CONFIG);
    char* text = nullptr;
    CHECK(ts_builtin_scenario_text("nope", &text) == TS_ERR_CONFIG);
    CHECK(ts_compare_logs("/nonexistent_a.csv", "/nonexistent_b.csv", &r) != TS_OK);
}

TEST_CASE("scenario reports and log comparison") {
    const auto dir = std::filesystem::temp_directory_path() / "tailsitter_capi";
    std::filesystem::remove_all(dir);
    ts_report* r = nullptr;
    REQUIRE(ts_run_scenario("builtin:transition", -1, dir.c_str(), &r) == TS_OK);
    CHECK(ts_report_passed(r) == 1);
    double v = 0.0;
    REQUIRE(ts_report_metric(r, "max_abs_altitude_error_m", &v) == TS_OK);
    CHECK(v < 2.0);
    CHECK(ts_report_metric(r, "no_such_metric", &v) != TS_OK);
    const size_t n = ts_report_metric_count(r);
    CHECK(n > 5);
    const char* name = nullptr;
    REQUIRE(ts_report_metric_at(r, 0, &name, &v) == TS_OK);
    CHECK(std::strlen(name) > 0);
    CHECK(ts_report_metric_at(r, n, &name, &v) == TS_ERR_ARGUMENT);
    CHECK(std::string(ts_report_text(r)).find("transition") != std::string::npos);
    ts_report_free(r);

    const std::string log = (dir / "transition_telemetry.csv").string();
    REQUIRE(ts_compare_logs(log.c_str(), log.c_str(), &r) == TS_OK);
    CHECK(ts_report_passed(r) == 1);
    ts_report_free(r);

    const std::string other = (dir / "header_only.csv").string();
    if (FILE* f = std::fopen(other.c_str(), "w")) {
        std::fputs("t,x\n0,1\n", f);
        std::fclose(f);
    }
    CHECK(ts_compare_logs(log.c_str(), other.c_str(), &r) == TS_ERR_SCHEMA);
    std::filesystem::remove_all(dir);
}

TEST_CASE("built-ins and defaults") {
    char* s = nullptr;
    REQUIRE(ts_builtin_scenarios(&s) == TS_OK);
    const std::string names = take(s);
    for (const char* n : {"hover_notch_ab", "rate_step", "transition"}) CHECK(names.find(n) != std::string::npos);

    REQUIRE(ts_builtin_scenario_text("rate_step", &s) == TS_OK);
    CHECK(take(s).find("name: rate_step") != std::string::npos);

    REQUIRE(ts_reference_config(&s) == TS_OK);
    const std::string cfg = take(s);
    CHECK(cfg.find("kp") != std::string::npos);
    CHECK(cfg.find("notch") != std::string::npos);
    CHECK(std::strlen(ts_version()) > 0);
}
