#include "tailsitter/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tailsitter {

std::vector<double> envelope(std::span<const double> x, double sample_hz, double block_s) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(block_s * sample_hz)));
    std::vector<double> env;
    for (std::size_t start = 0; start + n <= x.size(); start += n) {
        const auto block = x.subspan(start, n);
        const double mean = std::accumulate(block.begin(), block.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double v : block) ss += (v - mean) * (v - mean);
        env.push_back(std::sqrt(ss / static_cast<double>(n)));
    }
    return env;
}

DivergenceScan divergence_scan(std::span<const double> x, double sample_hz, double window_s, double block_s,
                               double threshold) {
    if (!(sample_hz > 0.0 && window_s > 0.0 && block_s > 0.0)) throw std::invalid_argument("divergence scan needs positive rates");
    const std::vector<double> env = envelope(x, sample_hz, block_s);
    const auto per_window = static_cast<std::size_t>(std::round(window_s / block_s));
    DivergenceScan out;
    if (per_window < 2 || env.size() < per_window) return out;
    const double tiny = 1e-12;
    for (std::size_t s = 0; s + per_window <= env.size(); ++s) {
        double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
        for (std::size_t k = 0; k < per_window; ++k) {
            const double t = (static_cast<double>(s + k) + 0.5) * block_s;
            const double y = std::log(std::max(env[s + k], tiny));
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        const double m = static_cast<double>(per_window);
        const double rate = (m * sty - st * sy) / (m * stt - st * st);
        const double center = (static_cast<double>(s) + 0.5 * m) * block_s;
        out.t.push_back(center);
        out.rate.push_back(rate);
        out.max_rate = std::max(out.max_rate, rate);
        if (rate > threshold && !out.first_flagged_t) out.first_flagged_t = center;
    }
    return out;
}

std::optional<double> convergence_time(std::span<const double> x, double sample_hz, double t_from, double fraction,
                                       double block_s) {
    const std::vector<double> env = envelope(x, sample_hz, block_s);
    const auto from = static_cast<std::size_t>(std::floor(t_from / block_s));
    if (from == 0 || from >= env.size()) return std::nullopt;
    const std::size_t look = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(1.0 / block_s)));
    double ref = 0.0;
    for (std::size_t k = from > look ? from - look : 0; k < from; ++k) ref = std::max(ref, env[k]);
    const double level = fraction * ref;
    std::optional<std::size_t> settled;
    for (std::size_t k = env.size(); k-- > from;) {
        if (env[k] >= level) break;
        settled = k;
    }
    if (!settled) return std::nullopt;
    return static_cast<double>(*settled + 1) * block_s - t_from;
}

StepMetrics step_metrics(std::span<const double> y, double sample_hz) {
    if (y.size() < 8) throw std::invalid_argument("step response needs at least 8 samples");
    const std::size_t n = y.size();
    const double dt = 1.0 / sample_hz;
    StepMetrics m;
    m.initial = y[0];
    const std::size_t tail = std::max<std::size_t>(1, n / 5);
    m.final_value = std::accumulate(y.end() - static_cast<std::ptrdiff_t>(tail), y.end(), 0.0) / static_cast<double>(tail);
    const double delta = m.final_value - m.initial;
    if (delta == 0.0) {
        m.rise_time_s = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    const double dir = delta > 0.0 ? 1.0 : -1.0;
    double excess = 0.0;
    for (double v : y) excess = std::max(excess, dir * (v - m.final_value));
    m.overshoot_pct = 100.0 * excess / std::abs(delta);

    std::optional<double> t10, t90;
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = (y[i] - m.initial) / delta;
        if (!t10 && frac >= 0.1) t10 = static_cast<double>(i) * dt;
        if (!t90 && frac >= 0.9) t90 = static_cast<double>(i) * dt;
    }
    m.rise_time_s = t10 && t90 ? *t90 - *t10 : std::numeric_limits<double>::quiet_NaN();

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    const auto sse = [&](double td, double tau) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double model = t < td ? m.initial : m.final_value - delta * std::exp(-(t - td) / tau);
            s += (y[i] - model) * (y[i] - model);
        }
        return s;
    };
    const double total = static_cast<double>(n - 1) * dt;
    double best = std::numeric_limits<double>::infinity();
    const auto max_td = static_cast<std::size_t>(0.3 * static_cast<double>(n));
    constexpr double golden = 0.6180339887498949;
    for (std::size_t k = 0; k <= max_td; ++k) {
        const double td = static_cast<double>(k) * dt;
        double a = std::log(0.5 * dt), b = std::log(total);
        double c = b - golden * (b - a), d = a + golden * (b - a);
        double fc = sse(td, std::exp(c)), fd = sse(td, std::exp(d));
        for (int it = 0; it < 60 && b - a > 1e-6; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = sse(td, std::exp(c));
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = sse(td, std::exp(d));
            }
        }
        const double tau = std::exp(0.5 * (a + b));
        const double s = sse(td, tau);
        if (s < best) {
            best = s;
            m.tau_s = tau;
            m.dead_time_s = td;
        }
    }
    m.r2 = sst > 0.0 ? 1.0 - best / sst : 1.0;
    return m;
}

void RunReport::set(const std::string& metric, double value) {
    for (auto& [k, v] : metrics)
        if (k == metric) {
            v = value;
            return;
        }
    metrics.emplace_back(metric, value);
}

std::optional<double> RunReport::get(const std::string& metric) const {
    for (const auto& [k, v] : metrics)
        if (k == metric) return v;
    return std::nullopt;
}

void RunReport::evaluate(const std::vector<ExpectRule>& expect) {
    rules.clear();
    for (const ExpectRule& r : expect) {
        RuleResult res;
        res.rule = r;
        res.value = get(r.metric);
        res.passed = res.value.has_value() && !std::isnan(*res.value) && (!r.min || *res.value >= *r.min) &&
                     (!r.max || *res.value <= *r.max);
        rules.push_back(res);
    }
}

bool RunReport::passed() const {
    return std::all_of(rules.begin(), rules.end(), [](const RuleResult& r) { return r.passed; });
}

std::string RunReport::to_text() const {
    std::string out = fmt::format("report: {}\nverdict: {}\nmetrics:\n", name, passed() ? "PASS" : "FAIL");
    for (const auto& [k, v] : metrics) out += fmt::format("  {}: {:.6g}\n", k, v);
    if (!rules.empty()) {
        out += "rules:\n";
        for (const RuleResult& r : rules) {
            std::string bound;
            if (r.rule.min) bound += fmt::format(">= {:g}", *r.rule.min);
            if (r.rule.min && r.rule.max) bound += " and ";
            if (r.rule.max) bound += fmt::format("<= {:g}", *r.rule.max);
            out += fmt::format("  {} {}: {} ({})\n", r.passed ? "PASS" : "FAIL", r.rule.metric,
                               r.value ? fmt::format("{:.6g}", *r.value) : std::string("missing"), bound);
        }
    }
    if (!notes.empty()) {
        out += "notes:\n";
        for (const auto& n : notes) out += "  " + n + "\n";
    }
    if (!artifacts.empty()) {
        out += "artifacts:\n";
        for (const auto& a : artifacts) out += "  " + a + "\n";
    }
    return out;
}

}  // namespace tailsitter
