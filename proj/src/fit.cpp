#include "tailsitter/fit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tailsitter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kDim = 11;
constexpr double kDelayScale = 0.01;  // delay parameter is stored in units of 10 ms
using Vec = std::array<double, kDim>;

Complex second_order(double wn, double zeta, Complex s) { return 1.0 + 2.0 * zeta * s / wn + s * s / (wn * wn); }

struct Sample {
    double f;
    Complex h;
    double w;
};

PlantFitParams decode(const Vec& x, const FitConfig& cfg) {
    PlantFitParams p;
    p.lf_corner_hz = cfg.lf_corner_hz;
    p.lf_damping = cfg.lf_damping;
    const double k = std::exp(x[0]);
    const double wz = std::exp(x[1]);
    const double zz = std::exp(x[2]);
    p.dy_num = {k, k * 2.0 * zz / wz, k / (wz * wz)};
    p.dy_pole = std::exp(x[3]);
    p.peak = {std::exp(x[4]), std::exp(x[5]), std::exp(x[6])};
    p.offpeak = {std::exp(x[7]), std::exp(x[8]), std::exp(x[9])};
    p.delay = x[10] * kDelayScale;
    return p;
}

Vec encode(const PlantFitParams& p) {
    const double k = p.dy_num[0];
    const double wz = std::sqrt(k / p.dy_num[2]);
    const double zz = p.dy_num[1] * wz / (2.0 * k);
    return {std::log(k),
            std::log(wz),
            std::log(zz),
            std::log(p.dy_pole),
            std::log(p.peak.freq_hz),
            std::log(p.peak.num_damping),
            std::log(p.peak.den_damping),
            std::log(p.offpeak.freq_hz),
            std::log(p.offpeak.num_damping),
            std::log(p.offpeak.den_damping),
            p.delay / kDelayScale};
}

double sample_cost(Complex model, Complex data, double phase_weight) {
    const double db = 20.0 * std::log10(std::abs(model) / std::abs(data));
    const double deg = std::arg(model / data) * 180.0 / std::numbers::pi;
    return db * db + phase_weight * deg * deg;
}

double cost_of(const PlantFitParams& p, const std::vector<Sample>& data, double phase_weight) {
    double num = 0.0, den = 0.0;
    for (const Sample& s : data) {
        num += s.w * sample_cost(plant_model_response(p, s.f), s.h, phase_weight);
        den += s.w;
    }
    return num / den;
}

bool in_bounds(const Vec& x, const FitConfig& cfg) {
    const auto within = [](double v, double lo, double hi) { return v >= std::log(lo) && v <= std::log(hi); };
    return within(x[0], 1e-3, 1e6) && within(x[1], 1.0, 1e5) && within(x[2], 1e-3, 50.0) && within(x[3], 1e-5, 10.0) &&
           within(x[4], 0.5 * cfg.f_lo, 2.0 * cfg.f_hi) && within(x[5], 1e-4, 10.0) && within(x[6], 1e-4, 10.0) &&
           within(x[7], 0.5 * cfg.f_lo, 2.0 * cfg.f_hi) && within(x[8], 1e-4, 10.0) && within(x[9], 1e-4, 10.0) &&
           x[10] >= 0.0 && x[10] * kDelayScale <= 0.1;
}

struct Minimum {
    Vec x;
    double f;
    int evals;
};

// Nelder-Mead with standard coefficients; re-seeds the simplex around the best point after each
// convergence until the budget is spent or a restart brings no improvement.
Minimum nelder_mead(const std::function<double(const Vec&)>& fn, Vec x0, double step, int budget) {
    int evals = 0;
    const auto eval = [&](const Vec& x) {
        ++evals;
        return fn(x);
    };
    Minimum best{x0, eval(x0), 0};
    while (evals < budget) {
        std::array<Vec, kDim + 1> pts;
        std::array<double, kDim + 1> val;
        pts[0] = best.x;
        val[0] = best.f;
        for (std::size_t i = 0; i < kDim; ++i) {
            pts[i + 1] = best.x;
            pts[i + 1][i] += step;
            val[i + 1] = eval(pts[i + 1]);
        }
        std::array<std::size_t, kDim + 1> idx;
        while (evals < budget) {
            for (std::size_t i = 0; i <= kDim; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
            const double lo = val[idx[0]], hi = val[idx[kDim]];
            if (hi - lo <= 1e-12 * (std::abs(lo) + 1e-12)) break;

            Vec c{};
            for (std::size_t i = 0; i < kDim; ++i)
                for (std::size_t d = 0; d < kDim; ++d) c[d] += pts[idx[i]][d] / kDim;
            const auto along = [&](double t) {
                Vec p;
                for (std::size_t d = 0; d < kDim; ++d) p[d] = c[d] + t * (pts[idx[kDim]][d] - c[d]);
                return p;
            };
            const Vec xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < lo) {
                const Vec xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    pts[idx[kDim]] = xe;
                    val[idx[kDim]] = fe;
                } else {
                    pts[idx[kDim]] = xr;
                    val[idx[kDim]] = fr;
                }
            } else if (fr < val[idx[kDim - 1]]) {
                pts[idx[kDim]] = xr;
                val[idx[kDim]] = fr;
            } else {
                const bool outside = fr < hi;
                const Vec xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : hi)) {
                    pts[idx[kDim]] = xc;
                    val[idx[kDim]] = fc;
                } else {
                    for (std::size_t i = 1; i <= kDim; ++i) {
                        Vec& p = pts[idx[i]];
                        for (std::size_t d = 0; d < kDim; ++d) p[d] = pts[idx[0]][d] + 0.5 * (p[d] - pts[idx[0]][d]);
                        val[idx[i]] = eval(p);
                    }
                }
            }
        }
        std::size_t b = 0;
        for (std::size_t i = 1; i <= kDim; ++i)
            if (val[i] < val[b]) b = i;
        const bool improved = val[b] < best.f * (1.0 - 1e-9);
        if (val[b] < best.f) best = {pts[b], val[b], 0};
        if (!improved) break;
        step *= 0.5;
    }
    best.evals = evals;
    return best;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Stage 1: resonances from the local prominence of |H s / P_lf|, gain from its low-frequency
// plateau, delay by a line search on the remaining cost.
PlantFitParams stage_one(const std::vector<Sample>& data, const FitConfig& cfg) {
    std::vector<double> mag(data.size());
    PlantFitParams lf_only;
    lf_only.lf_corner_hz = cfg.lf_corner_hz;
    lf_only.lf_damping = cfg.lf_damping;
    const ContinuousTF lf = lowpass_component(lf_only);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Complex s(0.0, kTwoPi * data[i].f);
        mag[i] = 20.0 * std::log10(std::abs(data[i].h * s / tf_eval(lf, data[i].f)));
    }

    std::vector<double> prominence(data.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<double> around;
        for (std::size_t j = 0; j < data.size(); ++j)
            if (std::abs(std::log10(data[j].f / data[i].f)) <= 0.12) around.push_back(mag[j]);
        prominence[i] = mag[i] - median(around);
    }
    std::size_t ip = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (prominence[i] > prominence[ip]) ip = i;
    std::size_t io = data.size() - 1;
    for (std::size_t i = ip + 1; i < data.size(); ++i)
        if (prominence[i] < prominence[io]) io = i;

    PlantFitParams p;
    p.lf_corner_hz = cfg.lf_corner_hz;
    p.lf_damping = cfg.lf_damping;
    std::vector<double> low;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, data.size()); ++i) low.push_back(std::pow(10.0, mag[i] / 20.0));
    const double k = median(low);
    const double wz = kTwoPi * 20.0;
    p.dy_num = {k, k * 2.0 * 0.7 / wz, k / (wz * wz)};
    p.dy_pole = 0.05;
    const double zeta0 = 0.02;
    p.peak = {data[ip].f, zeta0 * std::pow(10.0, std::max(prominence[ip], 0.0) / 20.0), zeta0};
    p.offpeak = {data[io].f, zeta0, zeta0 * std::pow(10.0, std::max(-prominence[io], 0.0) / 20.0)};

    double best_cost = std::numeric_limits<double>::infinity();
    double best_delay = 0.0;
    for (int i = 0; i <= 200; ++i) {
        p.delay = 0.0005 * i;
        const double c = cost_of(p, data, cfg.phase_weight);
        if (c < best_cost) {
            best_cost = c;
            best_delay = p.delay;
        }
    }
    p.delay = best_delay;
    return p;
}

}  // namespace

Complex plant_model_response(const PlantFitParams& p, double freq_hz) {
    const Complex s(0.0, kTwoPi * freq_hz);
    const double wlf = kTwoPi * p.lf_corner_hz;
    Complex h = 1.0 / second_order(wlf, p.lf_damping, s);
    h *= (p.dy_num[0] + s * (p.dy_num[1] + s * p.dy_num[2])) / (s * (1.0 + p.dy_pole * s));
    h *= second_order(kTwoPi * p.peak.freq_hz, p.peak.num_damping, s) /
         second_order(kTwoPi * p.peak.freq_hz, p.peak.den_damping, s);
    h *= second_order(kTwoPi * p.offpeak.freq_hz, p.offpeak.num_damping, s) /
         second_order(kTwoPi * p.offpeak.freq_hz, p.offpeak.den_damping, s);
    return h * std::polar(1.0, -kTwoPi * freq_hz * p.delay);
}

std::vector<BandError> band_errors(const PlantFitParams& p, const FRFEstimate& frf,
                                   const std::vector<std::pair<double, double>>& bands) {
    std::vector<BandError> out;
    for (const auto& [lo, hi] : bands) {
        BandError e{lo, hi, 0, 0.0, 0.0};
        for (std::size_t i = 0; i < frf.freqs.size(); ++i) {
            const double f = frf.freqs[i];
            if (!frf.trusted[i] || f < lo || f > hi) continue;
            const Complex ratio = plant_model_response(p, f) / frf.h[i];
            e.max_mag_db = std::max(e.max_mag_db, std::abs(20.0 * std::log10(std::abs(ratio))));
            e.max_phase_deg = std::max(e.max_phase_deg, std::abs(std::arg(ratio)) * 180.0 / std::numbers::pi);
            ++e.bins;
        }
        out.push_back(e);
    }
    return out;
}

FitResult fit_plant_model(const FRFEstimate& frf, const FitConfig& cfg) {
    if (!(cfg.f_lo > 0.0 && cfg.f_hi > cfg.f_lo)) throw std::invalid_argument("fit band must satisfy 0 < f_lo < f_hi");
    if (cfg.restarts < 1) throw std::invalid_argument("fit needs at least one restart");
    std::vector<Sample> data;
    std::size_t in_band = 0;
    for (std::size_t i = 0; i < frf.freqs.size(); ++i) {
        if (frf.freqs[i] < cfg.f_lo || frf.freqs[i] > cfg.f_hi) continue;
        ++in_band;
        if (frf.trusted[i] && std::abs(frf.h[i]) > 0.0) data.push_back({frf.freqs[i], frf.h[i], frf.coherence[i]});
    }
    if (in_band == 0 || data.size() * 2 < in_band || data.size() < kDim + 1)
        throw std::invalid_argument(
            fmt::format("fit needs at least half of the in-band bins trusted ({} of {})", data.size(), in_band));

    FitResult r;
    r.initial = stage_one(data, cfg);
    r.initial_cost = cost_of(r.initial, data, cfg.phase_weight);

    const auto objective = [&](const Vec& x) {
        if (!in_bounds(x, cfg)) return 1e12;
        const double c = cost_of(decode(x, cfg), data, cfg.phase_weight);
        return std::isfinite(c) ? c : 1e12;
    };

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> jitter(0.0, 0.3);
    const Vec x0 = encode(r.initial);
    Minimum best{x0, objective(x0), 0};
    for (int k = 0; k < cfg.restarts; ++k) {
        Vec start = x0;
        if (k > 0)
            for (std::size_t d = 0; d < kDim; ++d) start[d] += jitter(rng) * (d == 10 ? 0.5 : 1.0);
        if (!in_bounds(start, cfg)) start = x0;
        const Minimum m = nelder_mead(objective, start, 0.2, cfg.max_evaluations);
        if (m.f < best.f) {
            best = m;
            r.best_restart = k;
        }
    }

    r.cost = best.f;
    r.converged = best.f <= cfg.cost_threshold;
    if (r.converged) {
        r.params = decode(best.x, cfg);
        r.diagnostic = fmt::format("converged: weighted cost {:.4g} (stage 1: {:.4g})", r.cost, r.initial_cost);
    } else {
        r.params = r.initial;
        r.diagnostic = fmt::format("not converged: best weighted cost {:.4g} exceeds {:.4g}; stage-1 parameters returned",
                                   r.cost, cfg.cost_threshold);
    }
    r.band_errors = band_errors(r.params, frf, {{1.0, 5.0}, {5.0, 15.0}, {15.0, 30.0}, {30.0, 60.0}});
    return r;
}

std::string fit_report(const FitResult& r) {
    const PlantFitParams& p = r.params;
    std::string out;
    out += fmt::format("status: {}\n", r.converged ? "converged" : "not_converged");
    out += fmt::format("diagnostic: {}\n", r.diagnostic);
    out += fmt::format("cost: {:.6g}\ninitial_cost: {:.6g}\nbest_restart: {}\n", r.cost, r.initial_cost, r.best_restart);
    out += fmt::format("lf_corner_hz: {:.6g}\nlf_damping: {:.6g}\n", p.lf_corner_hz, p.lf_damping);
    out += fmt::format("dy_num: [{:.6g}, {:.6g}, {:.6g}]\ndy_pole: {:.6g}\n", p.dy_num[0], p.dy_num[1], p.dy_num[2],
                       p.dy_pole);
    out += fmt::format("peak: {{freq_hz: {:.6g}, num_damping: {:.6g}, den_damping: {:.6g}}}\n", p.peak.freq_hz,
                       p.peak.num_damping, p.peak.den_damping);
    out += fmt::format("offpeak: {{freq_hz: {:.6g}, num_damping: {:.6g}, den_damping: {:.6g}}}\n", p.offpeak.freq_hz,
                       p.offpeak.num_damping, p.offpeak.den_damping);
    out += fmt::format("delay_s: {:.6g}\n", p.delay);
    out += "band_errors:\n  f_lo_hz  f_hi_hz  bins  max_mag_db  max_phase_deg\n";
    for (const BandError& e : r.band_errors)
        out += fmt::format("  {:7.2f}  {:7.2f}  {:4d}  {:10.4f}  {:13.4f}\n", e.f_lo, e.f_hi, e.bins, e.max_mag_db,
                           e.max_phase_deg);
    return out;
}

}  // namespace tailsitter
