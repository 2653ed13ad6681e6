#include "tailsitter/sysid.hpp"

#include "tailsitter/spectrum.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tailsitter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CrossSpectra {
    double suu = 0.0;
    double syy = 0.0;
    std::complex<double> suy = 0.0;
};

void finish_bin(FRFEstimate& out, const CrossSpectra& s, double threshold) {
    if (s.suu > 0.0 && s.syy > 0.0) {
        out.h.push_back(s.suy / s.suu);
        out.coherence.push_back(std::clamp(std::norm(s.suy) / (s.suu * s.syy), 0.0, 1.0));
    } else {
        out.h.emplace_back(0.0, 0.0);
        out.coherence.push_back(0.0);
    }
    out.trusted.push_back(out.coherence.back() >= threshold);
}

std::vector<double> demeaned(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - m;
    return out;
}

CrossSpectra smoothed_bin(const std::vector<std::complex<double>>& u, const std::vector<std::complex<double>>& y,
                          double df, double f, double width) {
    CrossSpectra s;
    const auto lo = static_cast<long>(std::ceil((f - width / 2.0) / df));
    const auto hi = static_cast<long>(std::floor((f + width / 2.0) / df));
    for (long k = std::max(1L, lo); k <= hi && k < static_cast<long>(u.size()); ++k) {
        const double w = 0.5 + 0.5 * std::cos(kTwoPi * (static_cast<double>(k) * df - f) / width);
        const auto i = static_cast<std::size_t>(k);
        s.suu += w * std::norm(u[i]);
        s.syy += w * std::norm(y[i]);
        s.suy += w * std::conj(u[i]) * y[i];
    }
    return s;
}

CrossSpectra welch_bin(const std::vector<double>& u, const std::vector<double>& y, double fs, double f,
                       const FrfConfig& cfg, std::vector<double>& window) {
    const std::size_t n = u.size();
    const std::size_t len = std::min(n, static_cast<std::size_t>(std::llround(cfg.cycles_per_window * fs / f)));
    const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(len * (1.0 - cfg.overlap))));
    window.resize(len);
    for (std::size_t k = 0; k < len; ++k)
        window[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(len));
    const std::complex<double> rot = std::polar(1.0, -kTwoPi * f / fs);

    CrossSpectra s;
    for (std::size_t start = 0; start + len <= n; start += hop) {
        double mu = 0.0, my = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            mu += u[start + k];
            my += y[start + k];
        }
        mu /= static_cast<double>(len);
        my /= static_cast<double>(len);
        std::complex<double> xu = 0.0, xy = 0.0, ph = 1.0;
        for (std::size_t k = 0; k < len; ++k) {
            xu += window[k] * (u[start + k] - mu) * ph;
            xy += window[k] * (y[start + k] - my) * ph;
            ph *= rot;
            if ((k & 1023) == 1023) ph /= std::abs(ph);
        }
        s.suu += std::norm(xu);
        s.syy += std::norm(xy);
        s.suy += std::conj(xu) * xy;
    }
    return s;
}

}  // namespace

void ChirpConfig::validate() const {
    if (!(sample_hz > 0.0)) throw std::invalid_argument("chirp sample_hz must be > 0");
    if (!(f0 > 0.0 && f1 >= f0 && f1 < sample_hz / 2)) throw std::invalid_argument("chirp needs 0 < f0 <= f1 < fs/2");
    if (!(duration > 0.0)) throw std::invalid_argument("chirp duration must be > 0");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("chirp amplitude must be >= 0");
}

double chirp_frequency(const ChirpConfig& cfg, double t) {
    if (cfg.f1 == cfg.f0) return cfg.f0;
    const double ln_k = std::log(cfg.f1 / cfg.f0) / cfg.duration;
    return cfg.f0 * std::exp(ln_k * t);
}

TimeSeries chirp(const ChirpConfig& cfg) {
    cfg.validate();
    TimeSeries out;
    out.sample_hz = cfg.sample_hz;
    const auto n = static_cast<std::size_t>(std::llround(cfg.duration * cfg.sample_hz));
    out.values.resize(n);
    const double ln_k = cfg.f1 == cfg.f0 ? 0.0 : std::log(cfg.f1 / cfg.f0) / cfg.duration;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_hz;
        // expm1 keeps phi(0) exactly 0 and stays accurate for small ln k t.
        const double phi = ln_k == 0.0 ? kTwoPi * cfg.f0 * t : kTwoPi * cfg.f0 * std::expm1(ln_k * t) / ln_k;
        out.values[i] = cfg.amplitude * std::sin(phi);
    }
    return out;
}

double FRFEstimate::trusted_fraction() const {
    if (trusted.empty()) return 0.0;
    return static_cast<double>(std::count(trusted.begin(), trusted.end(), true)) / static_cast<double>(trusted.size());
}

std::string FRFEstimate::to_csv() const {
    std::string out = "freq_hz,re,im,coherence\n";
    for (std::size_t i = 0; i < freqs.size(); ++i)
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", freqs[i], h[i].real(), h[i].imag(), coherence[i]);
    return out;
}

FRFEstimate FRFEstimate::from_csv(const std::string& text, double coherence_threshold) {
    std::istringstream in(text);
    std::string line;
    FRFEstimate out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.rfind("freq_hz", 0) == 0) continue;
        std::istringstream ls(line);
        double f, re, im, c;
        char a, b, d;
        if (!(ls >> f >> a >> re >> b >> im >> d >> c))
            throw std::invalid_argument(fmt::format("FRF line {}: expected freq_hz,re,im,coherence", lineno));
        out.freqs.push_back(f);
        out.h.emplace_back(re, im);
        out.coherence.push_back(c);
        out.trusted.push_back(c >= coherence_threshold);
    }
    return out;
}

FRFEstimate estimate_frf(const TimeSeries& u, const TimeSeries& y, const FrfConfig& cfg) {
    if (u.values.size() != y.values.size() || u.sample_hz != y.sample_hz)
        throw std::invalid_argument("FRF input and output must share length and sample rate");
    if (u.values.size() < 16) throw std::invalid_argument("FRF needs at least 16 samples");
    if (!(cfg.f_lo > 0.0 && cfg.f_hi > cfg.f_lo && cfg.f_hi < u.sample_hz / 2))
        throw std::invalid_argument("FRF band must satisfy 0 < f_lo < f_hi < fs/2");
    if (!(cfg.cycles_per_window >= 1.0)) throw std::invalid_argument("cycles_per_window must be >= 1");
    if (!(cfg.overlap >= 0.0 && cfg.overlap < 1.0)) throw std::invalid_argument("overlap must lie in [0, 1)");

    if (cfg.min_kernel_bins < 1) throw std::invalid_argument("min_kernel_bins must be >= 1");

    const double fs = u.sample_hz;
    const std::size_t n = u.values.size();
    FRFEstimate out;
    out.freqs = log_space(cfg.f_lo, cfg.f_hi, cfg.n_freqs);
    if (cfg.method == FrfMethod::smoothed) {
        const auto ud = real_dft(demeaned(u.values));
        const auto yd = real_dft(demeaned(y.values));
        const double df = fs / static_cast<double>(n);
        for (double f : out.freqs) {
            const double width = std::max(f / cfg.cycles_per_window, cfg.min_kernel_bins * df);
            finish_bin(out, smoothed_bin(ud, yd, df, f, width), cfg.coherence_threshold);
        }
    } else {
        std::vector<double> window;
        for (double f : out.freqs)
            finish_bin(out, welch_bin(u.values, y.values, fs, f, cfg, window), cfg.coherence_threshold);
    }
    return out;
}

std::string SweepRecord::to_csv() const {
    std::string out = "t,u_injected,u_total,omega_meas\n";
    for (std::size_t i = 0; i < u_injected.values.size(); ++i)
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", u_injected.time(i), u_injected.values[i],
                           u_total.values[i], omega_meas.values[i]);
    return out;
}

SweepRecord sweep_experiment(AxisPlant& plant, const ChirpConfig& cfg, RateController* controller, int axis,
                             double divergence_limit) {
    if (std::abs(plant.sample_hz() - cfg.sample_hz) > 1e-9)
        throw std::invalid_argument("sweep sample rate must match the plant rate");
    if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
    const TimeSeries injected = chirp(cfg);
    SweepRecord rec;
    rec.u_injected = injected;
    rec.u_total.sample_hz = rec.omega_meas.sample_hz = cfg.sample_hz;
    rec.u_total.values.reserve(injected.values.size());
    rec.omega_meas.values.reserve(injected.values.size());
    for (std::size_t i = 0; i < injected.values.size(); ++i) {
        const double y = plant.measured();
        if (!std::isfinite(y) || std::abs(y) > divergence_limit)
            throw DivergenceError(fmt::format("sweep diverged at t = {:.3f} s (|omega| = {:.3g} rad/s)", injected.time(i), y),
                                  injected.time(i));
        double tau = 0.0;
        if (controller) {
            Vec3 meas = Vec3::Zero();
            meas[axis] = y;
            tau = controller->step(meas, Vec3::Zero()).torque[axis];
        }
        const double total = tau + injected.values[i];
        rec.omega_meas.values.push_back(y);
        rec.u_total.values.push_back(total);
        plant.apply(total);
    }
    return rec;
}

}  // namespace tailsitter
