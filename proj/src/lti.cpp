#include "tailsitter/lti.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tailsitter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Rational part in root form, for continuous phase evaluation.
class FactoredTF {
public:
    explicit FactoredTF(const ContinuousTF& tf)
        : zeros_(poly::roots(tf.num)), poles_(poly::roots(tf.den)), delay_(tf.delay) {
        const auto n = poly::trim(tf.num);
        const auto d = poly::trim(tf.den);
        negative_ = (n.back() / d.back()) < 0.0;
    }

    double phase_deg(double freq_hz) const {
        const double w = kTwoPi * freq_hz;
        double ph = negative_ ? -std::numbers::pi : 0.0;
        for (const Complex& z : zeros_) ph += factor_arg(w, z);
        for (const Complex& p : poles_) ph -= factor_arg(w, p);
        return ph * kRadToDeg - 360.0 * freq_hz * delay_;
    }

private:
    // arg(jw - r) on a branch that is continuous in w > 0.
    static double factor_arg(double w, Complex r) {
        const double re = -r.real();
        const double im = w - r.imag();
        if (re > 0.0) return std::atan(im / re);
        if (re < 0.0) return std::numbers::pi - std::atan(im / -re);
        return im >= 0.0 ? std::numbers::pi / 2 : -std::numbers::pi / 2;
    }

    std::vector<Complex> zeros_;
    std::vector<Complex> poles_;
    double delay_;
    bool negative_ = false;
};

double db(Complex c) { return 20.0 * std::log10(std::abs(c)); }

template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
    // f(lo) and f(hi) have opposite signs (or f(lo) >= 0 > f(hi)).
    const bool lo_sign = f(lo) >= 0.0;
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = std::sqrt(lo * hi);
        if ((f(mid) >= 0.0) == lo_sign)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

}  // namespace

ContinuousTF::ContinuousTF(poly::Coeffs n, poly::Coeffs d, double dly)
    : num(std::move(n)), den(std::move(d)), delay(dly) {
    if (poly::degree(den) < 0) throw std::invalid_argument("transfer function denominator is all zero");
    if (num.empty()) throw std::invalid_argument("transfer function numerator is empty");
    if (!(delay >= 0.0) || !std::isfinite(delay)) throw std::invalid_argument("delay must be finite and >= 0");
    for (double c : num)
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite numerator coefficient");
    for (double c : den)
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite denominator coefficient");
}

bool ContinuousTF::proper() const { return poly::degree(num) <= poly::degree(den); }

Complex tf_eval(const ContinuousTF& tf, double freq_hz) {
    if (!(freq_hz > 0.0)) throw std::invalid_argument("tf_eval requires freq_hz > 0");
    const double w = kTwoPi * freq_hz;
    const Complex s(0.0, w);
    const Complex d = poly::evaluate(tf.den, s);
    double scale = 0.0;
    double wk = 1.0;
    for (double c : tf.den) {
        scale = std::max(scale, std::abs(c) * wk);
        wk *= w;
    }
    if (std::abs(d) <= 1e-12 * scale) return {std::numeric_limits<double>::infinity(), 0.0};
    return poly::evaluate(tf.num, s) / d * std::polar(1.0, -w * tf.delay);
}

ContinuousTF tf_series(const ContinuousTF& a, const ContinuousTF& b) {
    return {poly::multiply(a.num, b.num), poly::multiply(a.den, b.den), a.delay + b.delay};
}

ContinuousTF tf_parallel(const ContinuousTF& a, const ContinuousTF& b) {
    if (a.delay != b.delay) throw std::invalid_argument("parallel connection needs equal delays");
    return {poly::add(poly::multiply(a.num, b.den), poly::multiply(b.num, a.den)), poly::multiply(a.den, b.den),
            a.delay};
}

ContinuousTF butterworth2(double corner_hz) {
    if (!(corner_hz > 0.0)) throw std::invalid_argument("butterworth2 corner must be > 0");
    const double wn = kTwoPi * corner_hz;
    return {{1.0}, {1.0, std::numbers::sqrt2 / wn, 1.0 / (wn * wn)}};
}

ContinuousTF notch(double center_hz, double k1, double k2) {
    if (!(center_hz > 0.0)) throw std::invalid_argument("notch center must be > 0");
    if (!(k2 > 0.0) || !(k1 > k2))
        throw std::invalid_argument(fmt::format("notch needs k1 > k2 > 0 (got k1={}, k2={})", k1, k2));
    const double w0 = kTwoPi * center_hz;
    const double a = 1.0 / (w0 * w0);
    return {{1.0, k2 / w0, a}, {1.0, k1 / w0, a}};
}

ContinuousTF pid_tf(double kp, double ki, double kd, double deriv_corner_hz) {
    if (kp < 0.0 || ki < 0.0 || kd < 0.0) throw std::invalid_argument("PID gains must be >= 0");
    if (kp == 0.0 && ki == 0.0 && kd == 0.0) throw std::invalid_argument("PID gains are all zero");
    const ContinuousTF b = butterworth2(deriv_corner_hz);
    const poly::Coeffs& d = b.den;  // 1 + a s + b s^2
    if (ki == 0.0) {
        // (kp D + kd s) / D
        return {poly::add(poly::scale(d, kp), poly::Coeffs{0.0, kd}), d};
    }
    // (kp s D + ki D + kd s^2) / (s D)
    const poly::Coeffs sd = poly::multiply(poly::Coeffs{0.0, 1.0}, d);
    poly::Coeffs num = poly::add(poly::scale(sd, kp), poly::scale(d, ki));
    num = poly::add(num, poly::Coeffs{0.0, 0.0, kd});
    return {num, sd};
}

PlantFitParams PlantFitParams::reference_defaults() {
    PlantFitParams p;
    // 1 + 0.00321 s + 0.00000531 s^2  ->  wn = 1/sqrt(5.31e-6), zeta = 0.00321 wn / 2
    const double lf_wn = 1.0 / std::sqrt(0.00000531);
    p.lf_corner_hz = lf_wn / kTwoPi;
    p.lf_damping = 0.00321 * lf_wn / 2.0;
    p.dy_num = {260.0, 3.764, 0.01362};
    p.dy_pole = 0.0637;
    const auto mode = [](double s2, double num_s, double den_s) {
        const double wn = 1.0 / std::sqrt(s2);
        return ModeParams{wn / kTwoPi, num_s * wn / 2.0, den_s * wn / 2.0};
    };
    p.peak = mode(0.000129, 0.00239, 0.000341);
    p.offpeak = mode(0.0000348, 0.000118, 0.0013);
    p.delay = 0.021;
    return p;
}

void PlantFitParams::validate() const {
    const auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be > 0", what));
    };
    positive(lf_corner_hz, "lf_corner_hz");
    positive(lf_damping, "lf_damping");
    positive(peak.freq_hz, "peak frequency");
    positive(offpeak.freq_hz, "offpeak frequency");
    positive(peak.num_damping, "peak num damping");
    positive(peak.den_damping, "peak den damping");
    positive(offpeak.num_damping, "offpeak num damping");
    positive(offpeak.den_damping, "offpeak den damping");
    if (dy_pole < 0.0) throw std::invalid_argument("dy_pole must be >= 0");
    if (!(delay >= 0.0 && delay <= 0.1)) throw std::invalid_argument("delay must lie in [0, 0.1] s");
}

ContinuousTF lowpass_component(const PlantFitParams& p) {
    const double wn = kTwoPi * p.lf_corner_hz;
    return {{1.0}, {1.0, 2.0 * p.lf_damping / wn, 1.0 / (wn * wn)}};
}

ContinuousTF dynamics_component(const PlantFitParams& p) {
    return {{p.dy_num[0], p.dy_num[1], p.dy_num[2]}, {0.0, 1.0, p.dy_pole}};
}

ContinuousTF mode_component(const ModeParams& m) {
    const double wn = kTwoPi * m.freq_hz;
    const double a = 1.0 / (wn * wn);
    return {{1.0, 2.0 * m.num_damping / wn, a}, {1.0, 2.0 * m.den_damping / wn, a}};
}

ContinuousTF fitted_plant(const PlantFitParams& p) {
    p.validate();
    ContinuousTF out = tf_series(lowpass_component(p), dynamics_component(p));
    out = tf_series(out, mode_component(p.peak));
    out = tf_series(out, mode_component(p.offpeak));
    out.delay += p.delay;
    return out;
}

std::vector<double> log_space(double f_lo, double f_hi, std::size_t n) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo) || n < 2) throw std::invalid_argument("log_space needs 0 < f_lo < f_hi, n >= 2");
    std::vector<double> out(n);
    const double a = std::log10(f_lo);
    const double b = std::log10(f_hi);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = f_lo;
    out.back() = f_hi;
    return out;
}

std::vector<double> FrequencyResponse::magnitude_db() const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), db);
    return out;
}

FrequencyResponse frequency_response(const ContinuousTF& tf, const std::vector<double>& freqs) {
    FrequencyResponse r;
    r.freqs = freqs;
    r.values.reserve(freqs.size());
    for (double f : freqs) r.values.push_back(tf_eval(tf, f));
    return r;
}

double unwrapped_phase_deg(const ContinuousTF& tf, double freq_hz) { return FactoredTF(tf).phase_deg(freq_hz); }

bool StabilityMargins::conditionally_unstable() const {
    std::size_t downward = 0;
    bool nonpositive = false;
    for (const auto& c : crossings) {
        if (c.downward) ++downward;
        if (c.phase_margin_deg <= 0.0) nonpositive = true;
    }
    return crossings.size() > 1 && downward >= 1 && nonpositive;
}

StabilityMargins margins(const ContinuousTF& loop, double f_lo, double f_hi) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) throw std::invalid_argument("margin search band must satisfy 0 < lo < hi");
    const FactoredTF fac(loop);
    const auto n = static_cast<std::size_t>(std::ceil(1000.0 * std::log10(f_hi / f_lo))) + 1;
    const auto grid = log_space(f_lo, f_hi, std::max<std::size_t>(n, 2));

    const auto lm = [&](double f) { return db(tf_eval(loop, f)); };
    const auto ph = [&](double f) { return fac.phase_deg(f); };
    const auto cl = [&](double f) {
        const Complex l = tf_eval(loop, f);
        return db(l / (1.0 + l)) + 3.0103;
    };
    constexpr double kTol = 1e-7;

    StabilityMargins m;
    double prev_lm = lm(grid[0]);
    double prev_ph = ph(grid[0]);
    double prev_cl = cl(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double f0 = grid[i - 1];
        const double f1 = grid[i];
        const double cur_lm = lm(f1);
        const double cur_ph = ph(f1);
        const double cur_cl = cl(f1);

        if ((prev_lm >= 0.0) != (cur_lm >= 0.0) && std::isfinite(prev_lm) && std::isfinite(cur_lm)) {
            const double fc = bisect(lm, f0, f1, kTol);
            GainCrossing c{fc, 180.0 + ph(fc), prev_lm >= 0.0};
            m.crossings.push_back(c);
            if (c.downward && !m.gain_crossover_hz) {
                m.gain_crossover_hz = fc;
                m.phase_margin_deg = c.phase_margin_deg;
            }
        }
        // Phase crossing any odd multiple of 180 degrees.
        const double k0 = std::floor((prev_ph + 180.0) / 360.0);
        const double k1 = std::floor((cur_ph + 180.0) / 360.0);
        if (k0 != k1 && !m.phase_crossover_hz) {
            const double target = 360.0 * std::max(k0, k1) - 180.0;
            const double fp = bisect([&](double f) { return ph(f) - target; }, f0, f1, kTol);
            m.phase_crossover_hz = fp;
            m.gain_margin_db = -lm(fp);
        }
        if (!m.closed_loop_bandwidth_hz && prev_cl >= 0.0 && cur_cl < 0.0) {
            m.closed_loop_bandwidth_hz = bisect(cl, f0, f1, kTol);
        }
        prev_lm = cur_lm;
        prev_ph = cur_ph;
        prev_cl = cur_cl;
    }
    return m;
}

double magnitude_slope(const ContinuousTF& loop, double f_lo, double f_hi) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) throw std::invalid_argument("slope band must satisfy 0 < lo < hi");
    const auto f = log_space(f_lo, f_hi, 50);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double fi : f) {
        const double x = std::log10(fi);
        const double y = db(tf_eval(loop, fi));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(f.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double magnitude_extremum_hz(const ContinuousTF& tf, double f_lo, double f_hi, bool maximum) {
    const auto grid = log_space(f_lo, f_hi, 4001);
    const auto score = [&](double f) {
        const double m = std::abs(tf_eval(tf, f));
        return maximum ? m : -m;
    };
    std::size_t best = 0;
    double best_score = score(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double s = score(grid[i]);
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }
    double a = std::log(grid[best == 0 ? 0 : best - 1]);
    double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    for (int i = 0; i < 100 && b - a > 1e-12; ++i) {
        if (score(std::exp(c)) > score(std::exp(d)))
            b = d;
        else
            a = c;
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return std::exp(0.5 * (a + b));
}

std::string bode_csv(const ContinuousTF& tf, double f_lo, double f_hi, int points_per_decade) {
    if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
    const auto n = static_cast<std::size_t>(std::ceil(points_per_decade * std::log10(f_hi / f_lo))) + 1;
    const FactoredTF fac(tf);
    std::string out = "freq_hz,mag_db,phase_deg\n";
    for (double f : log_space(f_lo, f_hi, std::max<std::size_t>(n, 2))) {
        out += fmt::format("{:.10g},{:.10g},{:.10g}\n", f, db(tf_eval(tf, f)), fac.phase_deg(f));
    }
    return out;
}

}  // namespace tailsitter
