#include <fmt/format.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "tailsitter/lti.hpp"

namespace tailsitter {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// A factor normalized to unit constant term, or the bare factor s for a root at the origin.
struct Factor {
    poly::Coeffs c;
    double wn = 0.0;    // natural frequency, rad/s; 0 for s
    double zeta = 1.0;  // damping of a complex pair
};

// One first/second-order section in s.
struct SSection {
    std::vector<Factor> num;
    std::vector<Factor> den;
    double gain = 1.0;
    int capacity = 0;  // free numerator slots
    double key = 0.0;  // largest pole magnitude, rad/s
};

Factor real_factor(double r) {
    if (r == 0.0) return {{0.0, 1.0}, 0.0};
    return {{1.0, -1.0 / r}, std::abs(r)};
}

Factor pair_factor(Complex r) {
    const double m2 = std::norm(r);
    const double wn = std::sqrt(m2);
    return {{1.0, -2.0 * r.real() / m2, 1.0 / m2}, wn, -r.real() / wn};
}

struct RootGroups {
    std::vector<Complex> pairs;  // one representative (imag > 0) per conjugate pair
    std::vector<double> reals;
};

RootGroups group_roots(const std::vector<Complex>& roots) {
    RootGroups g;
    for (const Complex& r : roots) {
        if (r.imag() > 0.0)
            g.pairs.push_back(r);
        else if (r.imag() == 0.0)
            g.reals.push_back(r.real());
    }
    const auto by_mag = [](auto a, auto b) { return std::abs(a) < std::abs(b); };
    std::sort(g.pairs.begin(), g.pairs.end(), by_mag);
    std::sort(g.reals.begin(), g.reals.end(), by_mag);
    return g;
}

double log_distance(double a, double b) {
    return std::abs(std::log(std::max(a, 1e-9)) - std::log(std::max(b, 1e-9)));
}

std::vector<SSection> factor_sections(const ContinuousTF& tf) {
    const auto poles = group_roots(poly::roots(tf.den));
    const auto zeros = group_roots(poly::roots(tf.num));

    std::vector<SSection> secs;
    for (const Complex& p : poles.pairs) secs.push_back({{}, {pair_factor(p)}, 1.0, 2, std::abs(p)});
    for (std::size_t i = 0; i < poles.reals.size(); i += 2) {
        if (i + 1 < poles.reals.size()) {
            const double a = poles.reals[i];
            const double b = poles.reals[i + 1];
            secs.push_back({{}, {real_factor(a), real_factor(b)}, 1.0, 2, std::max(std::abs(a), std::abs(b))});
        } else {
            secs.push_back({{}, {real_factor(poles.reals[i])}, 1.0, 1, std::abs(poles.reals[i])});
        }
    }
    if (secs.empty()) secs.push_back({{}, {}, 1.0, 0, 0.0});
    std::stable_sort(secs.begin(), secs.end(), [](const SSection& a, const SSection& b) { return a.key < b.key; });

    const auto place = [&](double mag, int need) -> SSection& {
        SSection* best = nullptr;
        for (auto& s : secs) {
            if (s.capacity < need) continue;
            if (!best || log_distance(mag, s.key) < log_distance(mag, best->key)) best = &s;
        }
        if (!best) throw std::invalid_argument("improper transfer function: more zeros than poles");
        return *best;
    };
    for (const Complex& z : zeros.pairs) {
        SSection& s = place(std::abs(z), 2);
        s.num.push_back(pair_factor(z));
        s.capacity -= 2;
    }
    for (double z : zeros.reals) {
        SSection& s = place(std::abs(z), 1);
        s.num.push_back(real_factor(z));
        s.capacity -= 1;
    }

    // The lowest nonzero coefficient of every normalized factor product is 1.
    const auto lowest = [](const poly::Coeffs& c) {
        for (double v : c)
            if (v != 0.0) return v;
        return 0.0;
    };
    secs.front().gain = lowest(tf.num) / lowest(tf.den);
    return secs;
}

// Bilinear image of one factor, padded with (1 + z^-1) up to `order`; ascending in z^-1.
poly::Coeffs bilinear_factor(const poly::Coeffs& c, double k, int order) {
    const int d = static_cast<int>(c.size()) - 1;
    poly::Coeffs out(static_cast<std::size_t>(order) + 1, 0.0);
    const poly::Coeffs minus{1.0, -1.0}, plus{1.0, 1.0};
    for (int i = 0; i <= d; ++i) {
        if (c[static_cast<std::size_t>(i)] == 0.0) continue;
        poly::Coeffs term{c[static_cast<std::size_t>(i)] * std::pow(k, i)};
        for (int j = 0; j < i; ++j) term = poly::multiply(term, minus);
        for (int j = i; j < order; ++j) term = poly::multiply(term, plus);
        out = poly::add(out, term);
    }
    return out;
}

struct Warp {
    double k;
    double damping_scale = 1.0;
};
using WarpFn = std::function<Warp(const Factor&)>;

BiquadSection bilinear(const SSection& s, const WarpFn& warp) {
    const int order = std::max<int>(1, [&] {
        int n = 0;
        for (const auto& f : s.den) n += static_cast<int>(f.c.size()) - 1;
        return n;
    }());
    const auto image = [&](const std::vector<Factor>& fs) {
        poly::Coeffs out{1.0};
        int used = 0;
        for (const auto& f : fs) {
            const int d = static_cast<int>(f.c.size()) - 1;
            const Warp w = warp(f);
            poly::Coeffs c = f.c;
            if (d == 2) c[1] *= w.damping_scale;
            out = poly::multiply(out, bilinear_factor(c, w.k, d));
            used += d;
        }
        for (; used < order; ++used) out = poly::multiply(out, poly::Coeffs{1.0, 1.0});
        out.resize(3, 0.0);
        return out;
    };
    const poly::Coeffs num = image(s.num);
    const poly::Coeffs den = image(s.den);
    const double a0 = den[0];
    BiquadSection out;
    out.b0 = s.gain * num[0] / a0;
    out.b1 = s.gain * num[1] / a0;
    out.b2 = s.gain * num[2] / a0;
    out.a1 = den[1] / a0;
    out.a2 = den[2] / a0;
    return out;
}

double warp_constant(double sample_hz, std::optional<double> prewarp_hz) {
    if (prewarp_hz && *prewarp_hz > 0.0 && *prewarp_hz < 0.5 * sample_hz) {
        const double w = kTwoPi * *prewarp_hz;
        return w / std::tan(w / (2.0 * sample_hz));
    }
    return 2.0 * sample_hz;
}

// Three-tap FIR, centered on one sample borrowed from the pure delay, that least-squares fits
// the remaining ratio tf / realized over (0, up_to_hz].
BiquadSection equalizer(const ContinuousTF& tf, const BiquadCascade& realized, double up_to_hz) {
    const double fs = realized.sample_hz();
    const int points = 400;
    Eigen::MatrixXd a(2 * points, 3);
    Eigen::VectorXd b(2 * points);
    for (int i = 0; i < points; ++i) {
        const double f = up_to_hz * (i + 1) / points;
        const Complex target = tf_eval(tf, f) / realized.response(f) * std::polar(1.0, -kTwoPi * f / fs);
        for (int k = 0; k < 3; ++k) {
            const Complex e = std::polar(1.0, -kTwoPi * f * k / fs);
            a(2 * i, k) = e.real();
            a(2 * i + 1, k) = e.imag();
        }
        b(2 * i) = target.real();
        b(2 * i + 1) = target.imag();
    }
    const Eigen::Vector3d h = a.colPivHouseholderQr().solve(b);
    return {h(0), h(1), h(2), 0.0, 0.0};
}

}  // namespace

BiquadCascade::BiquadCascade(std::vector<BiquadSection> sections, double sample_hz, int delay_samples,
                             double discarded_delay_s)
    : sections_(std::move(sections)),
      state_(sections_.size(), {0.0, 0.0}),
      sample_hz_(sample_hz),
      delay_samples_(delay_samples),
      discarded_delay_s_(discarded_delay_s),
      delay_line_(static_cast<std::size_t>(std::max(delay_samples, 0)), 0.0) {
    if (!(sample_hz > 0.0)) throw std::invalid_argument("sample rate must be > 0");
    if (delay_samples < 0) throw std::invalid_argument("delay_samples must be >= 0");
}

double BiquadCascade::process(double x) {
    if (!delay_line_.empty()) {
        const double out = delay_line_[delay_pos_];
        delay_line_[delay_pos_] = x;
        delay_pos_ = (delay_pos_ + 1) % delay_line_.size();
        x = out;
    }
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const BiquadSection& s = sections_[i];
        auto& st = state_[i];
        const double y = s.b0 * x + st[0];
        st[0] = s.b1 * x - s.a1 * y + st[1];
        st[1] = s.b2 * x - s.a2 * y;
        x = y;
    }
    return x;
}

void BiquadCascade::reset() {
    std::fill(delay_line_.begin(), delay_line_.end(), 0.0);
    delay_pos_ = 0;
    for (auto& st : state_) st = {0.0, 0.0};
}

void BiquadCascade::prime(double x) {
    std::fill(delay_line_.begin(), delay_line_.end(), x);
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const BiquadSection& s = sections_[i];
        const double den = 1.0 + s.a1 + s.a2;
        if (den == 0.0) throw std::logic_error("cannot prime a section with a pole at z = 1");
        const double y = x * (s.b0 + s.b1 + s.b2) / den;
        state_[i][1] = s.b2 * x - s.a2 * y;
        state_[i][0] = s.b1 * x - s.a1 * y + state_[i][1];
        x = y;
    }
}

Complex BiquadCascade::response(double freq_hz) const {
    const Complex zi = std::polar(1.0, -kTwoPi * freq_hz / sample_hz_);
    Complex h = std::pow(zi, delay_samples_);
    for (const auto& s : sections_) {
        h *= (s.b0 + zi * (s.b1 + zi * s.b2)) / (1.0 + zi * (s.a1 + zi * s.a2));
    }
    return h;
}

double BiquadCascade::dc_gain() const { return response(0.0).real(); }

std::pair<poly::Coeffs, poly::Coeffs> BiquadCascade::polynomials() const {
    poly::Coeffs b(static_cast<std::size_t>(delay_samples_) + 1, 0.0);
    b.back() = 1.0;
    poly::Coeffs a{1.0};
    for (const auto& s : sections_) {
        b = poly::multiply(b, poly::Coeffs{s.b0, s.b1, s.b2});
        a = poly::multiply(a, poly::Coeffs{1.0, s.a1, s.a2});
    }
    return {b, a};
}

std::string BiquadCascade::to_csv() const {
    std::string out = "section,b0,b1,b2,a1,a2\n";
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const auto& s = sections_[i];
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, s.b0, s.b1, s.b2, s.a1, s.a2);
    }
    return out;
}

BiquadCascade discretize_tustin(const ContinuousTF& tf, double sample_hz, const TustinOptions& opt) {
    if (!(sample_hz > 0.0)) throw std::invalid_argument("sample_hz must be > 0");
    if (!tf.proper()) throw std::invalid_argument("improper transfer function: numerator degree exceeds denominator");

    const auto secs = factor_sections(tf);
    const double k_all = warp_constant(sample_hz, opt.prewarp_hz);
    const WarpFn warp = [&](const Factor& f) -> Warp {
        const double hz = f.wn / kTwoPi;
        if (opt.prewarp_resonances && f.wn == 0.0) return {2.0 * sample_hz};
        if (opt.prewarp_resonances && f.zeta < opt.resonance_damping && hz < 0.45 * sample_hz) {
            // Exact at the center; the map stretches frequency there by 2x/sin(2x), so the
            // prototype is widened by the same factor to keep the resonance's width.
            const double x = std::numbers::pi * hz / sample_hz;
            return {warp_constant(sample_hz, hz), 2.0 * x / std::sin(2.0 * x)};
        }
        return {k_all};
    };
    std::vector<BiquadSection> out;
    out.reserve(secs.size() + 1);
    for (const auto& s : secs) out.push_back(bilinear(s, warp));

    const double d = tf.delay * sample_hz;
    int n = static_cast<int>(std::lround(d));
    double discarded = tf.delay - n / sample_hz;
    if (opt.fractional_delay_allpass && std::abs(d - std::round(d)) > 1e-9) {
        // Thiran first order is best conditioned for a total delay in [1, 2) samples.
        n = d >= 1.0 ? static_cast<int>(std::floor(d)) - 1 : 0;
        const double frac = d - n;
        const double a = (1.0 - frac) / (1.0 + frac);
        out.push_back({a, 1.0, 0.0, a, 0.0});
        discarded = 0.0;
    }
    if (opt.equalize_hz && n >= 1) {
        out.push_back(equalizer(tf, BiquadCascade(out, sample_hz, n, 0.0), *opt.equalize_hz));
        --n;
    }
    return {std::move(out), sample_hz, n, discarded};
}

BiquadCascade discretize_tustin(const ContinuousTF& tf, double sample_hz, std::optional<double> prewarp_hz) {
    TustinOptions opt;
    opt.prewarp_hz = prewarp_hz;
    return discretize_tustin(tf, sample_hz, opt);
}

double closed_loop_spectral_radius(const std::vector<const BiquadCascade*>& path) {
    poly::Coeffs b{1.0};
    poly::Coeffs a{1.0};
    for (const BiquadCascade* c : path) {
        auto [cb, ca] = c->polynomials();
        b = poly::multiply(b, cb);
        a = poly::multiply(a, ca);
    }
    return closed_loop_spectral_radius(b, a);
}

double closed_loop_spectral_radius(const poly::Coeffs& b, const poly::Coeffs& a) {
    // 1 + B/A = 0  ->  A + B = 0 in z^-1; reverse for an ascending polynomial in z.
    poly::Coeffs ch = poly::add(a, b);
    ch = poly::trim(ch);
    std::reverse(ch.begin(), ch.end());
    double radius = 0.0;
    for (const Complex& z : poly::roots(ch)) radius = std::max(radius, std::abs(z));
    return radius;
}

}  // namespace tailsitter
