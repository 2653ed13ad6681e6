#include "tailsitter/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tailsitter::poly {

Coeffs multiply(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    Coeffs out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Coeffs add(std::span<const double> a, std::span<const double> b) {
    Coeffs out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Coeffs scale(std::span<const double> a, double k) {
    Coeffs out(a.begin(), a.end());
    for (double& c : out) c *= k;
    return out;
}

Coeffs trim(Coeffs a) {
    while (!a.empty() && a.back() == 0.0) a.pop_back();
    return a;
}

int degree(std::span<const double> a) {
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i)
        if (a[static_cast<std::size_t>(i)] != 0.0) return i;
    return -1;
}

Complex evaluate(std::span<const double> a, Complex x) {
    Complex acc = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Coeffs from_roots(std::span<const Complex> roots) {
    std::vector<Complex> c{1.0};
    for (const Complex& r : roots) {
        std::vector<Complex> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    Coeffs out(c.size());
    std::transform(c.begin(), c.end(), out.begin(), [](Complex z) { return z.real(); });
    return out;
}

namespace {

Complex polish(std::span<const double> a, Complex x) {
    Coeffs d(a.size() > 1 ? a.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) d[i - 1] = static_cast<double>(i) * a[i];
    for (int it = 0; it < 8; ++it) {
        const Complex f = evaluate(a, x);
        const Complex df = evaluate(d, x);
        if (std::abs(df) == 0.0) break;
        const Complex step = f / df;
        const Complex next = x - step;
        if (std::abs(evaluate(a, next)) >= std::abs(f)) break;
        x = next;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

}  // namespace

std::vector<Complex> roots(std::span<const double> a_in) {
    Coeffs a = trim(Coeffs(a_in.begin(), a_in.end()));
    if (a.empty()) throw std::invalid_argument("roots of the zero polynomial");

    std::vector<Complex> out;
    std::size_t zeros = 0;
    while (zeros < a.size() && a[zeros] == 0.0) ++zeros;
    out.assign(zeros, Complex(0.0, 0.0));
    a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(zeros));

    const int n = static_cast<int>(a.size()) - 1;
    if (n <= 0) return out;
    if (n == 1) {
        out.emplace_back(-a[0] / a[1], 0.0);
        return out;
    }

    // Balance by a power-of-two frequency scale so coefficients spanning many
    // decades (e.g. 1 + 3e-3 s + 5e-6 s^2) produce a well-conditioned companion matrix.
    const double geo = std::pow(std::abs(a[0] / a[static_cast<std::size_t>(n)]), 1.0 / n);
    const double sc = std::exp2(std::round(std::log2(geo > 0 ? geo : 1.0)));
    Coeffs b(a.size());
    for (int i = 0; i <= n; ++i) b[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] * std::pow(sc, i);

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -b[static_cast<std::size_t>(i)] / b[static_cast<std::size_t>(n)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("polynomial root finding failed");

    std::vector<Complex> found;
    for (int i = 0; i < n; ++i) found.push_back(polish(a, es.eigenvalues()[i] * sc));

    // Snap to exact conjugate pairs / real values.
    std::sort(found.begin(), found.end(), [](Complex x, Complex y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    std::vector<bool> used(found.size(), false);
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (used[i]) continue;
        const Complex z = found[i];
        const double tol = 1e-9 * std::max(1.0, std::abs(z));
        if (std::abs(z.imag()) <= tol) {
            out.emplace_back(z.real(), 0.0);
            used[i] = true;
            continue;
        }
        std::size_t best = found.size();
        double best_d = 0.0;
        for (std::size_t j = 0; j < found.size(); ++j) {
            if (used[j] || j == i) continue;
            const double d = std::abs(found[j] - std::conj(z));
            if (best == found.size() || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        used[i] = true;
        if (best != found.size()) {
            used[best] = true;
            const double re = 0.5 * (z.real() + found[best].real());
            const double im = 0.5 * (std::abs(z.imag()) + std::abs(found[best].imag()));
            out.emplace_back(re, im);
            out.emplace_back(re, -im);
        } else {
            out.emplace_back(z.real(), 0.0);
        }
    }
    return out;
}

}  // namespace tailsitter::poly
