#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tailsitter::poly {

// Coefficient vectors are ascending in the variable: c[0] + c[1] x + c[2] x^2 + ...

using Coeffs = std::vector<double>;
using Complex = std::complex<double>;

Coeffs multiply(std::span<const double> a, std::span<const double> b);
Coeffs add(std::span<const double> a, std::span<const double> b);
Coeffs scale(std::span<const double> a, double k);
/// Drops trailing (highest-power) coefficients that are exactly zero.
Coeffs trim(Coeffs a);
/// Degree after trimming; -1 for the zero polynomial.
int degree(std::span<const double> a);
Complex evaluate(std::span<const double> a, Complex x);
/// Real polynomial whose roots are `roots` (conjugates must be paired), leading coefficient 1.
Coeffs from_roots(std::span<const Complex> roots);

/// All complex roots, Newton-polished. Exact zero roots are returned as 0.
/// Complex roots come out in conjugate pairs with the imaginary parts made exactly opposite.
std::vector<Complex> roots(std::span<const double> a);

}  // namespace tailsitter::poly
