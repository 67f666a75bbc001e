// Test-side oracles, independent of the library code they check:
//  - adaptive Simpson quadrature,
//  - the closed-form 1D ground state and its Gamma-function quadratures,
//  - frozen reference values produced by an independent integrator.
#pragma once

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Closed-form decaying solution of v'' = v - v^{q-1} on the line:
/// v(x) = (q/2)^{1/(q-2)} sech^{2/(q-2)}((q-2) x / 2).
inline double soliton_1d(double q, double x) {
  return std::pow(0.5 * q / std::cosh(0.5 * (q - 2.0) * x) / std::cosh(0.5 * (q - 2.0) * x),
                  1.0 / (q - 2.0));
}

/// integral of sech^s over the whole line: sqrt(pi) Gamma(s/2) / Gamma((s+1)/2).
inline double sech_integral(double s) {
  return std::sqrt(M_PI) * std::tgamma(0.5 * s) / std::tgamma(0.5 * (s + 1.0));
}

struct SolitonQuadratures {
  double grad_sq, l2_sq, lqq;  // |v'|_2^2, |v|_2^2, integral of v^q
};

/// Exact Gamma-function quadratures of the closed-form profile.
inline SolitonQuadratures soliton_quadratures(double q) {
  const double c = std::pow(0.5 * q, 1.0 / (q - 2.0));
  const double k = 0.5 * (q - 2.0);
  const double s = 4.0 / (q - 2.0);
  SolitonQuadratures out;
  out.l2_sq = c * c / k * sech_integral(s);
  out.grad_sq =
      c * c * k * (2.0 / (q - 2.0)) * (2.0 / (q - 2.0)) * (sech_integral(s) - sech_integral(s + 2.0));
  out.lqq = std::pow(c, q) / k * sech_integral(2.0 * q / (q - 2.0));
  return out;
}

/// Sharp 1D Euclidean constant from the closed form.
inline double kq1_closed_form(double q) {
  const SolitonQuadratures sq = soliton_quadratures(q);
  return (sq.grad_sq + sq.l2_sq) / std::pow(sq.lqq, 2.0 / q);
}

// Frozen references from an independent high-order shooting integrator
// (relative accuracy ~1e-8): amplitude v(0) and the sharp constant.
inline constexpr double kTownesAmplitude = 2.2062008647;   // d=2, q=4
inline constexpr double kTownesConstant = 4.8375400093;    // K_{4,2}
inline constexpr double kAmplitudeD3Q4 = 4.3373876800;     // d=3, q=4
inline constexpr double kConstantD3Q4 = 8.69419376;        // K_{4,3}

}  // namespace oracle
