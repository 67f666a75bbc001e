#pragma once

#include <vector>

#include "sml/exponents.hpp"

namespace sml {

/// Positive radially decreasing solution of v'' + (d-1)/r v' = v - v^{q-1},
/// v'(0) = 0, decaying at infinity, together with the quadrature terms of the
/// quotient it minimizes:
///   grad_sq = |grad v|_2^2, l2_sq = |v|_2^2, lq_sq = |v|_q^2
/// (Lebesgue measure on R^d, radial integrals against |S^{d-1}| r^{d-1} dr).
struct RadialGroundState {
  double amplitude = 0.0;   // v(0), bracketed by bisection on the separatrix
  double radius_max = 0.0;
  std::vector<double> r;    // sample abscissae (uniform)
  std::vector<double> v;
  double grad_sq = 0.0;
  double l2_sq = 0.0;
  double lq_sq = 0.0;
  double scaling_residual = 0.0;  // |(d-2)A + dB - (2d/q)(A+B)| / (A+B)
  double ode_residual = 0.0;      // max EL residual on [0, radius_max/2]
};

enum class OdeMethod {
  adaptive_rk45,  // embedded Cash-Karp, the default
  fixed_rk4       // independent cross-check integrator
};

struct ShootOptions {
  OdeMethod method = OdeMethod::adaptive_rk45;
  double ode_tol = 1e-12;     // local error control (adaptive) or step scale (fixed)
  double bracket_hi = 64.0;   // upper bound for the amplitude search
};

/// Bisection on the shooting amplitude between the fall-back branch (v turns
/// up before reaching 0) and the overshoot branch (v crosses 0) until the
/// decaying separatrix is bracketed to tol (relative). q > 2 only.
RadialGroundState shoot_ground_state(const ExponentSet& e, double tol,
                                     const ShootOptions& opts = {});

/// Sharp Euclidean constant: (grad_sq + l2_sq) / lq_sq at the ground state,
/// after verifying scaling stationarity (the quotient's dilation derivative
/// vanishes there, making the value the actual infimum).
double kqd(const ExponentSet& e, const ShootOptions& opts = {});

double kqd(const RadialGroundState& gs);

}  // namespace sml
