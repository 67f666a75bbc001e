#pragma once

#include <limits>

namespace sml {

/// Which side of the q=2 pole an exponent set lives on.
enum class QRegime { subcritical_above_2, below_2 };

/// All scalar exponents derived from the pair (d, q), kept in one place so no
/// other module recomputes them inconsistently.
///
/// Conventions:
///  - two_star = 2d/(d-2) for d >= 3, +infinity for d in {1,2}.
///  - p_holder = q/(q-2) for q > 2 (Holder conjugate of q/2),
///               q/(2-q) for q < 2.
///  - vartheta = d(q-2)/(2q); meaningful (in (0,1)) only for q > 2.
///  - theta_rigidity and flow_beta use the nonlinearity exponent q itself in
///    the place of the literature's p (see module notes); theta = 0 and
///    flow_beta = 0 when d = 1.
///  - gamma = p - d/2 above 2, -(p + d/2) below 2.
struct ExponentSet {
  int d = 0;
  double q = 0.0;
  QRegime regime = QRegime::subcritical_above_2;
  double two_star = 0.0;
  double p_holder = 0.0;
  double vartheta = 0.0;
  double theta_rigidity = 0.0;
  double flow_beta = 0.0;
  bool flow_available = false;  // false when d=1 or the beta denominator is <= 0
  double gamma = 0.0;
};

/// Volume-derived normalization constants shared by the interpolation and
/// spectral modules. kappa = volume^{1-2/q} exactly; note kappa < 1 is
/// possible (volume > 1, q < 2), so no code may assume kappa >= 1.
struct NormalizationSet {
  double kappa = 0.0;
  double volume = 0.0;
  double lambda_one = 0.0;
};

/// Critical Sobolev exponent for dimension d.
double critical_exponent(int d);

/// Validates (d, q) and fills every field of ExponentSet.
/// Throws std::invalid_argument for d < 1, q <= 1, q = 2, or q >= 2* (d >= 3).
ExponentSet build_exponents(int d, double q);

/// L^1_{gamma,d} = kqd^{-(gamma + d/2)} with gamma = p - d/2, i.e. kqd^{-p}.
/// Only defined in the q > 2 regime.
double asymptotic_constant(const ExponentSet& e, double kqd);

NormalizationSet make_normalization(double volume, double q, double lambda_one);

/// Threshold on mu below which the linear law alpha(mu) = mu/kappa holds:
/// kappa * Lambda / (q - 2).
double linear_regime_mu_threshold(const NormalizationSet& nrm, double lambda_rigidity, double q);

/// Alternative normalization-free threshold d/(q-2) = (d/2)(p-1) quoted for
/// the constant equality case on spheres; exposed for diagnostics only, the
/// kappa-bearing threshold above is the one validated by the constant-potential
/// identity.
double constant_equality_threshold_plain(int d, double q);

/// Threshold on beta below which nu(beta) = beta/kappa (only stated for p>1):
/// (p+1)/2 * kappa * Lambda.
double linear_regime_beta_threshold(const NormalizationSet& nrm, double lambda_rigidity,
                                    double p_holder);

}  // namespace sml
