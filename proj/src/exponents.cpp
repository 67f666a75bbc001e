#include "sml/exponents.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sml {

double critical_exponent(int d) {
  if (d <= 0) throw std::invalid_argument("critical_exponent: d must be >= 1");
  if (d <= 2) return std::numeric_limits<double>::infinity();
  return 2.0 * d / (d - 2.0);
}

ExponentSet build_exponents(int d, double q) {
  if (d < 1) throw std::invalid_argument("build_exponents: d must be >= 1");
  if (!(q > 1.0)) throw std::invalid_argument("build_exponents: q must be > 1");
  if (q == 2.0)
    throw std::invalid_argument("build_exponents: q = 2 is a pole of p and of the equation");
  const double two_star = critical_exponent(d);
  if (d >= 3 && q >= two_star)
    throw std::invalid_argument("build_exponents: q >= 2* = " + std::to_string(two_star) +
                                " is supercritical for d = " + std::to_string(d));

  ExponentSet e;
  e.d = d;
  e.q = q;
  e.two_star = two_star;
  e.regime = q > 2.0 ? QRegime::subcritical_above_2 : QRegime::below_2;
  e.p_holder = q > 2.0 ? q / (q - 2.0) : q / (2.0 - q);
  e.vartheta = d * (q - 2.0) / (2.0 * q);
  e.theta_rigidity = (d - 1.0) * (d - 1.0) * (q - 1.0) / (d * (d + 2.0) + q - 1.0);
  e.gamma = q > 2.0 ? e.p_holder - 0.5 * d : -(e.p_holder + 0.5 * d);

  if (d == 1) {
    // theta = 0 makes the beta formula 0/0; the flow degenerates on circles.
    e.flow_beta = 0.0;
    e.flow_available = false;
  } else {
    const double th = e.theta_rigidity;
    const double num = (d + 2.0) * (d + 3.0 - q) * th;
    const double den =
        (d - 1.0) * (d - 1.0) * (q - 1.0) * (q - 1.0) - (d + 2.0) * (d + 2.0) * (q - 2.0) * th;
    if (den > 0.0) {
      e.flow_beta = num / den;
      e.flow_available = true;
    } else {
      e.flow_beta = std::numeric_limits<double>::quiet_NaN();
      e.flow_available = false;
    }
  }
  return e;
}

double asymptotic_constant(const ExponentSet& e, double kqd) {
  if (!(kqd > 0.0)) throw std::invalid_argument("asymptotic_constant: kqd must be > 0");
  if (e.regime != QRegime::subcritical_above_2)
    throw std::invalid_argument("asymptotic_constant: requires q > 2");
  // gamma + d/2 = p, so this is kqd^{-p}.
  return std::pow(kqd, -(e.gamma + 0.5 * e.d));
}

NormalizationSet make_normalization(double volume, double q, double lambda_one) {
  if (!(volume > 0.0)) throw std::invalid_argument("make_normalization: volume must be > 0");
  if (!(lambda_one > 0.0)) throw std::invalid_argument("make_normalization: lambda_one must be > 0");
  NormalizationSet n;
  n.volume = volume;
  n.lambda_one = lambda_one;
  n.kappa = std::pow(volume, 1.0 - 2.0 / q);
  return n;
}

double linear_regime_mu_threshold(const NormalizationSet& nrm, double lambda_rigidity, double q) {
  return nrm.kappa * lambda_rigidity / (q - 2.0);
}

double constant_equality_threshold_plain(int d, double q) { return d / (q - 2.0); }

double linear_regime_beta_threshold(const NormalizationSet& nrm, double lambda_rigidity,
                                    double p_holder) {
  return 0.5 * (p_holder + 1.0) * nrm.kappa * lambda_rigidity;
}

}  // namespace sml
