#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sml/discretization.hpp"
#include "sml/exponents.hpp"

namespace sml {

/// One point of an optimal-constant curve: param is alpha (mu curve) or beta
/// (nu curve), value the constrained minimum, minimizer the normalized ground
/// profile that attains it.
struct CurvePoint {
  double param = 0.0;
  double value = 0.0;
  GridFunction minimizer;
  int n_inits = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

struct Curve {
  std::vector<CurvePoint> points;
  ExponentSet exponents;
  std::string manifold_descriptor;
};

enum class CurveKind { mu, nu };

struct MinimizeOptions {
  int n = 0;               // grid size; 0 = auto max(800, 20 sqrt(param))
  int max_iters = 60000;
  int random_inits = 3;    // on top of the constant and bump inits
  double kkt_tol = 1e-9;
  unsigned seed = 12345;
  bool polish = true;      // bordered Newton refinement of the EL system
};

/// Optimal constant mu(alpha) = min over u != 0 of
/// (|grad u|_2^2 + alpha |u|_2^2) / |u|_q^2 on the discretized meridian
/// (q > 2). Multi-start projected gradient with BB steps on {|u|_q = 1},
/// positivity projection (the ground minimizer is positive), optional Newton
/// polish of -Delta u + alpha u = mu u^{q-1}.
CurvePoint mu_of_alpha(const ManifoldProfile& m, const ExponentSet& e, double alpha,
                       const MinimizeOptions& opts = {},
                       const GridFunction* warm_start = nullptr);

/// Inverse map of alpha -> mu(alpha). Uses the exact linear fast path
/// alpha = mu/kappa whenever a one-solve validation confirms the constant
/// minimizer at that alpha; otherwise monotone bracketing + secant.
double alpha_of_mu(const ManifoldProfile& m, const ExponentSet& e, double mu,
                   const MinimizeOptions& opts = {});

/// Optimal constant nu(beta) = min over |u|_2 = 1 of
/// |grad u|_2^2 + beta |u|_q^2  (q in (1,2), p = q/(2-q)).
CurvePoint nu_of_beta(const ManifoldProfile& m, const ExponentSet& e, double beta,
                      const MinimizeOptions& opts = {},
                      const GridFunction* warm_start = nullptr);

/// Warm-started sweep over sorted params; validates monotonicity and discrete
/// concavity of the resulting curve and throws (with the offending triple in
/// the message) on violation.
Curve curve_sweep(const ManifoldProfile& m, const ExponentSet& e,
                  const std::vector<double>& params, CurveKind which,
                  const MinimizeOptions& opts = {});

/// Spot check of the inequality behind a converged point against n_samples
/// random smooth functions; returns the smallest signed slack
/// (|grad u|^2 + alpha |u|^2 - mu |u|_q^2, or the nu analogue), which must be
/// >= -1e-8 * scale for a valid point.
double inequality_min_slack(const ManifoldProfile& m, const ExponentSet& e,
                            const CurvePoint& pt, CurveKind which, int n_samples,
                            unsigned seed);

/// CSV export with header param,value,kkt_residual,n_inits,minimizer_max,minimizer_min.
void write_curve_csv(const Curve& c, const std::string& path);

/// Grid size rule for concentration regimes: max(800, ceil(20 sqrt(param))).
int auto_grid_size(double param);

}  // namespace sml
