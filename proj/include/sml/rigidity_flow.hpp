#pragma once

#include <string>
#include <vector>

#include "sml/discretization.hpp"
#include "sml/exponents.hpp"

namespace sml {

/// Pointwise samples of the corrected trace-free Hessian tensor entering the
/// rigidity threshold. In the orthonormal frame (meridian, orbit block) an
/// axisymmetric u has Hessian diag(u'', (f'/f)u', ..., (f'/f)u'), and
///   Q = Hess u - (g/d) Lap u - c [grad u x grad u / u - (g/d) |grad u|^2 / u],
///   c = (d-1)(q-1) / (theta (d+3-q)).
/// The meridian and orbit components below already include every term; the
/// pointwise trace q_ss + (d-1) q_orbit vanishes identically.
struct QTensorSample {
  Vec laplacian;   // Lap u at nodes
  Vec q_ss;        // meridian-meridian component
  Vec q_orbit;     // each of the d-1 orbit components
  Vec q_norm_sq;   // q_ss^2 + (d-1) q_orbit^2
  Vec ricci_term;  // Ric(e_s,e_s) u'^2
};

QTensorSample q_tensor_sample(const ManifoldProfile& m, const ExponentSet& e,
                              const GridFunction& u);

/// Rayleigh quotient of the rigidity threshold at a positive nonconstant u:
///   [(1-theta) int (Lap u)^2 + theta d/(d-1) int (|Q|^2 + Ric(grad u, grad u))]
///   / int |grad u|^2.
/// The d=1 branch (theta = 0) reduces to int (u'')^2 / int (u')^2.
double lambda_star_quotient(const ManifoldProfile& m, const ExponentSet& e,
                            const GridFunction& u);

/// Amplitude-to-zero limit of the quotient around a constant base: the
/// u-dependent bracket is quadratic in grad u and scales out, leaving a
/// quadratic functional of the perturbation phi alone.
double lambda_star_quotient_linearized(const ManifoldProfile& m, const ExponentSet& e,
                                       const GridFunction& phi);

/// Best (smallest) quotient value found over parametrized families: low
/// meridian eigenmodes with amplitude to 0 (evaluated in the linearized form,
/// including the exact minimization over their span), localized bumps, and
/// seeded random smooth positives; each candidate is evaluated on two grids
/// with one Richardson step. The result is an UPPER bound for the threshold
/// within the axisymmetric class.
double lambda_star_upper_bound(const ManifoldProfile& m, const ExponentSet& e,
                               int search_budget = 4, unsigned seed = 1);

/// One semi-implicit step of u_t = u^{2-2 beta}(Lap u + (1 + beta(q-2)) |grad u|^2 / u):
/// the Laplacian is treated implicitly with the mobility u^{2-2 beta} frozen,
/// the gradient-square term explicitly; dt is halved (in place) until the
/// step preserves positivity. Throws on dt underflow.
GridFunction flow_step(const GridFunction& u, const ExponentSet& e, double& dt);

/// Lyapunov functional of the flow:
///   F[u] = int |grad(u^beta)|^2
///        + lambda/(q-2) [ int u^{2 beta} - kappa (int u^{beta q})^{2/q} ].
/// Accumulated in extended precision: near the constant state the bracket is
/// a difference of nearly equal O(volume) numbers.
double functional_F(const GridFunction& u, const ExponentSet& e, double lambda, double kappa);

/// Estimated floating-point evaluation noise of functional_F at u; monotonicity
/// of F below this level is not measurable.
double functional_F_noise(const GridFunction& u, const ExponentSet& e, double lambda,
                          double kappa);

struct FlowTrace {
  std::vector<double> times;
  std::vector<double> f_values;
  std::vector<double> sup_distance;   // max|u - mean| / mean
  std::vector<double> mass_monitor;   // int u^{beta q} dv_g (not conserved)
  std::vector<double> step_sizes;
  double f_noise_floor = 0.0;
  bool monotone = true;  // F nonincreasing (tolerance 1e-9 |F| + noise) at accepted steps
  int rejected_steps = 0;
};

struct FlowOptions {
  double dt0 = 1e-3;
  double dt_max = 0.25;
  double dist_stop = 1e-10;
  int max_steps = 200000;
  bool enforce_monotone = true;  // reject steps that raise F (out-of-hypothesis
                                 // runs should disable this)
};

FlowTrace run_flow(const GridFunction& u0, const ExponentSet& e, double lambda, double T,
                   double kappa, const FlowOptions& opts = {});

void write_flow_csv(const FlowTrace& t, const std::string& path);

struct RigiditySolution {
  GridFunction v;
  double residual = 0.0;
  bool is_constant = false;
};

/// Solutions of -Lap v + lambda/(q-2) (v - v^{q-1}) = 0 found by damped Newton
/// from n_inits initializations (harmonic perturbations of 1 with the
/// second-order profile correction, random smooth positives, and the optional
/// continuation hint). Only positive solutions are reported; distinct means
/// sup-distance > 1e-4 after the axis-reflection quotient.
struct RigidityReport {
  double lambda = 0.0;
  std::vector<RigiditySolution> solutions;
  int n_inits = 0;
  int newton_failures = 0;
  bool has_nonconstant() const {
    for (const auto& s : solutions)
      if (!s.is_constant) return true;
    return false;
  }
};

RigidityReport rigidity_scan(const ManifoldProfile& m, const ExponentSet& e, double lambda,
                             int n_inits, unsigned seed,
                             const GridFunction* continuation = nullptr, int n = 400);

std::string rigidity_report_json(const RigidityReport& r);

/// Operational rigidity threshold: sup of lambda for which the scan finds only
/// the constant, located by bisection with branch continuation. Returns the
/// final bracket [lo, hi].
std::pair<double, double> bisect_rigidity_lambda(const ManifoldProfile& m, const ExponentSet& e,
                                                 double lo, double hi, double tol, int n_inits,
                                                 unsigned seed);

}  // namespace sml
