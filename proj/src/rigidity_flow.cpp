#include "sml/rigidity_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "sml/io.hpp"
#include "sml/rng.hpp"

namespace sml {

namespace {

double qtensor_coefficient(const ManifoldProfile& m, const ExponentSet& e) {
  if (m.d == 1) return 0.0;
  const double denom = e.theta_rigidity * (m.d + 3.0 - e.q);
  if (std::abs(denom) < 1e-12)
    throw std::invalid_argument("q tensor: q = d+3 is a pole of the correction coefficient");
  return (m.d - 1.0) * (e.q - 1.0) / denom;
}

Vec profile_slope_ratio(const ManifoldProfile& m, const GridPtr& g) {
  // f'/f at the nodes; identically 0 on circles (w' = 0).
  Vec r = Vec::Zero(g->n);
  if (m.kind == ManifoldKind::circle) return r;
  for (int j = 0; j < g->n; ++j) r[j] = m.profile_d1(g->nodes[j]) / m.profile(g->nodes[j]);
  return r;
}

}  // namespace

QTensorSample q_tensor_sample(const ManifoldProfile& m, const ExponentSet& e,
                              const GridFunction& u) {
  if (!u.positive()) throw std::invalid_argument("q_tensor_sample: u must be positive");
  const GridPtr g = u.grid;
  const int d = m.d;
  const Vec up = derivative1(u);
  const Vec upp = derivative2(u);
  const Vec fr = profile_slope_ratio(m, g);
  const double c = qtensor_coefficient(m, e);

  QTensorSample s;
  s.laplacian = upp + (d - 1.0) * fr.cwiseProduct(up);
  s.q_ss.resize(g->n);
  s.q_orbit.resize(g->n);
  s.q_norm_sq.resize(g->n);
  s.ricci_term.resize(g->n);
  for (int j = 0; j < g->n; ++j) {
    const double grad_sq_over_u = up[j] * up[j] / u.values[j];
    const double lap_over_d = s.laplacian[j] / d;
    s.q_ss[j] = upp[j] - lap_over_d - c * (1.0 - 1.0 / d) * grad_sq_over_u;
    s.q_orbit[j] = (d > 1) ? fr[j] * up[j] - lap_over_d + (c / d) * grad_sq_over_u : 0.0;
    s.q_norm_sq[j] = s.q_ss[j] * s.q_ss[j] + (d - 1.0) * s.q_orbit[j] * s.q_orbit[j];
    s.ricci_term[j] = m.ricci_meridian(g->nodes[j]) * up[j] * up[j];
  }
  return s;
}

double lambda_star_quotient(const ManifoldProfile& m, const ExponentSet& e,
                            const GridFunction& u) {
  const GridPtr g = u.grid;
  const Vec up = derivative1(u);
  const double den = g->integrate(up.cwiseProduct(up));
  if (den <= 0.0)
    throw std::invalid_argument("lambda_star_quotient: u is constant (zero denominator)");
  if (m.d == 1) {
    const Vec upp = derivative2(u);
    return g->integrate(upp.cwiseProduct(upp)) / den;
  }
  const QTensorSample s = q_tensor_sample(m, e, u);
  const double theta = e.theta_rigidity;
  const double num = (1.0 - theta) * g->integrate(s.laplacian.cwiseProduct(s.laplacian)) +
                     theta * m.d / (m.d - 1.0) * g->integrate(s.q_norm_sq + s.ricci_term);
  return num / den;
}

double lambda_star_quotient_linearized(const ManifoldProfile& m, const ExponentSet& e,
                                       const GridFunction& phi) {
  const GridPtr g = phi.grid;
  const Vec up = derivative1(phi);
  const double den = g->integrate(up.cwiseProduct(up));
  if (den <= 0.0)
    throw std::invalid_argument("lambda_star_quotient_linearized: phi is constant");
  const Vec upp = derivative2(phi);
  if (m.d == 1) return g->integrate(upp.cwiseProduct(upp)) / den;

  const Vec fr = profile_slope_ratio(m, g);
  const int d = m.d;
  const double theta = e.theta_rigidity;
  Vec lap = upp + (d - 1.0) * fr.cwiseProduct(up);
  Vec acc(g->n);
  for (int j = 0; j < g->n; ++j) {
    const double lap_over_d = lap[j] / d;
    const double qs = upp[j] - lap_over_d;
    const double qo = fr[j] * up[j] - lap_over_d;
    acc[j] = qs * qs + (d - 1.0) * qo * qo + m.ricci_meridian(g->nodes[j]) * up[j] * up[j];
  }
  const double num = (1.0 - theta) * g->integrate(lap.cwiseProduct(lap)) +
                     theta * d / (d - 1.0) * g->integrate(acc);
  return num / den;
}

namespace {

/// Exact minimization of the linearized quotient over the span of the first
/// few meridian eigenmodes: both numerator and denominator are quadratic forms
/// in the coefficients, so the best value is the smallest eigenvalue of a
/// small generalized problem.
double linearized_span_minimum(const ManifoldProfile& m, const ExponentSet& e, int n_grid,
                               int kmax) {
  const GridPtr g = build_grid(m, n_grid);
  const OperatorMatrices ops = assemble_operators(g);
  const auto pairs = lowest_eigenpairs(ops.stiffness, ops.mass, kmax + 1);
  const int K = static_cast<int>(pairs.size()) - 1;
  if (K < 1) throw std::runtime_error("linearized_span_minimum: no modes");
  const int d = m.d;
  const double theta = e.theta_rigidity;
  const Vec fr = profile_slope_ratio(m, g);

  struct Fields {
    Vec up, upp, lap, qs, qo;
  };
  std::vector<Fields> F(K);
  for (int k = 0; k < K; ++k) {
    GridFunction phi(g, pairs[k + 1].vector.values);  // skip the constant mode
    Fields f;
    f.up = derivative1(phi);
    f.upp = derivative2(phi);
    f.lap = f.upp + (d - 1.0) * fr.cwiseProduct(f.up);
    if (d > 1) {
      f.qs = f.upp - f.lap / d;
      f.qo = fr.cwiseProduct(f.up) - f.lap / d;
    }
    F[k] = std::move(f);
  }
  Eigen::MatrixXd N(K, K), D(K, K);
  Vec ric(g->n);
  for (int j = 0; j < g->n; ++j) ric[j] = m.ricci_meridian(g->nodes[j]);
  for (int a = 0; a < K; ++a)
    for (int b = a; b < K; ++b) {
      double num;
      if (d == 1) {
        num = g->integrate(F[a].upp.cwiseProduct(F[b].upp));
      } else {
        const double lap2 = g->integrate(F[a].lap.cwiseProduct(F[b].lap));
        Vec cross = F[a].qs.cwiseProduct(F[b].qs) + (d - 1.0) * F[a].qo.cwiseProduct(F[b].qo) +
                    ric.cwiseProduct(F[a].up.cwiseProduct(F[b].up));
        num = (1.0 - theta) * lap2 + theta * d / (d - 1.0) * g->integrate(cross);
      }
      N(a, b) = N(b, a) = num;
      D(a, b) = D(b, a) = g->integrate(F[a].up.cwiseProduct(F[b].up));
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(N, D);
  return ges.eigenvalues()[0];
}

}  // namespace

double lambda_star_upper_bound(const ManifoldProfile& m, const ExponentSet& e,
                               int search_budget, unsigned seed) {
  if (search_budget < 1)
    throw std::invalid_argument("lambda_star_upper_bound: budget must be >= 1");
  const int kmax = std::min(8, 3 + search_budget);
  const int n1 = 700, n2 = 1400;

  // Linearized family over the eigenmode span, Richardson over two grids.
  const double lin1 = linearized_span_minimum(m, e, n1, kmax);
  const double lin2 = linearized_span_minimum(m, e, n2, kmax);
  double best = (4.0 * lin2 - lin1) / 3.0;

  // Nonlinear candidates: small-amplitude first mode, localized bumps, random
  // smooth positives. Each recipe is sampled per grid and Richardson-refined.
  const double L = m.domain_length;
  std::vector<std::function<double(double)>> recipes;
  for (double t : {1e-2, 1e-3})
    recipes.push_back([t, L, per = m.boundary == BoundaryKind::periodic](double s) {
      return 1.0 + t * std::cos((per ? 2.0 : 1.0) * M_PI * s / L);
    });
  for (int b = 0; b < search_budget; ++b) {
    const double center = L * (0.5 * b + 1.0) / (search_budget + 2.0);
    const double wid = L * (0.08 + 0.05 * b);
    recipes.push_back([center, wid](double s) {
      const double z = (s - center) / wid;
      return 1.0 + 0.5 * std::exp(-0.5 * z * z);
    });
  }
  Rng rng(seed);
  for (int r = 0; r < 2 * search_budget; ++r) {
    const auto c = random_series_coeffs(rng, 6, 0.25);
    recipes.push_back([c, L, per = m.boundary == BoundaryKind::periodic](double s) {
      double acc = 2.0;
      for (std::size_t k = 1; k < c.size(); ++k)
        acc += c[k] * std::cos(k * (per ? 2.0 : 1.0) * M_PI * s / L);
      return std::max(acc, 0.2);
    });
  }

  const GridPtr g1 = build_grid(m, n1), g2 = build_grid(m, n2);
  for (const auto& rec : recipes) {
    const double v1 = lambda_star_quotient(m, e, sample_function(g1, rec));
    const double v2 = lambda_star_quotient(m, e, sample_function(g2, rec));
    best = std::min(best, (4.0 * v2 - v1) / 3.0);
  }
  return best;
}

GridFunction flow_step(const GridFunction& u, const ExponentSet& e, double& dt) {
  if (!e.flow_available)
    throw std::invalid_argument("flow_step: flow_beta unavailable for these exponents");
  if (!u.positive()) throw std::invalid_argument("flow_step: u must be strictly positive");
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be > 0");
  const GridPtr g = u.grid;
  const OperatorMatrices ops = assemble_operators(g);
  const double beta = e.flow_beta;
  const double cgrad = 1.0 + beta * (e.q - 2.0);

  const Vec up = derivative1(u);
  Vec mobility(g->n), forcing(g->n);
  for (int j = 0; j < g->n; ++j) {
    mobility[j] = std::pow(u.values[j], 2.0 - 2.0 * beta);
    forcing[j] = cgrad * up[j] * up[j] / u.values[j];
  }

  const double dt_in = dt;
  while (true) {
    // (M D^{-1} + dt A) u+ = M D^{-1} u + dt M forcing,  D = diag(mobility)
    SymTridiag S = ops.stiffness;
    S.diag *= dt;
    S.off *= dt;
    S.corner *= dt;
    S.diag += ops.mass.cwiseQuotient(mobility);
    const Vec rhs =
        ops.mass.cwiseQuotient(mobility).cwiseProduct(u.values) + dt * ops.mass.cwiseProduct(forcing);
    Vec unew = solve_tridiag(S, rhs);
    if (unew.minCoeff() > 0.0) return GridFunction(g, std::move(unew));
    dt *= 0.5;
    if (dt < 1e-14 * dt_in)
      throw std::runtime_error("flow_step: dt underflow during positivity backtracking");
  }
}

double functional_F(const GridFunction& u, const ExponentSet& e, double lambda, double kappa) {
  if (!u.positive()) throw std::invalid_argument("functional_F: u must be positive");
  if (!e.flow_available || e.flow_beta == 0.0)
    throw std::invalid_argument("functional_F: requires a nonzero flow_beta");
  const GridPtr g = u.grid;
  const double beta = e.flow_beta;
  const int n = g->n;

  Vec ub(n);
  for (int j = 0; j < n; ++j) ub[j] = std::pow(u.values[j], beta);
  const OperatorMatrices ops = assemble_operators(g);
  const long double grad_term = ops.stiffness.quad_form(ub);

  long double t2 = 0.0L, t3 = 0.0L;
  for (int j = 0; j < n; ++j) {
    const long double uv = u.values[j];
    const long double mj = g->cell_mass[j];
    t2 += powl(uv, 2.0L * beta) * mj;
    t3 += powl(uv, beta * e.q) * mj;
  }
  const long double bracket = t2 - (long double)kappa * powl(t3, 2.0L / e.q);
  return static_cast<double>(grad_term + (long double)(lambda / (e.q - 2.0)) * bracket);
}

double functional_F_noise(const GridFunction& u, const ExponentSet& e, double lambda,
                          double kappa) {
  const GridPtr g = u.grid;
  const double beta = e.flow_beta;
  double t2 = 0.0, t3 = 0.0, grad = 0.0;
  Vec ub(g->n);
  for (int j = 0; j < g->n; ++j) ub[j] = std::pow(u.values[j], beta);
  const OperatorMatrices ops = assemble_operators(g);
  grad = std::abs(ops.stiffness.quad_form(ub));
  for (int j = 0; j < g->n; ++j) {
    t2 += std::pow(u.values[j], 2.0 * beta) * g->cell_mass[j];
    t3 += std::pow(u.values[j], beta * e.q) * g->cell_mass[j];
  }
  const double mag = grad + std::abs(lambda / (e.q - 2.0)) * (t2 + kappa * std::pow(t3, 2.0 / e.q));
  // extended-precision accumulation leaves ~ eps_80bit per partial sum
  return 64.0 * 1.1e-19 * mag * std::sqrt(static_cast<double>(g->n));
}

FlowTrace run_flow(const GridFunction& u0, const ExponentSet& e, double lambda, double T,
                   double kappa, const FlowOptions& opts) {
  if (e.d < 2) throw std::invalid_argument("run_flow: requires d >= 2");
  if (!u0.positive()) throw std::invalid_argument("run_flow: u0 must be positive");
  FlowTrace trace;
  trace.f_noise_floor = functional_F_noise(u0, e, lambda, kappa);
  const GridPtr g = u0.grid;

  auto dist_to_const = [&](const GridFunction& u) {
    const double mean = u.mean();
    return (u.values.array() - mean).abs().maxCoeff() / std::abs(mean);
  };
  auto mass_q = [&](const GridFunction& u) {
    double acc = 0.0;
    for (int j = 0; j < g->n; ++j)
      acc += std::pow(u.values[j], e.flow_beta * e.q) * g->cell_mass[j];
    return acc;
  };

  GridFunction u = u0;
  double t = 0.0;
  double dt = opts.dt0;
  double F = functional_F(u, e, lambda, kappa);
  trace.times.push_back(0.0);
  trace.f_values.push_back(F);
  trace.sup_distance.push_back(dist_to_const(u));
  trace.mass_monitor.push_back(mass_q(u));
  trace.step_sizes.push_back(0.0);

  int accept_streak = 0;
  for (int step = 0; step < opts.max_steps && t < T; ++step) {
    if (trace.sup_distance.back() < opts.dist_stop) break;
    double dt_try = std::min(dt, T - t);
    GridFunction unew = flow_step(u, e, dt_try);
    const double Fnew = functional_F(unew, e, lambda, kappa);
    const double tol_step = 1e-10 * std::abs(F) + 0.5 * trace.f_noise_floor;
    if (opts.enforce_monotone && Fnew > F + tol_step) {
      ++trace.rejected_steps;
      accept_streak = 0;
      dt = 0.5 * dt_try;
      if (dt < 1e-15 * opts.dt0)
        throw std::runtime_error("run_flow: dt underflow while enforcing F decay");
      continue;
    }
    if (Fnew > F + 1e-9 * std::abs(F) + trace.f_noise_floor) trace.monotone = false;
    u = std::move(unew);
    t += dt_try;
    F = Fnew;
    trace.times.push_back(t);
    trace.f_values.push_back(F);
    trace.sup_distance.push_back(dist_to_const(u));
    trace.mass_monitor.push_back(mass_q(u));
    trace.step_sizes.push_back(dt_try);
    if (++accept_streak >= 4) {
      dt = std::min(dt * 1.3, opts.dt_max);
      accept_streak = 0;
    }
  }
  return trace;
}

void write_flow_csv(const FlowTrace& tr, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"t", "F", "dist_to_const", "dt"});
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    csv.row({fmt_g17(tr.times[i]), fmt_g17(tr.f_values[i]), fmt_g17(tr.sup_distance[i]),
             fmt_g17(tr.step_sizes[i])});
}

namespace {

struct NewtonResult {
  Vec v;
  double residual = 0.0;
  bool converged = false;
};

/// Damped Newton for A v + lambda/(q-2) m (v - v^{q-1}) = 0 with the
/// sign-preserving odd extension of the power (iterates may leave the cone;
/// non-positive limits are discarded by the caller).
NewtonResult newton_rigidity(const OperatorMatrices& ops, const ExponentSet& e, double lambda,
                             Vec v) {
  const Vec& m = ops.mass;
  const double cfac = lambda / (e.q - 2.0);
  auto G = [&](const Vec& x) {
    Vec r = ops.stiffness.apply(x);
    for (int j = 0; j < x.size(); ++j) {
      const double pw = std::copysign(std::pow(std::abs(x[j]), e.q - 1.0), x[j]);
      r[j] += cfac * m[j] * (x[j] - pw);
    }
    return r;
  };
  auto rnorm = [&](const Vec& r) { return std::sqrt(r.cwiseAbs2().cwiseQuotient(m).sum()); };

  NewtonResult out;
  double rn = rnorm(G(v));
  for (int it = 0; it < 80; ++it) {
    if (rn < 1e-12) break;
    SymTridiag J = ops.stiffness;
    for (int j = 0; j < v.size(); ++j)
      J.diag[j] += cfac * m[j] * (1.0 - (e.q - 1.0) * std::pow(std::abs(v[j]), e.q - 2.0));
    Vec dv;
    try {
      dv = solve_tridiag(J, G(v));
    } catch (const std::exception&) {
      break;
    }
    double s = 1.0;
    bool moved = false;
    for (int back = 0; back < 40; ++back) {
      const Vec vt = v - s * dv;
      const double rt = rnorm(G(vt));
      if (rt < rn * (1.0 - 0.2 * s) || rt < 1e-13) {
        v = vt;
        rn = rt;
        moved = true;
        break;
      }
      s *= 0.5;
    }
    if (!moved) break;
  }
  out.v = std::move(v);
  out.residual = rn;
  out.converged = rn <= 1e-9;
  return out;
}

double reflected_distance(const GridPtr& g, const Vec& a, const Vec& b) {
  const int n = static_cast<int>(a.size());
  double direct = (a - b).lpNorm<Eigen::Infinity>();
  Vec br(n);
  for (int j = 0; j < n; ++j) br[j] = b[n - 1 - j];
  double best = std::min(direct, (a - br).lpNorm<Eigen::Infinity>());
  if (g->periodic) {
    for (int s = 1; s < n; ++s) {
      double dmax = 0.0, dmax_r = 0.0;
      for (int j = 0; j < n; ++j) {
        dmax = std::max(dmax, std::abs(a[j] - b[(j + s) % n]));
        dmax_r = std::max(dmax_r, std::abs(a[j] - br[(j + s) % n]));
      }
      best = std::min({best, dmax, dmax_r});
    }
  }
  return best;
}

}  // namespace

RigidityReport rigidity_scan(const ManifoldProfile& m, const ExponentSet& e, double lambda,
                             int n_inits, unsigned seed, const GridFunction* continuation,
                             int n) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rigidity_scan: lambda must be > 0");
  const GridPtr g = build_grid(m, n);
  const OperatorMatrices ops = assemble_operators(g);

  RigidityReport rep;
  rep.lambda = lambda;

  // v = 1 solves exactly; record it first.
  {
    RigiditySolution sol;
    sol.v = constant_function(g, 1.0);
    sol.residual = 0.0;
    sol.is_constant = true;
    rep.solutions.push_back(std::move(sol));
  }

  // Initializations: the continuation hint, first-eigenmode perturbations of 1
  // (both signs, several amplitudes, with a generic second-order enrichment),
  // then random smooth positives.
  std::vector<Vec> inits;
  if (continuation && continuation->grid->n == g->n) inits.push_back(continuation->values);
  const auto pairs = lowest_eigenpairs(ops.stiffness, ops.mass, 3);
  const Vec phi1 = pairs[1].vector.values / pairs[1].vector.values.lpNorm<Eigen::Infinity>();
  const Vec phi2 = pairs[2].vector.values / pairs[2].vector.values.lpNorm<Eigen::Infinity>();
  for (double t : {0.15, 0.3, 0.5, 0.8, -0.15, -0.3, -0.5, -0.8}) {
    inits.push_back(Vec::Ones(g->n) + t * phi1 +
                    (t * t) * (0.5 * phi2.cwiseProduct(phi2) - Vec::Constant(g->n, 0.4)));
    inits.push_back(Vec::Ones(g->n) + t * phi1);
  }
  Rng rng(seed);
  while (static_cast<int>(inits.size()) < n_inits) {
    const auto c = random_series_coeffs(rng, 6, 0.8);
    Vec u(g->n);
    for (int j = 0; j < g->n; ++j) {
      const double s = g->nodes[j];
      double acc = 1.0;
      for (std::size_t k = 1; k < c.size(); ++k)
        acc += c[k] * std::cos(k * (g->periodic ? 2.0 : 1.0) * M_PI * s / m.domain_length);
      u[j] = std::abs(acc) + 0.05;
    }
    inits.push_back(u);
  }
  if (static_cast<int>(inits.size()) > n_inits) inits.resize(n_inits);
  rep.n_inits = static_cast<int>(inits.size());

  for (const Vec& v0 : inits) {
    NewtonResult nr = newton_rigidity(ops, e, lambda, v0);
    if (!nr.converged) {
      ++rep.newton_failures;
      continue;
    }
    if (nr.v.minCoeff() <= 1e-8) continue;  // not a positive solution
    // classify: exact-root check for v = 1 first
    const double dev = (nr.v - Vec::Ones(g->n)).lpNorm<Eigen::Infinity>();
    RigiditySolution sol;
    sol.is_constant = dev <= 1e-6;
    if (sol.is_constant) continue;  // v=1 already recorded
    bool duplicate = false;
    for (const auto& known : rep.solutions) {
      if (reflected_distance(g, known.v.values, nr.v) <= 1e-4) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    sol.v = GridFunction(g, std::move(nr.v));
    sol.residual = nr.residual;
    rep.solutions.push_back(std::move(sol));
  }
  return rep;
}

std::string rigidity_report_json(const RigidityReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["lambda"] = r.lambda;
  j["n_inits"] = r.n_inits;
  j["newton_failures"] = r.newton_failures;
  auto sols = nlohmann::ordered_json::array();
  for (const auto& s : r.solutions) {
    nlohmann::ordered_json js;
    js["residual"] = s.residual;
    js["is_constant"] = s.is_constant;
    js["max"] = s.v.values.maxCoeff();
    js["min"] = s.v.values.minCoeff();
    sols.push_back(js);
  }
  j["solutions"] = sols;
  return j.dump(2);
}

std::pair<double, double> bisect_rigidity_lambda(const ManifoldProfile& m, const ExponentSet& e,
                                                 double lo, double hi, double tol, int n_inits,
                                                 unsigned seed) {
  GridFunction branch;  // most recent nonconstant solution, reused as continuation
  const GridFunction* hint = nullptr;
  RigidityReport top = rigidity_scan(m, e, hi, n_inits, seed, hint);
  if (!top.has_nonconstant())
    throw std::runtime_error("bisect_rigidity_lambda: no nonconstant branch at hi");
  for (const auto& s : top.solutions)
    if (!s.is_constant) {
      branch = s.v;
      hint = &branch;
      break;
    }
  if (rigidity_scan(m, e, lo, n_inits, seed, hint).has_nonconstant())
    throw std::runtime_error("bisect_rigidity_lambda: nonconstant solution already at lo");

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    RigidityReport rep = rigidity_scan(m, e, mid, n_inits, seed, hint);
    if (rep.has_nonconstant()) {
      hi = mid;
      for (const auto& s : rep.solutions)
        if (!s.is_constant) {
          branch = s.v;
          hint = &branch;
          break;
        }
    } else {
      lo = mid;
    }
  }
  return {lo, hi};
}

}  // namespace sml
