#include "sml/schrodinger.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "sml/io.hpp"
#include "sml/rng.hpp"

namespace sml {

namespace {

std::pair<double, GridFunction> lambda1_shifted(const OperatorMatrices& ops,
                                                const GridFunction& pot, double sign) {
  SymTridiag A = ops.stiffness;
  A.diag += sign * ops.potential_mass(pot);
  EigenPair ep = lowest_eigenpair(A, ops.mass);
  if (ep.residual > 1e-9)
    throw std::runtime_error("lambda1: eigensolver residual above 1e-9");
  GridFunction vec(ops.grid, std::move(ep.vector.values));
  return {ep.lambda, std::move(vec)};
}

}  // namespace

std::pair<double, GridFunction> lambda1_minus(const OperatorMatrices& ops,
                                              const GridFunction& V) {
  if (V.values.minCoeff() < -1e-12)
    throw std::invalid_argument("lambda1_minus: V must be nonnegative");
  return lambda1_shifted(ops, V, -1.0);
}

std::pair<double, GridFunction> lambda1_plus(const OperatorMatrices& ops,
                                             const GridFunction& W) {
  if (W.values.minCoeff() <= 0.0)
    throw std::invalid_argument("lambda1_plus: W must be strictly positive");
  return lambda1_shifted(ops, W, +1.0);
}

SpectralCertificate certify_well_bound(const ManifoldProfile& m, const ExponentSet& e,
                                       const GridFunction& V, const MinimizeOptions& opts) {
  if (e.regime != QRegime::subcritical_above_2)
    throw std::invalid_argument("certify_well_bound: requires q > 2");
  if (V.values.maxCoeff() <= 0.0)
    throw std::invalid_argument("certify_well_bound: V must not vanish identically");
  const GridPtr g = V.grid;
  const OperatorMatrices ops = assemble_operators(g);

  const double mu = norm_lq(V, e.p_holder);
  MinimizeOptions bopts = opts;
  bopts.n = g->n;  // invert on the same grid as the eigensolve
  const double bound = alpha_of_mu(m, e, mu, bopts);

  auto [lam, vec] = lambda1_minus(ops, V);
  SpectralCertificate cert;
  cert.lambda1 = lam;
  cert.bound = bound;
  cert.gap = bound - std::abs(lam);
  cert.potential_norm = mu;
  cert.eigenfunction = std::move(vec);
  cert.manifold_descriptor = m.descriptor;
  cert.d = e.d;
  cert.q = e.q;
  cert.grid_n = g->n;
  return cert;
}

SpectralCertificate certify_potential_bound(const ManifoldProfile& m, const ExponentSet& e,
                                            const GridFunction& W,
                                            const MinimizeOptions& opts) {
  if (e.regime != QRegime::below_2)
    throw std::invalid_argument("certify_potential_bound: requires q in (1,2)");
  if (W.values.minCoeff() <= 0.0)
    throw std::invalid_argument("certify_potential_bound: W must be strictly positive");
  const GridPtr g = W.grid;
  const OperatorMatrices ops = assemble_operators(g);
  const double p = e.p_holder;

  // beta_hat = (int W^{-p} dv_g)^{-1/p}
  double acc = 0.0;
  for (int j = 0; j < g->n; ++j) acc += std::pow(W.values[j], -p) * g->cell_mass[j];
  const double beta_hat = std::pow(acc, -1.0 / p);

  MinimizeOptions bopts = opts;
  bopts.n = g->n;
  const CurvePoint nu_pt = nu_of_beta(m, e, beta_hat, bopts);

  auto [lam, vec] = lambda1_plus(ops, W);
  SpectralCertificate cert;
  cert.lambda1 = lam;
  cert.bound = nu_pt.value;
  cert.gap = lam - nu_pt.value;
  cert.potential_norm = beta_hat;
  cert.eigenfunction = std::move(vec);
  cert.manifold_descriptor = m.descriptor;
  cert.d = e.d;
  cert.q = e.q;
  cert.grid_n = g->n;
  return cert;
}

GridFunction optimal_potential_from_minimizer(const GridFunction& u, const ExponentSet& e,
                                              double mu) {
  const double p = e.p_holder;
  const double expo = 2.0 / (p - 1.0);
  if (p <= 1.0)
    throw std::invalid_argument("optimal_potential_from_minimizer: requires p > 1");
  const double umin = u.values.minCoeff();
  if (expo < 0.0 && umin <= 1e-12)
    throw std::invalid_argument(
        "optimal_potential_from_minimizer: minimizer has zeros and 2/(p-1) < 0");
  Vec V(u.size());
  for (int j = 0; j < u.size(); ++j) V[j] = std::pow(std::abs(u.values[j]), expo);
  GridFunction Vf(u.grid, std::move(V));
  const double np = norm_lq(Vf, p);
  Vf.values *= mu / np;
  return Vf;
}

double holder_gap(const GridFunction& u, const GridFunction& V, const ExponentSet& e,
                  double alpha) {
  const GridPtr g = u.grid;
  const double mu = norm_lq(V, e.p_holder);
  double vu2 = 0.0;
  for (int j = 0; j < g->n; ++j)
    vu2 += V.values[j] * u.values[j] * u.values[j] * g->cell_mass[j];
  const double lq2 = std::pow(norm_lq(u, e.q), 2.0);
  (void)alpha;  // the gradient and alpha terms cancel in LHS - RHS
  return mu * lq2 - vu2;
}

GridFunction random_potential(const GridPtr& g, unsigned seed, PotentialMode mode,
                              double amplitude, double floor) {
  Rng rng(seed);
  const auto c = random_series_coeffs(rng, 8, amplitude);
  const double L = g->manifold.domain_length;
  Vec v(g->n);
  for (int j = 0; j < g->n; ++j) {
    const double s = g->nodes[j];
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
      acc += c[k] * std::cos(k * (g->periodic ? 2.0 : 1.0) * M_PI * s / L);
    v[j] = acc;
  }
  const double vmin = v.minCoeff();
  if (mode == PotentialMode::nonnegative_well)
    v.array() -= vmin;
  else
    v.array() += floor - vmin;
  return GridFunction(g, std::move(v));
}

std::string certificate_json(const SpectralCertificate& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["lambda1"] = c.lambda1;
  j["bound"] = c.bound;
  j["gap"] = c.gap;
  j["potential_norm"] = c.potential_norm;
  j["manifold"] = c.manifold_descriptor;
  j["d"] = c.d;
  j["q"] = c.q;
  j["grid_n"] = c.grid_n;
  j["seed"] = c.seed;
  return j.dump();
}

void write_certificates_json(const std::vector<SpectralCertificate>& certs,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_certificates_json: cannot open " + path);
  out << "[\n";
  for (std::size_t i = 0; i < certs.size(); ++i) {
    out << "  " << certificate_json(certs[i]);
    if (i + 1 < certs.size()) out << ',';
    out << '\n';
  }
  out << "]\n";
}

}  // namespace sml
