#pragma once

#include <string>
#include <vector>

#include "sml/discretization.hpp"
#include "sml/exponents.hpp"
#include "sml/interp.hpp"

namespace sml {

/// Outcome of one spectral bound check. For wells (-Delta_g - V):
///   gap = alpha(|V|_p) - |lambda1| >= 0.
/// For positive potentials (-Delta_g + W):
///   gap = lambda1 - nu(beta_hat) >= 0 with beta_hat = (int W^{-p})^{-1/p}.
/// A gap below -1e-7 * scale means the corresponding estimate failed.
struct SpectralCertificate {
  double lambda1 = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double potential_norm = 0.0;  // mu = |V|_p, or beta_hat
  GridFunction eigenfunction;
  std::string manifold_descriptor;
  int d = 0;
  double q = 0.0;
  int grid_n = 0;
  unsigned seed = 0;
  double scale() const { return 1.0 + std::abs(lambda1) + std::abs(bound); }
};

/// Ground state of -Delta_g - V (V >= 0 on the grid): lowest generalized
/// eigenvalue of (stiffness - potential_mass(V), mass). The eigenfunction is
/// positive after the sign fix (ground-state simplicity).
std::pair<double, GridFunction> lambda1_minus(const OperatorMatrices& ops,
                                              const GridFunction& V);

/// Same for -Delta_g + W (W > 0).
std::pair<double, GridFunction> lambda1_plus(const OperatorMatrices& ops,
                                             const GridFunction& W);

/// Checks the eigenvalue upper bound |lambda1(-Delta-V)| <= alpha(|V|_p)
/// (q > 2, p = q/(q-2)); the bound is inverted on the same grid the
/// eigenvalue is computed on, so the certificate is exact up to solver
/// tolerances.
SpectralCertificate certify_well_bound(const ManifoldProfile& m, const ExponentSet& e,
                                       const GridFunction& V, const MinimizeOptions& opts = {});

/// Checks the eigenvalue lower bound lambda1(-Delta+W) >= nu(beta_hat) with
/// beta_hat = (int W^{-p} dv_g)^{-1/p}  (q in (1,2), p = q/(2-q)).
/// The negative outer exponent is forced by the Holder chain; the constant-W
/// identity nu(beta_hat) = c = lambda1 confirms it.
SpectralCertificate certify_potential_bound(const ManifoldProfile& m, const ExponentSet& e,
                                            const GridFunction& W,
                                            const MinimizeOptions& opts = {});

/// Equality-case potential from a converged mu-minimizer u at alpha(mu):
/// V = mu u^{2/(p-1)} / |u^{2/(p-1)}|_p, so that V^{p-1} is proportional to
/// u^2 (Holder equality) and |V|_p = mu.
GridFunction optimal_potential_from_minimizer(const GridFunction& u, const ExponentSet& e,
                                              double mu);

/// Slack of the pointwise Holder step:
///   [int |grad u|^2 - int V u^2 + alpha int u^2] -
///   [|grad u|^2_2 - mu |u|_q^2 + alpha |u|_2^2]   with mu = |V|_p.
/// Nonnegative; zero exactly when V^{p-1} is proportional to u^2.
double holder_gap(const GridFunction& u, const GridFunction& V, const ExponentSet& e,
                  double alpha);

/// Random smooth potential on the meridian: truncated cosine series,
/// rectified to min 0 ("well" mode) or shifted to >= floor ("positive" mode).
enum class PotentialMode { nonnegative_well, strictly_positive };
GridFunction random_potential(const GridPtr& g, unsigned seed, PotentialMode mode,
                              double amplitude = 2.0, double floor = 0.5);

/// JSON record (schema_version, lambda1, bound, gap, potential_norm, manifold,
/// exponents, grid size, seed) for one certificate.
std::string certificate_json(const SpectralCertificate& c);
void write_certificates_json(const std::vector<SpectralCertificate>& certs,
                             const std::string& path);

}  // namespace sml
