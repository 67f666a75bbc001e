#pragma once

#include <Eigen/Dense>
#include <memory>

#include "sml/manifold.hpp"

namespace sml {

using Vec = Eigen::VectorXd;

/// Symmetric tridiagonal matrix with an optional periodic corner entry
/// A(0,n-1) = A(n-1,0). Covers every operator the meridian discretization
/// produces (stiffness, mass shifts, Newton Jacobians).
struct SymTridiag {
  Vec diag;            // n
  Vec off;             // n-1
  double corner = 0.0; // nonzero only on periodic grids
  bool periodic = false;

  int size() const { return static_cast<int>(diag.size()); }
  Vec apply(const Vec& u) const;
  double quad_form(const Vec& u) const;  // u^T A u
  Eigen::MatrixXd dense() const;
};

/// Solves A x = b for a SymTridiag A (LAPACK dgtsv, partial pivoting; the
/// periodic corner is folded in by a rank-one update).
Vec solve_tridiag(const SymTridiag& A, const Vec& b);

/// Cell-centered meridian grid. On pole-closed domains the nodes sit at
/// s_j = (j+1/2)h so no value is ever requested at the coordinate singularity
/// w(s) -> 0; fluxes through the pole faces vanish with w, which is exactly
/// the regularity condition u'(0) = u'(L) = 0. Circles use the uniform
/// periodic grid s_j = j h.
struct Grid {
  ManifoldProfile manifold;
  int n = 0;
  double h = 0.0;
  bool periodic = false;
  Vec nodes;        // n
  Vec cell_mass;    // n; integral of w over the cell (Gauss-Legendre, exact
                    // to machine precision for smooth w) -> quadrature weights
  Vec face_weight;  // w at interior faces: size n-1, or n when periodic
                    // (entry j = face between cells j and j+1)
  double volume = 0.0;  // sum of cell_mass

  double integrate(const Vec& values) const { return cell_mass.dot(values); }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(const ManifoldProfile& m, int n);

/// High-accuracy integral of the manifold weight over the meridian
/// (panel Gauss-Legendre); used for profile volumes.
double integrate_weight(const ManifoldProfile& m, int panels);

/// Sampled meridian function; the universal carrier for u, v, V, W.
struct GridFunction {
  GridPtr grid;
  Vec values;

  GridFunction() = default;
  GridFunction(GridPtr g, Vec v) : grid(std::move(g)), values(std::move(v)) {}

  int size() const { return static_cast<int>(values.size()); }
  bool positive() const { return values.minCoeff() > 0.0; }
  double mean() const { return grid->integrate(values) / grid->volume; }
};

GridFunction constant_function(const GridPtr& g, double c);
GridFunction sample_function(const GridPtr& g, const std::function<double(double)>& f);

/// stiffness * u = A u with u^T A u ~ integral of |u'|^2 w ds; mass is the
/// diagonal quadrature vector. Row sums of the stiffness vanish identically by
/// construction (flux form) and both operators are exactly symmetric.
struct OperatorMatrices {
  GridPtr grid;
  SymTridiag stiffness;
  Vec mass;  // diagonal

  /// diag(V .* mass): the quadrature of V u phi dv_g.
  Vec potential_mass(const GridFunction& V) const;
};

OperatorMatrices assemble_operators(const GridPtr& g);

struct Norms {
  double l2 = 0.0;
  double lq = 0.0;
  double h1_seminorm = 0.0;
};

/// Weighted L2, Lq and H1-seminorm of u (q > 0).
Norms norms(const GridFunction& u, double q);

double norm_lq(const GridFunction& u, double q);

struct EigenPair {
  double lambda = 0.0;
  GridFunction vector;   // M-normalized, integral >= 0
  double residual = 0.0; // ||A x - lambda M x||_{M^-1} / ((1 + |lambda|) ||x||_M)
};

/// Smallest k eigenpairs of the generalized symmetric problem A x = lambda M x
/// (M diagonal positive). Dense solve; intended for n <= 2000.
std::vector<EigenPair> lowest_eigenpairs(const SymTridiag& A, const Vec& mass, int k);

EigenPair lowest_eigenpair(const SymTridiag& A, const Vec& mass);

/// Laplace-Beltrami action -M^{-1} A u: pointwise u'' + (w'/w) u' with
/// pole-regularized limits, periodic stencil on circles; second order.
GridFunction laplacian_apply(const OperatorMatrices& ops, const GridFunction& u);

/// First and second meridian derivatives by central differences with even
/// ghost reflection at poles (periodic wrap on circles).
Vec derivative1(const GridFunction& u);
Vec derivative2(const GridFunction& u);

/// First nonzero eigenvalue of -Delta_g at resolution n, with one Richardson
/// step over {n/2, n} eliminating the leading O(h^2) eigenvalue error. Raw
/// per-grid values are available through lowest_eigenpairs for order studies.
double laplace_lambda1(const ManifoldProfile& m, int n);

}  // namespace sml
