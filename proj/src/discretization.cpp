#include "sml/discretization.hpp"

#include <cmath>
#include <stdexcept>

extern "C" {
void dgtsv_(const int* n, const int* nrhs, double* dl, double* d, double* du, double* b,
            const int* ldb, int* info);
}

namespace sml {

Vec SymTridiag::apply(const Vec& u) const {
  const int n = size();
  Vec r = diag.cwiseProduct(u);
  for (int i = 0; i + 1 < n; ++i) {
    r[i] += off[i] * u[i + 1];
    r[i + 1] += off[i] * u[i];
  }
  if (periodic && corner != 0.0) {
    r[0] += corner * u[n - 1];
    r[n - 1] += corner * u[0];
  }
  return r;
}

double SymTridiag::quad_form(const Vec& u) const { return u.dot(apply(u)); }

Eigen::MatrixXd SymTridiag::dense() const {
  const int n = size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.diagonal() = diag;
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = off[i];
  if (periodic && corner != 0.0) A(0, n - 1) = A(n - 1, 0) = corner;
  return A;
}

namespace {

Vec thomas_lapack(Vec dl, Vec d, Vec du, Vec b) {
  const int n = static_cast<int>(d.size());
  const int one = 1;
  int info = 0;
  dgtsv_(&n, &one, dl.data(), d.data(), du.data(), b.data(), &n, &info);
  if (info != 0) throw std::runtime_error("tridiagonal solve failed (dgtsv info != 0)");
  return b;
}

}  // namespace

Vec solve_tridiag(const SymTridiag& A, const Vec& b) {
  const int n = A.size();
  if (n == 1) {
    Vec x(1);
    x[0] = b[0] / A.diag[0];
    return x;
  }
  if (!A.periodic || A.corner == 0.0) {
    return thomas_lapack(A.off, A.diag, A.off, b);
  }
  // Fold the corner in with Sherman-Morrison: A = T + c v v^T, v = e_0 + e_{n-1},
  // where T is A with the corner removed and c subtracted from both end diagonals.
  const double c = A.corner;
  Vec d = A.diag;
  d[0] -= c;
  d[n - 1] -= c;
  Vec v = Vec::Zero(n);
  v[0] = v[n - 1] = 1.0;
  Vec y = thomas_lapack(A.off, d, A.off, b);
  Vec z = thomas_lapack(A.off, d, A.off, v);
  const double denom = 1.0 + c * (z[0] + z[n - 1]);
  if (denom == 0.0) throw std::runtime_error("periodic tridiagonal solve: singular update");
  const double factor = c * (y[0] + y[n - 1]) / denom;
  return y - factor * z;
}

double integrate_weight(const ManifoldProfile& m, int panels) {
  // 6-point Gauss-Legendre per panel.
  static const double gx[6] = {-0.932469514203152, -0.661209386466265, -0.238619186083197,
                               0.238619186083197,  0.661209386466265,  0.932469514203152};
  static const double gw[6] = {0.171324492379170, 0.360761573048139, 0.467913934572691,
                               0.467913934572691, 0.360761573048139, 0.171324492379170};
  const double L = m.domain_length;
  const double hp = L / panels;
  double total = 0.0;
  for (int j = 0; j < panels; ++j) {
    const double a = j * hp, mid = a + 0.5 * hp;
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) acc += gw[k] * m.weight(mid + 0.5 * hp * gx[k]);
    total += 0.5 * hp * acc;
  }
  return total;
}

GridPtr build_grid(const ManifoldProfile& m, int n) {
  if (n < 4) throw std::invalid_argument("build_grid: n must be >= 4");
  auto g = std::make_shared<Grid>();
  g->manifold = m;
  g->n = n;
  g->periodic = (m.boundary == BoundaryKind::periodic);
  const double L = m.domain_length;
  const double h = L / n;
  g->h = h;
  g->nodes.resize(n);
  g->cell_mass.resize(n);

  static const double gx[6] = {-0.932469514203152, -0.661209386466265, -0.238619186083197,
                               0.238619186083197,  0.661209386466265,  0.932469514203152};
  static const double gw[6] = {0.171324492379170, 0.360761573048139, 0.467913934572691,
                               0.467913934572691, 0.360761573048139, 0.171324492379170};

  if (g->periodic) {
    // nodes at j h, cells [j h - h/2, j h + h/2], faces at (j + 1/2) h
    g->face_weight.resize(n);
    for (int j = 0; j < n; ++j) {
      g->nodes[j] = j * h;
      const double mid = g->nodes[j];
      double acc = 0.0;
      for (int k = 0; k < 6; ++k) acc += gw[k] * m.weight(mid + 0.5 * h * gx[k]);
      g->cell_mass[j] = 0.5 * h * acc;
      g->face_weight[j] = m.weight((j + 0.5) * h);
    }
  } else {
    // nodes at (j+1/2) h, interior faces at j h (j = 1..n-1); pole faces carry
    // zero weight so they never appear in the stiffness.
    g->face_weight.resize(n - 1);
    for (int j = 0; j < n; ++j) {
      g->nodes[j] = (j + 0.5) * h;
      const double mid = g->nodes[j];
      double acc = 0.0;
      for (int k = 0; k < 6; ++k) acc += gw[k] * m.weight(mid + 0.5 * h * gx[k]);
      g->cell_mass[j] = 0.5 * h * acc;
      if (j + 1 < n) g->face_weight[j] = m.weight((j + 1) * h);
    }
  }
  g->volume = g->cell_mass.sum();
  return g;
}

GridFunction constant_function(const GridPtr& g, double c) {
  return GridFunction(g, Vec::Constant(g->n, c));
}

GridFunction sample_function(const GridPtr& g, const std::function<double(double)>& f) {
  Vec v(g->n);
  for (int j = 0; j < g->n; ++j) v[j] = f(g->nodes[j]);
  return GridFunction(g, std::move(v));
}

OperatorMatrices assemble_operators(const GridPtr& g) {
  OperatorMatrices ops;
  ops.grid = g;
  ops.mass = g->cell_mass;
  const int n = g->n;
  SymTridiag A;
  A.periodic = g->periodic;
  A.diag = Vec::Zero(n);
  A.off = Vec::Zero(n - 1);
  const double h = g->h;
  if (g->periodic) {
    for (int j = 0; j < n; ++j) {
      const double wf = g->face_weight[j] / h;  // face between j and j+1 (mod n)
      const int jp = (j + 1) % n;
      A.diag[j] += wf;
      A.diag[jp] += wf;
      if (jp == j + 1)
        A.off[j] -= wf;
      else
        A.corner -= wf;  // face between n-1 and 0
    }
  } else {
    for (int j = 0; j + 1 < n; ++j) {
      const double wf = g->face_weight[j] / h;
      A.diag[j] += wf;
      A.diag[j + 1] += wf;
      A.off[j] -= wf;
    }
  }
  ops.stiffness = std::move(A);
  return ops;
}

Vec OperatorMatrices::potential_mass(const GridFunction& V) const {
  return V.values.cwiseProduct(mass);
}

Norms norms(const GridFunction& u, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("norms: q must be > 0");
  Norms out;
  const Grid& g = *u.grid;
  out.l2 = std::sqrt(g.integrate(u.values.cwiseProduct(u.values)));
  out.lq = norm_lq(u, q);
  const OperatorMatrices ops = assemble_operators(u.grid);
  out.h1_seminorm = std::sqrt(std::max(0.0, ops.stiffness.quad_form(u.values)));
  return out;
}

double norm_lq(const GridFunction& u, double q) {
  const Grid& g = *u.grid;
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) acc += std::pow(std::abs(u.values[j]), q) * g.cell_mass[j];
  return std::pow(acc, 1.0 / q);
}

std::vector<EigenPair> lowest_eigenpairs(const SymTridiag& A, const Vec& mass, int k) {
  const int n = A.size();
  if (n > 2200)
    throw std::invalid_argument("lowest_eigenpairs: dense solver capped at n = 2200");
  if (mass.minCoeff() <= 0.0)
    throw std::invalid_argument("lowest_eigenpairs: mass must be positive definite");
  // Reduce to a standard symmetric problem with D^{-1/2} A D^{-1/2}.
  const Vec dinv = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd B = A.dense();
  B = dinv.asDiagonal() * B * dinv.asDiagonal();
  // enforce exact symmetry against rounding in the sandwich
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) throw std::runtime_error("lowest_eigenpairs: solver failed");

  std::vector<EigenPair> out;
  out.reserve(k);
  for (int i = 0; i < k && i < n; ++i) {
    EigenPair ep;
    ep.lambda = es.eigenvalues()[i];
    Vec x = dinv.asDiagonal() * es.eigenvectors().col(i);
    const double xnorm = std::sqrt(x.dot(mass.cwiseProduct(x)));
    x /= xnorm;
    if (mass.dot(x) < 0.0) x = -x;
    Vec r = A.apply(x) - ep.lambda * mass.cwiseProduct(x);
    const double rn = std::sqrt(r.dot(r.cwiseQuotient(mass)));
    ep.residual = rn / (1.0 + std::abs(ep.lambda));
    ep.vector.values = std::move(x);
    out.push_back(std::move(ep));
  }
  return out;
}

EigenPair lowest_eigenpair(const SymTridiag& A, const Vec& mass) {
  auto v = lowest_eigenpairs(A, mass, 1);
  return v.front();
}

GridFunction laplacian_apply(const OperatorMatrices& ops, const GridFunction& u) {
  Vec r = -ops.stiffness.apply(u.values).cwiseQuotient(ops.mass);
  return GridFunction(u.grid, std::move(r));
}

Vec derivative1(const GridFunction& u) {
  const Grid& g = *u.grid;
  const int n = g.n;
  const Vec& v = u.values;
  Vec d(n);
  const double inv2h = 1.0 / (2.0 * g.h);
  if (g.periodic) {
    for (int j = 0; j < n; ++j) d[j] = (v[(j + 1) % n] - v[(j + n - 1) % n]) * inv2h;
  } else {
    // even ghost reflection across the pole faces: v_{-1} = v_0, v_n = v_{n-1}
    for (int j = 0; j < n; ++j) {
      const double vp = (j + 1 < n) ? v[j + 1] : v[n - 1];
      const double vm = (j > 0) ? v[j - 1] : v[0];
      d[j] = (vp - vm) * inv2h;
    }
  }
  return d;
}

Vec derivative2(const GridFunction& u) {
  const Grid& g = *u.grid;
  const int n = g.n;
  const Vec& v = u.values;
  Vec d(n);
  const double invh2 = 1.0 / (g.h * g.h);
  if (g.periodic) {
    for (int j = 0; j < n; ++j)
      d[j] = (v[(j + 1) % n] - 2.0 * v[j] + v[(j + n - 1) % n]) * invh2;
  } else {
    for (int j = 0; j < n; ++j) {
      const double vp = (j + 1 < n) ? v[j + 1] : v[n - 1];
      const double vm = (j > 0) ? v[j - 1] : v[0];
      d[j] = (vp - 2.0 * v[j] + vm) * invh2;
    }
  }
  return d;
}

double laplace_lambda1(const ManifoldProfile& m, int n) {
  auto raw = [&m](int nn) {
    const GridPtr g = build_grid(m, nn);
    const OperatorMatrices ops = assemble_operators(g);
    return lowest_eigenpairs(ops.stiffness, ops.mass, 2)[1].lambda;
  };
  const double coarse = raw(n / 2);
  const double fine = raw(n);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace sml
