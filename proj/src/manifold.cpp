#include "sml/manifold.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sml/discretization.hpp"

namespace sml {

double sphere_surface_volume(int k) {
  if (k < 0) throw std::invalid_argument("sphere_surface_volume: k must be >= 0");
  // |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2)
  return 2.0 * std::pow(M_PI, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

ManifoldProfile make_circle(double L) {
  if (!(L > 0.0)) throw std::invalid_argument("make_circle: L must be > 0");
  ManifoldProfile m;
  m.kind = ManifoldKind::circle;
  m.d = 1;
  m.domain_length = L;
  m.weight = [](double) { return 1.0; };
  m.orbit_volume = 1.0;
  m.volume = L;
  m.lambda_one = (2.0 * M_PI / L) * (2.0 * M_PI / L);
  m.boundary = BoundaryKind::periodic;
  m.ricci_meridian = [](double) { return 0.0; };
  m.descriptor = "circle:" + std::to_string(L);
  return m;
}

ManifoldProfile make_sphere(int d) {
  if (d < 1) throw std::invalid_argument("make_sphere: d must be >= 1");
  if (d == 1) {
    ManifoldProfile m = make_circle(2.0 * M_PI);
    m.kind = ManifoldKind::sphere;
    m.descriptor = "sphere:1";
    return m;
  }
  ManifoldProfile m;
  m.kind = ManifoldKind::sphere;
  m.d = d;
  m.domain_length = M_PI;
  m.profile = [](double s) { return std::sin(s); };
  m.profile_d1 = [](double s) { return std::cos(s); };
  m.profile_d2 = [](double s) { return -std::sin(s); };
  const double cd = sphere_surface_volume(d - 1);
  m.orbit_volume = cd;
  m.weight = [cd, d](double s) { return cd * std::pow(std::sin(s), d - 1); };
  m.volume = sphere_surface_volume(d);
  m.lambda_one = d;
  m.boundary = BoundaryKind::symmetric_poles;
  m.ricci_meridian = [d](double) { return d - 1.0; };
  if (d == 2) m.gauss_curvature = [](double) { return 1.0; };
  m.descriptor = "sphere:" + std::to_string(d);
  return m;
}

namespace {

constexpr double kClosureTol = 1e-6;

void validate_closure(const std::function<double(double)>& f,
                      const std::function<double(double)>& f1, double L) {
  if (std::abs(f(0.0)) > kClosureTol || std::abs(f(L)) > kClosureTol)
    throw std::invalid_argument("revolution profile: f must vanish at both poles");
  if (std::abs(f1(0.0) - 1.0) > kClosureTol)
    throw std::invalid_argument("revolution profile: f'(0) must equal 1 (smooth pole)");
  if (std::abs(f1(L) + 1.0) > kClosureTol)
    throw std::invalid_argument("revolution profile: f'(L) must equal -1 (smooth pole)");
  const int probes = 257;
  for (int i = 1; i < probes; ++i) {
    const double s = L * i / probes;
    if (!(f(s) > 0.0))
      throw std::invalid_argument("revolution profile: f must be positive on (0, L)");
  }
}

}  // namespace

ManifoldProfile make_revolution(std::function<double(double)> f,
                                std::function<double(double)> f_d1,
                                std::function<double(double)> f_d2, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("make_revolution: L must be > 0");
  validate_closure(f, f_d1, L);

  ManifoldProfile m;
  m.kind = ManifoldKind::revolution;
  m.d = 2;
  m.domain_length = L;
  m.profile = f;
  m.profile_d1 = f_d1;
  m.profile_d2 = f_d2;
  m.orbit_volume = 2.0 * M_PI;
  m.weight = [f](double s) { return 2.0 * M_PI * f(s); };
  m.boundary = BoundaryKind::symmetric_poles;
  // K = -f''/f; at the poles the smooth closure gives the one-sided limit
  // -f'''(0)/f'(0), evaluated here by stepping slightly inside.
  auto curv = [f, f_d2, L](double s) {
    const double eps = 1e-7 * L;
    double t = s;
    if (t < eps) t = eps;
    if (t > L - eps) t = L - eps;
    return -f_d2(t) / f(t);
  };
  m.gauss_curvature = curv;
  m.ricci_meridian = curv;

  // Volume by composite Gauss-Legendre panels of the weight.
  m.volume = integrate_weight(m, 4096);
  m.lambda_one = laplace_lambda1(m, 800);
  m.descriptor = "revolution:L=" + std::to_string(L);
  return m;
}

namespace {

/// Clamped cubic spline with prescribed end slopes; plain tridiagonal solve.
struct CubicSpline {
  std::vector<double> x, y, m;  // m = second derivatives at knots

  static CubicSpline fit(std::vector<double> xs, std::vector<double> ys, double slope0,
                         double slope1) {
    const std::size_t n = xs.size();
    CubicSpline sp;
    sp.x = std::move(xs);
    sp.y = std::move(ys);
    sp.m.assign(n, 0.0);
    std::vector<double> a(n), b(n), c(n), r(n);
    const auto h = [&](std::size_t i) { return sp.x[i + 1] - sp.x[i]; };
    b[0] = 2.0 * h(0);
    c[0] = h(0);
    r[0] = 6.0 * ((sp.y[1] - sp.y[0]) / h(0) - slope0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      a[i] = h(i - 1);
      b[i] = 2.0 * (h(i - 1) + h(i));
      c[i] = h(i);
      r[i] = 6.0 * ((sp.y[i + 1] - sp.y[i]) / h(i) - (sp.y[i] - sp.y[i - 1]) / h(i - 1));
    }
    a[n - 1] = h(n - 2);
    b[n - 1] = 2.0 * h(n - 2);
    r[n - 1] = 6.0 * (slope1 - (sp.y[n - 1] - sp.y[n - 2]) / h(n - 2));
    // Thomas
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    sp.m[n - 1] = r[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) sp.m[i] = (r[i] - c[i] * sp.m[i + 1]) / b[i];
    return sp;
  }

  std::size_t segment(double t) const {
    std::size_t lo = 0, hi = x.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (x[mid] <= t ? lo : hi) = mid;
    }
    return lo;
  }

  double eval(double t) const {
    const std::size_t i = segment(t);
    const double h = x[i + 1] - x[i], A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
    return A * y[i] + B * y[i + 1] +
           ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
  }
  double eval_d1(double t) const {
    const std::size_t i = segment(t);
    const double h = x[i + 1] - x[i], A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
    return (y[i + 1] - y[i]) / h +
           (-(3.0 * A * A - 1.0) * m[i] + (3.0 * B * B - 1.0) * m[i + 1]) * h / 6.0;
  }
  double eval_d2(double t) const {
    const std::size_t i = segment(t);
    const double h = x[i + 1] - x[i], A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
    return A * m[i] + B * m[i + 1];
  }
};

}  // namespace

ManifoldProfile load_revolution_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_revolution_profile: cannot open " + path);
  std::vector<double> s, f;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) throw std::runtime_error("load_revolution_profile: bad row '" + line + "'");
    s.push_back(a);
    f.push_back(b);
  }
  if (s.size() < 8) throw std::runtime_error("load_revolution_profile: need at least 8 rows");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1]))
      throw std::runtime_error("load_revolution_profile: s column must be strictly increasing");
  if (std::abs(s.front()) > 1e-12)
    throw std::runtime_error("load_revolution_profile: s must start at 0");

  const double L = s.back();
  // Closure check against the data itself (one-sided 3-point slopes).
  const double d0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (s[2] - s[0]) *
                    ((s[2] - s[0]) / (2.0 * (s[1] - s[0])));
  const std::size_t n = s.size();
  const double d1 = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (s[n - 1] - s[n - 3]) *
                    ((s[n - 1] - s[n - 3]) / (2.0 * (s[n - 1] - s[n - 2])));
  const double data_tol = 1e-3;  // FD estimate; the spline enforces exact clamps
  if (std::abs(f.front()) > 1e-9 || std::abs(f.back()) > 1e-9 || std::abs(d0 - 1.0) > data_tol ||
      std::abs(d1 + 1.0) > data_tol)
    throw std::runtime_error("load_revolution_profile: table violates pole closure");

  auto sp = std::make_shared<CubicSpline>(CubicSpline::fit(std::move(s), std::move(f), 1.0, -1.0));
  return make_revolution([sp](double t) { return sp->eval(t); },
                         [sp](double t) { return sp->eval_d1(t); },
                         [sp](double t) { return sp->eval_d2(t); }, L);
}

}  // namespace sml
