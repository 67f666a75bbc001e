#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sml/discretization.hpp"
#include "sml/manifold.hpp"

using namespace sml;

namespace {
// perturbed profile used across the geometry tests
double fpert(double s) { return std::sin(s) * (1.0 + 0.1 * std::sin(s) * std::sin(s)); }
double fpert_d1(double s) {
  return std::cos(s) + 0.3 * std::sin(s) * std::sin(s) * std::cos(s);
}
double fpert_d2(double s) {
  const double sn = std::sin(s), cs = std::cos(s);
  return -sn + 0.6 * sn * cs * cs - 0.3 * sn * sn * sn;
}
}  // namespace

TEST_CASE("spheres") {
  const ManifoldProfile s2 = make_sphere(2);
  CHECK(s2.volume == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
  CHECK(s2.lambda_one == doctest::Approx(2.0));
  CHECK(s2.ricci_meridian(0.7) == doctest::Approx(1.0));

  const ManifoldProfile s1 = make_sphere(1);
  CHECK(s1.volume == doctest::Approx(2.0 * M_PI));
  CHECK(s1.lambda_one == doctest::Approx(1.0));
  CHECK(s1.boundary == BoundaryKind::periodic);
  CHECK(s1.ricci_meridian(0.3) == doctest::Approx(0.0));

  const ManifoldProfile s3 = make_sphere(3);
  CHECK(s3.volume == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-12));
  CHECK(s3.lambda_one == doctest::Approx(3.0));
  CHECK(s3.ricci_meridian(1.0) == doctest::Approx(2.0));

  CHECK_THROWS(make_sphere(0));

  // |S^d| against the closed form for a few more d
  CHECK(make_sphere(4).volume == doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-12));
}

TEST_CASE("circles") {
  CHECK(make_circle(2.0 * M_PI).lambda_one == doctest::Approx(1.0));
  CHECK(make_circle(M_PI).lambda_one == doctest::Approx(4.0));
  CHECK(make_circle(4.0 * M_PI).lambda_one == doctest::Approx(0.25));
  CHECK(make_circle(5.0).volume == doctest::Approx(5.0));
  CHECK_THROWS(make_circle(0.0));
  CHECK_THROWS(make_circle(-1.0));
}

TEST_CASE("revolution profile: sphere consistency") {
  const ManifoldProfile rev = make_revolution(
      [](double s) { return std::sin(s); }, [](double s) { return std::cos(s); },
      [](double s) { return -std::sin(s); }, M_PI);
  const ManifoldProfile s2 = make_sphere(2);
  CHECK(rev.volume == doctest::Approx(s2.volume).epsilon(1e-8));
  CHECK(rev.lambda_one == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(rev.gauss_curvature(1.1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("revolution profile: perturbed sphere") {
  const ManifoldProfile rev = make_revolution(fpert, fpert_d1, fpert_d2, M_PI);
  // oracle: volume = 2 pi int f = 2 pi (2 + 2/15) = 64 pi / 15, and an
  // independent adaptive quadrature of the weight
  CHECK(rev.volume == doctest::Approx(64.0 * M_PI / 15.0).epsilon(1e-10));
  const double vol_oracle =
      oracle::integrate([](double s) { return 2.0 * M_PI * fpert(s); }, 0.0, M_PI, 1e-13);
  CHECK(rev.volume == doctest::Approx(vol_oracle).epsilon(1e-10));

  // nonconstant curvature
  CHECK(std::abs(rev.gauss_curvature(0.4) - rev.gauss_curvature(1.4)) > 0.05);

  // quadrature of the discretization matches the independent quadrature
  const GridPtr g = build_grid(rev, 400);
  CHECK(g->volume == doctest::Approx(vol_oracle).epsilon(1e-8));
}

TEST_CASE("revolution profile: invalid closures rejected") {
  // f'(0) = 0.9 breaks the smooth-pole condition
  CHECK_THROWS(make_revolution([](double s) { return 0.9 * std::sin(s); },
                               [](double s) { return 0.9 * std::cos(s); },
                               [](double s) { return -0.9 * std::sin(s); }, M_PI));
  // interior zero
  CHECK_THROWS(make_revolution([](double s) { return std::sin(2.0 * s); },
                               [](double s) { return 2.0 * std::cos(2.0 * s); },
                               [](double s) { return -4.0 * std::sin(2.0 * s); }, M_PI));
}

TEST_CASE("Gauss-Bonnet on revolutions") {
  // int K dv = -2 pi int f'' = 4 pi for every valid profile
  for (int which : {0, 1}) {
    const ManifoldProfile rev =
        which == 0 ? make_revolution([](double s) { return std::sin(s); },
                                     [](double s) { return std::cos(s); },
                                     [](double s) { return -std::sin(s); }, M_PI)
                   : make_revolution(fpert, fpert_d1, fpert_d2, M_PI);
    const GridPtr g = build_grid(rev, 2400);
    Vec kv(g->n);
    for (int j = 0; j < g->n; ++j) kv[j] = rev.gauss_curvature(g->nodes[j]);
    CHECK(g->integrate(kv) == doctest::Approx(4.0 * M_PI).epsilon(1e-6));
  }
}

TEST_CASE("discretized lambda1 matches the profile value") {
  for (int d : {1, 2, 3}) {
    const ManifoldProfile m = make_sphere(d);
    CHECK(laplace_lambda1(m, 800) == doctest::Approx(m.lambda_one).epsilon(1e-6));
  }
}

TEST_CASE("file-loaded revolution profile") {
  const char* path = "revolution_profile_test.txt";
  {
    std::ofstream out(path);
    out << "# s f(s)\n";
    const int rows = 2001;
    for (int i = 0; i < rows; ++i) {
      const double s = M_PI * i / (rows - 1);
      out << s << " " << fpert(s) << "\n";
    }
  }
  const ManifoldProfile rev = load_revolution_profile(path);
  CHECK(rev.volume == doctest::Approx(64.0 * M_PI / 15.0).epsilon(1e-7));
  CHECK(rev.lambda_one == doctest::Approx(make_revolution(fpert, fpert_d1, fpert_d2, M_PI)
                                              .lambda_one)
                              .epsilon(1e-5));
  std::remove(path);

  // monotonicity requirement
  {
    std::ofstream out(path);
    out << "0 0\n0.5 0.4\n0.4 0.5\n1 0.9\n2 0.9\n2.5 0.5\n3 0.1\n3.14159 0\n";
  }
  CHECK_THROWS(load_revolution_profile(path));
  std::remove(path);
}
