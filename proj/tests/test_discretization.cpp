#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sml/discretization.hpp"
#include "sml/manifold.hpp"
#include "sml/rng.hpp"

using namespace sml;

TEST_CASE("grid quadrature reproduces volumes") {
  for (int d : {2, 3}) {
    const ManifoldProfile m = make_sphere(d);
    const GridPtr g = build_grid(m, 400);
    CHECK(g->volume == doctest::Approx(m.volume).epsilon(1e-10));
  }
  const GridPtr gc = build_grid(make_circle(2.0 * M_PI), 128);
  CHECK(gc->volume == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
}

TEST_CASE("operator invariants") {
  const GridPtr g = build_grid(make_sphere(2), 300);
  const OperatorMatrices ops = assemble_operators(g);
  // stiffness annihilates constants
  const Vec ones = Vec::Ones(g->n);
  CHECK(ops.stiffness.apply(ones).lpNorm<Eigen::Infinity>() <=
        1e-12 * ops.stiffness.diag.maxCoeff());
  // mass row sums reproduce the volume
  CHECK(ops.mass.sum() == doctest::Approx(g->volume).epsilon(1e-14));

  const GridPtr gc = build_grid(make_circle(2.0 * M_PI), 200);
  const OperatorMatrices opc = assemble_operators(gc);
  CHECK(opc.stiffness.apply(Vec::Ones(gc->n)).lpNorm<Eigen::Infinity>() <=
        1e-12 * opc.stiffness.diag.maxCoeff());
}

TEST_CASE("norms") {
  SUBCASE("constant on S^2") {
    const GridPtr g = build_grid(make_sphere(2), 400);
    const GridFunction u = constant_function(g, 1.0);
    const Norms n = norms(u, 4.0);
    CHECK(n.l2 == doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(1e-9));
    CHECK(n.lq == doctest::Approx(std::pow(4.0 * M_PI, 0.25)).epsilon(1e-9));
    CHECK(n.h1_seminorm == doctest::Approx(0.0));
  }
  SUBCASE("cos on the circle") {
    const GridPtr g = build_grid(make_circle(2.0 * M_PI), 800);
    const GridFunction u = sample_function(g, [](double s) { return std::cos(s); });
    const Norms n = norms(u, 4.0);
    CHECK(n.l2 == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
    CHECK(n.h1_seminorm == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-5));
  }
  SUBCASE("first harmonic Rayleigh quotient on S^2") {
    const GridPtr g = build_grid(make_sphere(2), 800);
    const GridFunction u = sample_function(g, [](double s) { return std::cos(s); });
    const Norms n = norms(u, 3.0);
    const double rq = n.h1_seminorm * n.h1_seminorm / (n.l2 * n.l2);
    CHECK(rq == doctest::Approx(2.0).epsilon(1e-4));
  }
}

TEST_CASE("eigen solves") {
  SUBCASE("kernel and shift on S^2") {
    const GridPtr g = build_grid(make_sphere(2), 300);
    const OperatorMatrices ops = assemble_operators(g);
    const EigenPair e0 = lowest_eigenpair(ops.stiffness, ops.mass);
    CHECK(std::abs(e0.lambda) <= 1e-10);
    CHECK(e0.residual <= 1e-9);
    // eigenvector is the constant, M-normalized, nonnegative integral
    const double c = 1.0 / std::sqrt(g->volume);
    CHECK((e0.vector.values.array() - c).abs().maxCoeff() <= 1e-8);

    SymTridiag shifted = ops.stiffness;
    shifted.diag -= 3.0 * ops.mass;  // constant potential c = 3
    CHECK(lowest_eigenpair(shifted, ops.mass).lambda == doctest::Approx(-3.0).epsilon(1e-12));
  }
  SUBCASE("first nonzero circle eigenvalue") {
    const GridPtr g = build_grid(make_circle(2.0 * M_PI), 800);
    const OperatorMatrices ops = assemble_operators(g);
    const auto pairs = lowest_eigenpairs(ops.stiffness, ops.mass, 3);
    CHECK(pairs[1].lambda == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(pairs[2].lambda == doctest::Approx(1.0).epsilon(1e-4));  // double eigenvalue
  }
}

TEST_CASE("laplacian apply") {
  SUBCASE("constants map to zero") {
    const GridPtr g = build_grid(make_sphere(3), 200);
    const OperatorMatrices ops = assemble_operators(g);
    const GridFunction r = laplacian_apply(ops, constant_function(g, 2.5));
    CHECK(r.values.lpNorm<Eigen::Infinity>() <= 1e-9);
  }
  SUBCASE("first harmonic on S^2") {
    double err_prev = 0.0;
    for (int n : {200, 400}) {
      const GridPtr g = build_grid(make_sphere(2), n);
      const OperatorMatrices ops = assemble_operators(g);
      const GridFunction u = sample_function(g, [](double s) { return std::cos(s); });
      const GridFunction lap = laplacian_apply(ops, u);
      double err = 0.0;
      for (int j = 0; j < g->n; ++j)
        err = std::max(err, std::abs(lap.values[j] + 2.0 * std::cos(g->nodes[j])));
      if (n == 200) err_prev = err;
      else CHECK(err < 0.4 * err_prev);  // second order: 4x drop expected
      CHECK(err <= 200.0 / (n * n));
    }
  }
  SUBCASE("plane wave on the circle") {
    const GridPtr g = build_grid(make_circle(2.0 * M_PI), 600);
    const OperatorMatrices ops = assemble_operators(g);
    const GridFunction u = sample_function(g, [](double s) { return std::cos(3.0 * s); });
    const GridFunction lap = laplacian_apply(ops, u);
    double err = 0.0;
    for (int j = 0; j < g->n; ++j)
      err = std::max(err, std::abs(lap.values[j] + 9.0 * std::cos(3.0 * g->nodes[j])));
    CHECK(err <= 1e-2);
  }
}

TEST_CASE("integration by parts") {
  const GridPtr g = build_grid(make_sphere(2), 400);
  const OperatorMatrices ops = assemble_operators(g);
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const auto cu = random_series_coeffs(rng, 6, 1.0);
    const auto cp = random_series_coeffs(rng, 6, 1.0);
    auto series = [&](const std::vector<double>& c, double s) {
      double acc = c[0];
      for (std::size_t k = 1; k < c.size(); ++k) acc += c[k] * std::cos(k * s);
      return acc;
    };
    const GridFunction u = sample_function(g, [&](double s) { return series(cu, s); });
    const GridFunction phi = sample_function(g, [&](double s) { return series(cp, s); });
    const GridFunction lap = laplacian_apply(ops, u);
    const double lhs = g->integrate(lap.values.cwiseProduct(phi.values));
    const double rhs = -phi.values.dot(ops.stiffness.apply(u.values));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("second-order eigenvalue convergence with Richardson refinement") {
  const ManifoldProfile m = make_sphere(2);
  std::vector<double> errs;
  for (int n : {100, 200, 400, 800}) {
    const GridPtr g = build_grid(m, n);
    const OperatorMatrices ops = assemble_operators(g);
    errs.push_back(std::abs(lowest_eigenpairs(ops.stiffness, ops.mass, 2)[1].lambda - 2.0) / 2.0);
  }
  // fitted slope of log err vs log n in [1.8, 2.2]
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int N = 4;
  for (int i = 0; i < N; ++i) {
    const double x = std::log(100.0 * (1 << i)), y = std::log(errs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
  CHECK(-slope >= 1.8);
  CHECK(-slope <= 2.2);

  CHECK(laplace_lambda1(m, 800) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("tridiagonal solver with periodic corner") {
  const GridPtr g = build_grid(make_circle(2.0 * M_PI), 64);
  OperatorMatrices ops = assemble_operators(g);
  SymTridiag S = ops.stiffness;
  S.diag += ops.mass;  // SPD shift
  Rng rng(3);
  Vec x(g->n);
  for (int j = 0; j < g->n; ++j) x[j] = rng.normal();
  const Vec b = S.apply(x);
  const Vec xs = solve_tridiag(S, b);
  CHECK((xs - x).lpNorm<Eigen::Infinity>() <= 1e-10 * x.lpNorm<Eigen::Infinity>());
}
