#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sml/euclidean.hpp"
#include "sml/exponents.hpp"

using namespace sml;

TEST_CASE("oracle self-check: closed form solves the ODE") {
  // residual of v'' - v + v^{q-1} by central differences of the closed form
  for (double q : {4.0, 6.0, 3.0}) {
    double worst = 0.0;
    const double h = 1e-4;
    for (double x : {0.3, 0.9, 1.7, 2.8}) {
      const double d2 =
          (oracle::soliton_1d(q, x + h) - 2.0 * oracle::soliton_1d(q, x) +
           oracle::soliton_1d(q, x - h)) /
          (h * h);
      const double v = oracle::soliton_1d(q, x);
      worst = std::max(worst, std::abs(d2 - v + std::pow(v, q - 1.0)));
    }
    CHECK(worst <= 1e-7);  // h^2 floor of the check itself
  }
  // quadrature identities at q = 4: A = 4/3, B = 4, C = 4/sqrt(3)
  const auto sq = oracle::soliton_quadratures(4.0);
  CHECK(sq.grad_sq == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(sq.l2_sq == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::pow(sq.lqq, 0.5) == doctest::Approx(4.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("1d solitons by shooting") {
  SUBCASE("q=4: sqrt(2) sech") {
    const ExponentSet e = build_exponents(1, 4.0);
    const RadialGroundState gs = shoot_ground_state(e, 1e-13);
    CHECK(gs.amplitude == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK(gs.ode_residual <= 1e-8);
    CHECK(gs.scaling_residual <= 1e-6);
    // profile matches the closed form pointwise
    double worst = 0.0;
    for (int i = 0; i < 2000; i += 97) {
      worst = std::max(worst, std::abs(gs.v[i] - oracle::soliton_1d(4.0, gs.r[i])));
    }
    CHECK(worst <= 1e-6);
    CHECK(kqd(gs) == doctest::Approx(4.0 / std::sqrt(3.0)).epsilon(1e-7));
  }
  SUBCASE("q=6: amplitude 3^{1/4}") {
    const ExponentSet e = build_exponents(1, 6.0);
    const RadialGroundState gs = shoot_ground_state(e, 1e-13);
    CHECK(gs.amplitude == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-8));
    CHECK(kqd(gs) == doctest::Approx(oracle::kq1_closed_form(6.0)).epsilon(1e-7));
  }
}

TEST_CASE("d=1 closed form across 20 exponents") {
  for (int i = 0; i < 20; ++i) {
    const double q = 2.2 + 0.385 * i;  // spans (2, 10)
    const ExponentSet e = build_exponents(1, q);
    CHECK(kqd(e) == doctest::Approx(oracle::kq1_closed_form(q)).epsilon(1e-6));
  }
}

TEST_CASE("monotone trend toward 1 as q -> 2+") {
  const double k22 = kqd(build_exponents(1, 2.2));
  const double k21 = kqd(build_exponents(1, 2.1));
  const double k205 = kqd(build_exponents(1, 2.05));
  CHECK(k22 > k21);
  CHECK(k21 > k205);
  CHECK(k205 > 1.0);
}

TEST_CASE("Townes profile (d=2, q=4)") {
  const ExponentSet e = build_exponents(2, 4.0);
  const RadialGroundState gs = shoot_ground_state(e, 1e-13);
  CHECK(gs.amplitude == doctest::Approx(oracle::kTownesAmplitude).epsilon(1e-6));
  CHECK(gs.scaling_residual <= 1e-6);
  const double k = kqd(gs);
  CHECK(k == doctest::Approx(oracle::kTownesConstant).epsilon(1e-6));
  // Pohozaev at d=2, q=4: A = B, so K = sqrt(2 B)
  CHECK(gs.grad_sq == doctest::Approx(gs.l2_sq).epsilon(1e-5));
  CHECK(k == doctest::Approx(std::sqrt(2.0 * gs.l2_sq)).epsilon(1e-5));

  // two-integrator agreement
  ShootOptions fixed;
  fixed.method = OdeMethod::fixed_rk4;
  CHECK(kqd(e, fixed) == doctest::Approx(k).epsilon(1e-4));
}

TEST_CASE("d=3 ground state, two integrators") {
  const ExponentSet e = build_exponents(3, 4.0);
  const RadialGroundState gs = shoot_ground_state(e, 1e-13);
  CHECK(gs.amplitude == doctest::Approx(oracle::kAmplitudeD3Q4).epsilon(1e-6));
  CHECK(kqd(gs) == doctest::Approx(oracle::kConstantD3Q4).epsilon(1e-6));
  ShootOptions fixed;
  fixed.method = OdeMethod::fixed_rk4;
  CHECK(kqd(e, fixed) == doctest::Approx(kqd(gs)).epsilon(1e-4));
}

TEST_CASE("preconditions") {
  CHECK_THROWS(shoot_ground_state(build_exponents(2, 1.5), 1e-12));  // q < 2
  CHECK_THROWS(shoot_ground_state(build_exponents(2, 4.0), -1.0));   // bad tol
}

TEST_CASE("ground state profile invariants") {
  const ExponentSet e = build_exponents(2, 3.0);
  const RadialGroundState gs = shoot_ground_state(e, 1e-13);
  CHECK(gs.v.front() == doctest::Approx(gs.amplitude));
  // positive and strictly decreasing until the tail cut
  for (std::size_t i = 1; i < gs.v.size(); ++i) {
    CHECK(gs.v[i] > 0.0);
    CHECK(gs.v[i] <= gs.v[i - 1] * (1.0 + 1e-12));
  }
  CHECK(gs.v.back() <= 1e-6 * gs.amplitude);
}
