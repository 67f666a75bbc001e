#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sml/exponents.hpp"
#include "sml/rng.hpp"

using namespace sml;

TEST_CASE("critical exponent") {
  CHECK(std::isinf(critical_exponent(1)));
  CHECK(std::isinf(critical_exponent(2)));
  CHECK(critical_exponent(3) == doctest::Approx(6.0));
  CHECK(critical_exponent(4) == doctest::Approx(4.0));
}

TEST_CASE("build_exponents fills consistent fields") {
  SUBCASE("d=2 q=4") {
    const ExponentSet e = build_exponents(2, 4.0);
    CHECK(e.p_holder == doctest::Approx(2.0));
    CHECK(e.vartheta == doctest::Approx(0.5));
    CHECK(std::isinf(e.two_star));
    CHECK(e.theta_rigidity == doctest::Approx(3.0 / 11.0));
    CHECK(e.flow_beta == doctest::Approx(4.0));
    CHECK(e.flow_available);
  }
  SUBCASE("d=3 q=3") {
    const ExponentSet e = build_exponents(3, 3.0);
    CHECK(e.two_star == doctest::Approx(6.0));
    CHECK(e.p_holder == doctest::Approx(3.0));
    CHECK(e.vartheta == doctest::Approx(0.5));
  }
  SUBCASE("d=1 q=4 degenerates") {
    const ExponentSet e = build_exponents(1, 4.0);
    CHECK(e.theta_rigidity == doctest::Approx(0.0));
    CHECK(e.flow_beta == 0.0);
    CHECK_FALSE(e.flow_available);
    CHECK(e.vartheta == doctest::Approx(0.25));
  }
  SUBCASE("d=2 q=3 flow beta") {
    CHECK(build_exponents(2, 3.0).flow_beta == doctest::Approx(2.0));
  }
  SUBCASE("below 2") {
    const ExponentSet e = build_exponents(2, 1.5);
    CHECK(e.regime == QRegime::below_2);
    CHECK(e.p_holder == doctest::Approx(3.0));
    CHECK(e.gamma == doctest::Approx(-4.0));
  }
}

TEST_CASE("rejections") {
  CHECK_THROWS(build_exponents(0, 4.0));
  CHECK_THROWS(build_exponents(2, 2.0));
  CHECK_THROWS(build_exponents(2, 1.0));
  CHECK_THROWS(build_exponents(3, 6.0));   // q = 2*
  CHECK_THROWS(build_exponents(3, 8.0));   // supercritical
}

TEST_CASE("flow beta denominator vanishes exactly at q = d+3") {
  // for d=2 the denominator (q-1)^2 - 16 (q-2) theta equals (q-5)^2 (q-1)/(q+7):
  // nonnegative with a double root at q = 5, where beta is flagged unavailable
  CHECK(build_exponents(2, 4.5).flow_available);
  CHECK(build_exponents(2, 5.2).flow_available);
  CHECK_FALSE(build_exponents(2, 5.0).flow_available);
}

TEST_CASE("asymptotic constant") {
  ExponentSet e = build_exponents(2, 4.0);  // p = 2
  CHECK(asymptotic_constant(e, 1.0) == doctest::Approx(1.0));

  // oracle: closed-form soliton gives K_{4,1} = 4/sqrt(3); L = K^{-2} = 3/16
  const double k41 = oracle::kq1_closed_form(4.0);
  CHECK(k41 == doctest::Approx(4.0 / std::sqrt(3.0)).epsilon(1e-12));
  const ExponentSet e1 = build_exponents(1, 4.0);  // p = 2
  CHECK(asymptotic_constant(e1, k41) == doctest::Approx(3.0 / 16.0).epsilon(1e-12));

  ExponentSet e3 = e;
  e3.p_holder = 3.0;
  e3.gamma = e3.p_holder - 0.5 * e3.d;
  CHECK(asymptotic_constant(e3, 2.0) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("conjugate-exponent identity for random q") {
  Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    const double q = 2.0 + 8.0 * rng.uniform() + 1e-6;
    const ExponentSet e = build_exponents(1, q);
    const double half_q = 0.5 * q;
    const double conj = half_q / (half_q - 1.0);  // (q/2)'
    CHECK(e.p_holder == doctest::Approx(conj).epsilon(1e-14));
    CHECK(1.0 / e.p_holder + 2.0 / q == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("vartheta monotone in q, to 1 at the critical exponent") {
  for (int d : {3, 4, 5}) {
    const double two_star = critical_exponent(d);
    double prev = 0.0;
    for (int i = 1; i <= 40; ++i) {
      const double q = 2.0 + (two_star - 2.0) * i / 41.0;
      const ExponentSet e = build_exponents(d, q);
      CHECK(e.vartheta > prev);
      CHECK(e.vartheta < 1.0);
      prev = e.vartheta;
    }
    // endpoint limit
    const double q_end = two_star - 1e-9;
    CHECK(build_exponents(d, q_end).vartheta == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("theta in [0,1), zero iff d=1") {
  for (int d : {1, 2, 3, 4}) {
    const double two_star = critical_exponent(d);
    const double qhi = std::isinf(two_star) ? 12.0 : two_star - 1e-6;
    for (double t : {0.05, 0.3, 0.7, 0.999}) {
      const double q = 1.0 + 1e-3 + t * (qhi - 1.0 - 1e-3);
      if (std::abs(q - 2.0) < 1e-3) continue;
      const ExponentSet e = build_exponents(d, q);
      CHECK(e.theta_rigidity >= 0.0);
      CHECK(e.theta_rigidity < 1.0);
      CHECK((e.theta_rigidity == 0.0) == (d == 1));
    }
  }
}

TEST_CASE("gamma + d/2 = p in the well regime") {
  for (double q : {2.5, 3.0, 4.0, 5.5})
    for (int d : {1, 2, 3}) {
      if (d == 3 && q >= 6.0) continue;
      const ExponentSet e = build_exponents(d, q);
      CHECK(e.gamma + 0.5 * d == doctest::Approx(e.p_holder).epsilon(1e-14));
    }
}

TEST_CASE("normalization set") {
  const NormalizationSet nrm = make_normalization(4.0 * M_PI, 4.0, 2.0);
  CHECK(nrm.kappa == doctest::Approx(std::sqrt(4.0 * M_PI)));
  // q < 2 makes the exponent negative: kappa < 1 for volume > 1
  const NormalizationSet small = make_normalization(4.0 * M_PI, 1.5, 2.0);
  CHECK(small.kappa < 1.0);
  CHECK(small.kappa == doctest::Approx(std::pow(4.0 * M_PI, 1.0 - 2.0 / 1.5)));

  CHECK(linear_regime_mu_threshold(nrm, 2.0, 4.0) ==
        doctest::Approx(std::sqrt(4.0 * M_PI)));
  CHECK(constant_equality_threshold_plain(2, 4.0) == doctest::Approx(1.0));
  CHECK(linear_regime_beta_threshold(small, 2.0, 3.0) ==
        doctest::Approx(4.0 * small.kappa));
}
