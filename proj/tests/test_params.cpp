#include <doctest.h>

#include <cmath>

#include "dhj/errors.hpp"
#include "dhj/params.hpp"

using namespace dhj;

TEST_CASE("critical mass closed form hits known values") {
  // (p,q) = (3,4): the formula collapses to exactly 2 in floating point.
  CHECK(critical_mass(3.0, 4.0) == 2.0);
  // (p,q) = (3,5): (3/2)*( (3/2)^... ) -> 1.5^(2/3).
  CHECK(critical_mass(3.0, 5.0) == doctest::Approx(std::pow(1.5, 2.0 / 3.0)).epsilon(1e-15));
  CHECK(critical_mass(3.0, 5.0) == doctest::Approx(1.3103706971044483).epsilon(1e-15));
  // (p,q) = (4,6): exponent 1/(p-1-q) = -1/3 on (3/3)=1, so value is 3/2.
  CHECK(critical_mass(4.0, 6.0) == doctest::Approx(1.5).epsilon(1e-15));
  // A generic non-special pair, frozen from an independent high-precision evaluation.
  CHECK(critical_mass(3.5, 4.7) == doctest::Approx(1.9430169258071825).epsilon(1e-14));
}

TEST_CASE("exponent guards reject the non-degenerate and non-superlinear ranges") {
  CHECK_THROWS_AS(critical_mass(2.0, 4.0), RangeError);   // need p > 2
  CHECK_THROWS_AS(critical_mass(1.5, 4.0), RangeError);
  CHECK_THROWS_AS(critical_mass(3.0, 3.0), RangeError);   // need q > p
  CHECK_THROWS_AS(critical_mass(3.0, 2.5), RangeError);
  CHECK_THROWS_AS(alpha_exponent(2.0, 3.0), RangeError);
  CHECK_THROWS_AS(epsilon_bound(3.0, 3.0), RangeError);
  const double nan = std::nan("");
  CHECK_THROWS_AS(critical_mass(nan, 4.0), RangeError);
  CHECK_THROWS_AS(critical_mass(3.0, nan), RangeError);
}

TEST_CASE("alpha exponent") {
  CHECK(alpha_exponent(3.0, 4.0) == 0.5);
  CHECK(alpha_exponent(3.0, 5.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // alpha is always in (0,1) for q > p.
  for (double q : {3.1, 4.0, 7.5, 30.0}) {
    const double a = alpha_exponent(3.0, q);
    CHECK(a > 0.0);
    CHECK(a < 1.0);
  }
}

TEST_CASE("regularization upper bound") {
  // (3,4): cosh(1)^(-2) ~= 0.41997... < 1/2, so the cosh term binds.
  CHECK(epsilon_bound(3.0, 4.0) == doctest::Approx(0.4199743416140261).epsilon(1e-15));
  CHECK(epsilon_bound(3.0, 4.0) ==
        doctest::Approx(std::pow(std::cosh(1.0), -2.0)).epsilon(1e-15));
  // (3,5): cosh(1)^(-3/2) ~= 0.543 > 1/2, so the 1/2 cap binds.
  CHECK(epsilon_bound(3.0, 5.0) == 0.5);
}

TEST_CASE("interior gradient-bound constant and default ceiling") {
  CHECK(c1_constant(2.0, 4.0, 3.0) == 0.5);  // sup/( (p-2) t0 ) = 2/(1*4)
  CHECK(c1_constant(0.0, 1.0, 3.0) == 0.0);
  CHECK_THROWS_AS(c1_constant(1.0, 0.0, 3.0), RangeError);
  CHECK_THROWS_AS(c1_constant(1.0, -1.0, 3.0), RangeError);
  CHECK_THROWS_AS(c1_constant(1.0, 1.0, 2.0), RangeError);
  CHECK_THROWS_AS(c1_constant(-1.0, 1.0, 3.0), RangeError);

  CHECK(default_K(1.2, 1.0) == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(default_K(0.5, 2.0) == 3.0);
}

TEST_CASE("derive computes the two-point slope constant") {
  ProblemParams prm;
  prm.p = 3.0;
  prm.q = 4.0;
  const DerivedConstants d = derive(prm);
  CHECK(d.m_b == 2.0);
  CHECK(d.alpha == 0.5);
  CHECK(d.c5 == 1.0);  // (q-p+1)/(p-1) = 2/2
}

TEST_CASE("validate fills K from the data and enforces the eps window") {
  ProblemParams prm;  // defaults: p=3 q=4 M=1 eps=0.1 K=0
  const DerivedConstants d = validate(prm, /*sup_u0=*/1.0);
  CHECK(prm.K == 2.0);  // max(sup|u0|, M) + 1
  CHECK(d.m_b == 2.0);

  // Re-validating with the filled K is stable.
  ProblemParams again = prm;
  validate(again, 1.0);
  CHECK(again.K == 2.0);

  // An explicit K below the data ceiling is rejected.
  ProblemParams bad_k = prm;
  bad_k.K = 0.5;
  CHECK_THROWS_AS(validate(bad_k, 1.0), RangeError);

  // eps must sit strictly inside (0, min(1/2, cosh(1)^((p-1-q)/(q-p)))).
  ProblemParams bad_eps = prm;
  bad_eps.eps = 0.45;  // above 0.41997... for (3,4)
  CHECK_THROWS_AS(validate(bad_eps, 1.0), RangeError);
  bad_eps.eps = 0.0;
  CHECK_THROWS_AS(validate(bad_eps, 1.0), RangeError);
  bad_eps.eps = -0.1;
  CHECK_THROWS_AS(validate(bad_eps, 1.0), RangeError);

  ProblemParams bad_m = prm;
  bad_m.M = -1.0;
  CHECK_THROWS_AS(validate(bad_m, 1.0), RangeError);
}
