#include <cmath>
#include <vector>

#include "doctest.h"
#include "xsblab/error.hpp"
#include "xsblab/lemmas.hpp"
#include "xsblab/quadrature.hpp"

using namespace xsblab;

// Reference constants from 30-digit mpmath quadrature or Beta-function closed forms.

TEST_CASE("adaptive Gauss-Kronrod on a sqrt endpoint singularity") {
  const double breaks[] = {0.0, 1.0};
  const auto r = quad::adaptive([](double x) { return std::sqrt(x); }, breaks, 1e-12, 0.0, 200);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("mapped tail integral") {
  const auto r = quad::tail([](double x) { return std::pow(x, -3.0); }, 2.0, 3.0, 1e-12, 0.0, 200);
  CHECK(r.value == doctest::Approx(0.125).epsilon(1e-10));
}

TEST_CASE("el1") {
  // b = 3/4 and a1 = a2: \int <x>^{-3} = 1 exactly.
  CHECK(check_el1(0.0, 0.0, 0.75).value == doctest::Approx(1.0).epsilon(1e-7));
  const auto c = check_el1(0.0, 10.0, 0.75);
  CHECK(c.value == doctest::Approx(0.14847859666892754).epsilon(1e-7));
  CHECK(c.ratio == doctest::Approx(0.14847859666892754 * std::pow(11.0, 1.5)).epsilon(1e-7));
  CHECK(check_el1(3.0, 13.0, 0.75).value == doctest::Approx(c.value).epsilon(1e-7));
  CHECK_THROWS_AS(check_el1(0.0, 1.0, 0.5), Error);
}

TEST_CASE("el2 against Beta closed forms") {
  // \int |x|^{-c1} |x-1|^{-c2} = B(1-c1,1-c2) + B(1-c1,c1+c2-1) + B(1-c2,c1+c2-1).
  CHECK(check_el2(0.0, 1.0, 0.6, 0.6).value == doctest::Approx(17.902340029051564).epsilon(1e-6));
  CHECK(check_el2(0.0, 1.0, 0.7, 0.5).value == doctest::Approx(18.571577600784974).epsilon(1e-6));
  // Scale covariance: the ratio is independent of the separation.
  CHECK(check_el2(2.0, 7.0, 0.6, 0.6).ratio == doctest::Approx(17.902340029051564).epsilon(1e-6));
  CHECK_THROWS_AS(check_el2(0.0, 1.0, 0.3, 0.5), Error);
  CHECK_THROWS_AS(check_el2(1.0, 1.0, 0.6, 0.6), Error);
}

TEST_CASE("el3 sup against calculus") {
  // sup |x|^{1/2} / <a x> is attained at x = 1/a with value a^{-1/2} / 2.
  for (double a : {0.1, 1.0, 10.0}) {
    const auto c = check_el3(a, 0.5, 1.0);
    CHECK(c.value == doctest::Approx(0.5 / std::sqrt(a)).epsilon(1e-3));
    CHECK(c.ratio == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::abs(c.argmax) == doctest::Approx(1.0 / a).epsilon(0.05));
  }
  CHECK(check_el3(1.0, 1.0, 1.0).value == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(check_el3(-1.0, 0.5, 1.0), Error);
}

TEST_CASE("el4") {
  CHECK(check_el4(1.0, 1.0, 0.75).value == doctest::Approx(2.0).epsilon(1e-7));
  const auto c = check_el4(1.0, 10.0, 0.75);
  CHECK(c.value == doctest::Approx(0.37983798379837984).epsilon(1e-6));
  CHECK(c.ratio == doctest::Approx(3.7983798379837984).epsilon(1e-6));
  CHECK(check_el4(10.0, 1.0, 0.75).value == doctest::Approx(0.33376756714777339).epsilon(1e-6));
  CHECK(check_el4(1.0, 100.0, 0.75).value == doctest::Approx(0.039799980397999804).epsilon(1e-6));
  CHECK_THROWS_AS(check_el4(0.0, 1.0, 0.75), Error);
}

TEST_CASE("ratio spread") {
  std::vector<LemmaCheck> v(3);
  v[0].ratio = 2.0;
  v[1].ratio = 1.0;
  v[2].ratio = 4.0;
  CHECK(ratio_spread(v) == doctest::Approx(4.0));
}
