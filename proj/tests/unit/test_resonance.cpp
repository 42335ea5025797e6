#include <array>
#include <cmath>
#include <initializer_list>
#include <numbers>

#include "doctest.h"
#include "xsblab/error.hpp"
#include "xsblab/resonance.hpp"

using namespace xsblab;

namespace {

// rho = 0, xi = y = 0: substituting x2 = x1 t and scaling x1 separates the
// double integral into 2 3^{-2/3} B(2/3, 2b - 2/3) B(1/3, 1/3), finite iff b > 1/3.
double i00_rho0(double b) {
  auto beta = [](double p, double q) { return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q)); };
  return 2.0 * std::pow(3.0, -2.0 / 3.0) * beta(2.0 / 3.0, 2.0 * b - 2.0 / 3.0) * beta(1.0 / 3.0, 1.0 / 3.0);
}

}  // namespace

TEST_CASE("mismatch and the cubic resonance function") {
  const ResonanceIntegrand r{0.1, 0.7, PhaseParams{}};
  for (auto [xi, x1, x2] : std::initializer_list<std::array<double, 3>>{{1.0, 2.0, -0.5}, {-3.0, 0.7, 4.0}, {12.0, -5.0, 8.0}}) {
    const double literal = xi * xi * xi + x1 * x1 * x1 - std::pow(xi + x1 - x2, 3) - x2 * x2 * x2;
    CHECK(r.mismatch(xi, x1, x2) == doctest::Approx(literal).epsilon(1e-12));
    // Flipping x1 and x2 turns the mismatch into g.
    CHECK(r.mismatch(xi, -x1, -x2) == doctest::Approx(ResonanceIntegrand::g(xi, x1, x2)).epsilon(1e-12));
    // Rescaled variables: g = 3 xi^3 F(u, v).
    const double u = (xi - x1) / xi, v = (xi + x2) / xi;
    CHECK(ResonanceIntegrand::g(xi, x1, x2) ==
          doctest::Approx(3.0 * xi * xi * xi * ResonanceIntegrand::F(u, v)).epsilon(1e-12));
  }
  const ResonanceIntegrand gen{0.1, 0.7, PhaseParams{0.4, 1.0, {1.0, 0.0}}};
  auto phi = [](double x) { return 0.4 * x * x + x * x * x; };
  const double literal = phi(2.0) + phi(-1.0) - phi(2.0 - 1.0 - 3.0) - phi(3.0);
  CHECK(gen.mismatch(2.0, -1.0, 3.0) == doctest::Approx(literal).epsilon(1e-12));
}

TEST_CASE("I(0,0) at rho = 0 matches the Beta closed form") {
  for (double b : {0.6, 0.7, 0.8}) {
    const auto v = eval_I(0.0, 0.0, 0.0, b);
    CHECK(v.value == doctest::Approx(i00_rho0(b)).epsilon(1e-5));
  }
  CHECK(i00_rho0(0.7) == doctest::Approx(9.70779357204801554).epsilon(1e-14));
}

TEST_CASE("direct, rescaled and mirrored evaluations agree") {
  const auto a = eval_I(3.0, 5.0, 0.1, 0.7, {}, {}, IntegralForm::direct);
  const auto c = eval_I(3.0, 5.0, 0.1, 0.7, {}, {}, IntegralForm::rescaled);
  const auto m = eval_I(-3.0, -5.0, 0.1, 0.7, {}, {}, IntegralForm::direct);
  CHECK(c.value == doctest::Approx(a.value).epsilon(3e-4));
  CHECK(m.value == doctest::Approx(a.value).epsilon(1e-6));
  CHECK(a.value > 0.0);
}

TEST_CASE("eval_I preconditions") {
  CHECK_THROWS_AS(eval_I(0.0, 0.0, 0.2, 0.5), Error);
  CHECK_THROWS_AS(eval_I(0.0, 0.0, 0.3, 0.9), Error);
  CHECK_THROWS_AS(eval_I(0.0, 0.0, -0.1, 0.9), Error);
  const auto u = eval_I_unchecked(0.0, 0.0, 0.2, 0.5, QuadSpec{}, PhaseParams{}, IntegralForm::direct);
  CHECK_FALSE(std::isfinite(u.value));
  CHECK(u.tail_slope > 0.0);
}

TEST_CASE("dichotomy on both sides of the threshold") {
  const auto radii = geometric_radii(4.0, 256.0);
  CHECK(radii.size() == 7);
  CHECK(dichotomy_I00(0.1, 0.7, radii).regime == DichotomyVerdict::Regime::convergent);
  CHECK(dichotomy_I00(0.1, 0.3, radii).regime == DichotomyVerdict::Regime::divergent);
  CHECK(dichotomy_I00(0.0, 0.2, radii).regime == DichotomyVerdict::Regime::divergent);
  CHECK_THROWS_AS(dichotomy_I00(0.1, 0.7, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(dichotomy_I00(0.1, 0.7, {1.0, 2.0, 4.0, 5.0}), Error);
}

TEST_CASE("scan grid and y coordinate") {
  const auto g = default_scan_grid(1, 1e3);
  CHECK(g.xi.front() == 0.0);
  CHECK(g.xi.back() == doctest::Approx(1e3));
  CHECK(scan_y(10.0, 0.5) == doctest::Approx(500.0));
  CHECK(scan_y(0.5, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("coarse uniform scan is finite") {
  ScanGrid grid{{0.0, 0.5, 4.0, 30.0}, {0.0, -1.0, 1.0}};
  QuadSpec q;
  q.truncation_radius = 256.0;
  q.tolerance = 1e-5;
  const auto rep = uniform_bound_scan(0.2, 0.7, grid, q);
  CHECK(rep.points.size() == 12);
  CHECK(rep.failures == 0);
  CHECK(std::isfinite(rep.sup));
  CHECK(rep.sup >= rep.sup_truncated);
  const auto neg = uniform_bound_scan(0.2, 0.5, ScanGrid{{0.0}, {0.0}}, q);
  CHECK(neg.divergent == 1);
  CHECK_FALSE(std::isfinite(neg.sup));
}

TEST_CASE("J2 is finite for a convergent index") {
  QuadSpec q;
  q.truncation_radius = 512.0;
  q.tolerance = 1e-5;
  const auto j = eval_J(PropositionIntegral::J2, 2.0, 0.5, 0.2, 0.7, q);
  CHECK(std::isfinite(j.value));
  CHECK(j.value > 0.0);
}
