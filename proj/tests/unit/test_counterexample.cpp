#include <array>
#include <cmath>
#include <initializer_list>
#include <random>

#include "doctest.h"
#include "xsblab/counterexample.hpp"
#include "xsblab/error.hpp"
#include "xsblab/scaling.hpp"

using namespace xsblab;

namespace {

double phi3(double x) { return x * x * x; }

// Closed form of the slab integral of <xi>^{2s} <sigma>^{2b}.
double slab_norm(double n, double s, double b) {
  const double w = 1.0 / std::sqrt(n);
  const double e = 2 * s + 1;
  const double xi_part = e == 0.0 ? std::log((1.0 + n + w) / (1.0 + n))
                                  : (std::pow(1.0 + n + w, e) - std::pow(1.0 + n, e)) / e;
  const double sigma_part = 2.0 * (std::pow(2.0, 2 * b + 1) - 1.0) / (2 * b + 1);
  return std::sqrt(xi_part * sigma_part);
}

}  // namespace

TEST_CASE("four-wave mismatch matches the literal phase sum") {
  const PhaseParams params{0.7, -1.3, {1.0, 0.0}};
  auto phi = [&](double x) { return 0.7 * x * x - 1.3 * x * x * x; };
  for (auto [x1, x2, w] : std::initializer_list<std::array<double, 3>>{{1.0, 2.0, 0.5}, {-3.0, 0.25, 4.0}, {10.0, -7.0, 2.0}}) {
    const double literal = phi(x1) + phi(x2) - phi(x1 + x2 - w) - phi(w);
    CHECK(four_wave_resonance(x1, x2, w, params) == doctest::Approx(literal).epsilon(1e-12));
  }
}

TEST_CASE("bump geometry") {
  const auto bump = build_bump(64.0, 64, 64, PhaseParams{});
  CHECK(bump.width() == doctest::Approx(0.125));
  CHECK(bump.measure == doctest::Approx(2.0 / 8.0));
  CHECK(bump.samples.size() == 64 * 64);
  double total = 0.0;
  for (const auto& p : bump.samples) {
    CHECK(p.xi >= 64.0);
    CHECK(p.xi <= 64.125);
    CHECK(std::abs(p.sigma) <= 1.0);
    total += p.weight;
  }
  CHECK(total == doctest::Approx(bump.measure));
  CHECK_THROWS_AS(build_bump(2.0, 64, 64, PhaseParams{}), Error);
  CHECK_THROWS_AS(build_bump(64.0, 16, 64, PhaseParams{}), Error);
}

TEST_CASE("bump norm agrees with the closed-form slab integral") {
  for (double n : {16.0, 256.0}) {
    const auto bump = build_bump(n, 64, 64, PhaseParams{});
    for (auto [s, b] : std::initializer_list<std::array<double, 2>>{{0.0, 0.0}, {-0.5, 0.75}, {-0.25, 0.6}}) {
      CHECK(bump_xsb_norm(bump, s, b) == doctest::Approx(slab_norm(n, s, b)).epsilon(1e-4));
    }
  }
}

TEST_CASE("convolution carries the Fubini mass |B|^3") {
  const auto bump = build_bump(64.0, 64, 64, PhaseParams{});
  const auto lattice = support_lattice(bump, 48, 256);
  const auto conv = triple_convolution(bump, lattice, ConvolutionOptions{});
  CHECK(conv.total_mass == doctest::Approx(std::pow(bump.measure, 3)).epsilon(0.02));
  CHECK(conv.max_value > 0.0);
  CHECK(conv.max_value <= bump.measure * bump.measure * (1.0 + 1e-9));
  CHECK(conv.half_max_area > 0.0);
}

TEST_CASE("tensor rule agrees with a brute-force hit count") {
  const double n = 16.0;
  const auto bump = build_bump(n, 64, 64, PhaseParams{});
  const double w = bump.width();
  const double xi_t = n + 0.5 * w;
  const double sigma_t = 0.3;
  const double tau_t = phi3(xi_t) + sigma_t;
  // Sample (x, y) uniformly in B x B and count x + y - zeta in B.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uxi(n, n + w), us(-1.0, 1.0);
  const std::size_t samples = 400000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = uxi(rng), c = uxi(rng);
    const double ta = phi3(a) + us(rng), tc = phi3(c) + us(rng);
    const double xi = a + c - xi_t;
    const double tau = ta + tc - tau_t;
    if (xi >= n && xi <= n + w && std::abs(tau - phi3(xi)) <= 1.0) ++hits;
  }
  const double p = static_cast<double>(hits) / samples;
  const double area = bump.measure * bump.measure;
  const double mc = area * p;
  const double se = area * std::sqrt(p * (1 - p) / samples);
  const double tensor = triple_convolution_at(bump, xi_t, sigma_t);
  CHECK(std::abs(tensor - mc) < 4.0 * se + 1e-3 * mc);
}

TEST_CASE("monte carlo and tensor rule agree on the mass") {
  const auto bump = build_bump(64.0, 64, 64, PhaseParams{});
  const auto lattice = support_lattice(bump, 24, 64);
  ConvolutionOptions mc;
  mc.method = ConvolutionMethod::monte_carlo;
  mc.strata_per_dim = 8;
  const auto a = triple_convolution(bump, lattice, ConvolutionOptions{});
  const auto b = triple_convolution(bump, lattice, mc);
  CHECK(b.total_mass == doctest::Approx(a.total_mass).epsilon(0.05));
  const auto b2 = triple_convolution(bump, lattice, mc);
  CHECK(b2.values == b.values);
}

TEST_CASE("counterexample ratio bookkeeping") {
  const auto r = counterexample_ratio(64.0, -0.25, 0.75, CounterexampleResolution{}, PhaseParams{});
  CHECK(r.ratio == doctest::Approx(r.num / r.den));
  CHECK(r.expected_mass == doctest::Approx(std::pow(2.0 / 8.0, 3)));
  const auto rs = counterexample_ratios(64.0, {-0.5, -0.25, 0.0}, 0.75, CounterexampleResolution{}, PhaseParams{});
  REQUIRE(rs.size() == 3);
  CHECK(rs[1].ratio == doctest::Approx(r.ratio));
  CHECK(rs[0].ratio > rs[1].ratio);
}

TEST_CASE("scaling fit recovers a synthetic power law") {
  std::vector<ScalingPoint> pts;
  for (double n : {64.0, 128.0, 256.0, 512.0, 1024.0}) pts.push_back({n, 3.0 * std::pow(n, -0.7)});
  const auto fit = fit_scaling_exponent(pts);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.stderr_slope < 1e-10);

  // Multiplicative noise of known size: the slope stays within a few stderr.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<ScalingPoint> noisy;
  for (double n = 10.0; n < 1e4; n *= 1.5) noisy.push_back({n, std::pow(n, 0.3) * std::exp(noise(rng))});
  const auto f2 = fit_scaling_exponent(noisy);
  CHECK(std::abs(f2.slope - 0.3) < 5.0 * f2.stderr_slope + 1e-3);

  CHECK_THROWS_AS(fit_scaling_exponent({{1, 1}, {2, 2}, {3, 3}}), Error);
  CHECK_THROWS_AS(fit_scaling_exponent({{1, 1}, {2, 2}, {2, 3}, {4, 4}}), Error);
  CHECK_THROWS_AS(fit_scaling_exponent({{1, 1}, {2, -2}, {3, 3}, {4, 4}}), Error);
}
