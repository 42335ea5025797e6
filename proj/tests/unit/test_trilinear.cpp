#include <cmath>
#include <numbers>

#include "doctest.h"
#include "xsblab/error.hpp"
#include "xsblab/parallel.hpp"
#include "xsblab/trilinear.hpp"
#include "xsblab/xsb.hpp"

using namespace xsblab;
using std::numbers::pi;

namespace {

SpectralField single_mode(const SpaceTimeGrid& g, long k, long m, cplx a) {
  SpectralField f(g.nx(), g.nt());
  f.at(SpaceTimeGrid::storage_index(k, g.nx()), SpaceTimeGrid::storage_index(m, g.nt())) = a;
  return f;
}

}  // namespace

TEST_CASE("random fields stay in the third band") {
  const SpaceTimeGrid g(8.0 * pi, 32, 4.0 * pi, 64);
  for (auto family : {FieldFamily::gaussian_modes, FieldFamily::packet}) {
    auto rng = substream(1, static_cast<std::uint64_t>(family));
    const auto f = random_field(family, rng, PhaseParams{}, g);
    double total = 0.0;
    for (std::size_t m = 0; m < g.nt(); ++m) {
      for (std::size_t k = 0; k < g.nx(); ++k) {
        const bool inside = std::abs(SpaceTimeGrid::signed_index(k, g.nx())) <= 10 &&
                            std::abs(SpaceTimeGrid::signed_index(m, g.nt())) <= 21;
        if (!inside) CHECK(f.at(k, m) == cplx{});
        total += std::norm(f.at(k, m));
      }
    }
    CHECK(total > 0.0);
  }
  CHECK(to_string(FieldFamily::packet) == "packet");
}

TEST_CASE("product of plane waves is one alias-free mode") {
  const SpaceTimeGrid g(2.0 * pi, 16, 2.0 * pi, 16);
  const auto u = single_mode(g, 5, 3, {1.0, 0.5});
  const auto v = single_mode(g, 5, -4, {0.2, -1.0});
  const auto w = single_mode(g, -4, 4, {0.0, 2.0});
  const auto p = trilinear_product(u, v, w, g);
  CHECK(p.grid.nx() == 32);
  CHECK(p.grid.nt() == 32);
  CHECK(p.grid.length() == doctest::Approx(g.length()));
  // Frequencies add as k1 + k2 - k3 = 14 and m1 + m2 - m3 = -5, past the coarse Nyquist.
  const std::size_t kk = SpaceTimeGrid::storage_index(14, 32);
  const std::size_t mm = SpaceTimeGrid::storage_index(-5, 32);
  double off = 0.0;
  for (std::size_t m = 0; m < 32; ++m) {
    for (std::size_t k = 0; k < 32; ++k) {
      if (k != kk || m != mm) off = std::max(off, std::abs(p.product.at(k, m)));
    }
  }
  CHECK(off < 1e-12 * std::abs(p.product.at(kk, mm)));
  // |u v w| is constant in space-time, so the L2 norm over the box is the sample modulus product.
  auto modulus = [&](const SpectralField& f) { return std::abs(to_space_time_field(f, g).values[0]); };
  const double l2_physical = modulus(u) * modulus(v) * modulus(w) * std::sqrt(g.length() * g.time_span());
  const double l2_spectral = std::abs(p.product.at(kk, mm)) * std::sqrt(p.grid.cell_area());
  CHECK(l2_spectral == doctest::Approx(l2_physical).epsilon(1e-12));
}

TEST_CASE("ratio is scale invariant in each factor") {
  const SpaceTimeGrid g(8.0 * pi, 32, 4.0 * pi, 64);
  auto rng = substream(5, 0);
  const auto u = random_field(FieldFamily::packet, rng, PhaseParams{}, g);
  const auto v = random_field(FieldFamily::gaussian_modes, rng, PhaseParams{}, g);
  auto w = random_field(FieldFamily::packet, rng, PhaseParams{}, g);
  const double r = trilinear_ratio(u, v, w, -0.2, 0.75, PhaseParams{}, g);
  for (auto& x : w.values) x *= cplx{0.0, 7.0};
  CHECK(trilinear_ratio(u, v, w, -0.2, 0.75, PhaseParams{}, g) == doctest::Approx(r).epsilon(1e-12));
  CHECK(r > 0.0);
}

TEST_CASE("ensemble search is reproducible and prefix-stable") {
  const SpaceTimeGrid g(8.0 * pi, 32, 4.0 * pi, 64);
  const auto a = trilinear_ratio_search(-0.2, 0.75, 12, g, PhaseParams{}, 9);
  const auto b = trilinear_ratio_search(-0.2, 0.75, 24, g, PhaseParams{}, 9);
  REQUIRE(a.ratios.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) CHECK(a.ratios[i] == b.ratios[i]);
  CHECK(b.prefix_max(12) == a.sup_ratio);
  CHECK(b.sup_ratio == b.ratios[b.witness.index]);
  CHECK(b.witness.ratio == b.sup_ratio);
  CHECK_THROWS_AS(trilinear_ratio_search(-0.3, 0.75, 4, g, PhaseParams{}, 1), Error);
  CHECK_THROWS_AS(trilinear_ratio_search(-0.2, 0.5, 4, g, PhaseParams{}, 1), Error);
}

TEST_CASE("bump family reuses the counterexample ratio") {
  const auto rows = bump_family_ratios({64.0, 128.0}, -0.2, 0.75, CounterexampleResolution{}, PhaseParams{});
  REQUIRE(rows.size() == 2);
  const auto direct = counterexample_ratio(128.0, -0.2, 0.75, CounterexampleResolution{}, PhaseParams{});
  CHECK(rows[1].ratio == doctest::Approx(direct.ratio).epsilon(1e-14));
}
