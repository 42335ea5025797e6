#include "xsblab/trilinear.hpp"

#include <algorithm>
#include <cmath>

#include "xsblab/error.hpp"
#include "xsblab/parallel.hpp"
#include "xsblab/xsb.hpp"

namespace xsblab {

namespace {

bool in_band(std::size_t k, std::size_t n) {
  return std::abs(SpaceTimeGrid::signed_index(k, n)) <= static_cast<long>(n / 3);
}

SpectralField pad(const SpectralField& f, std::size_t nx2, std::size_t nt2) {
  SpectralField out(nx2, nt2);
  for (std::size_t m = 0; m < f.nt; ++m) {
    const std::size_t m2 = SpaceTimeGrid::storage_index(SpaceTimeGrid::signed_index(m, f.nt), nt2);
    for (std::size_t k = 0; k < f.nx; ++k) {
      const std::size_t k2 = SpaceTimeGrid::storage_index(SpaceTimeGrid::signed_index(k, f.nx), nx2);
      out.at(k2, m2) = f.at(k, m);
    }
  }
  return out;
}

}  // namespace

std::string to_string(FieldFamily family) {
  return family == FieldFamily::packet ? "packet" : "gaussian_modes";
}

SpectralField random_field(FieldFamily family, std::mt19937_64& rng, const PhaseParams& params,
                           const SpaceTimeGrid& grid) {
  const double xi_band = grid.dxi() * static_cast<double>(grid.nx() / 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpectralField f(grid.nx(), grid.nt());

  // Envelope exp(-(xi - xi0)^2 / 2 w^2 - (tau - phi(xi) - sigma0)^2 / 2 h^2).
  double xi0 = 0.0, w = 0.0, sigma0 = 0.0, h = 0.0;
  if (family == FieldFamily::gaussian_modes) {
    w = xi_band * (0.2 + 0.8 * unit(rng));
    h = 0.5 + 3.5 * unit(rng);
  } else {
    xi0 = xi_band * (1.6 * unit(rng) - 0.8);
    w = 3.0 * grid.dxi() * (0.5 + unit(rng));
    sigma0 = 4.0 * unit(rng) - 2.0;
    h = 3.0 * grid.dtau() * (0.5 + unit(rng));
  }
  for (std::size_t m = 0; m < grid.nt(); ++m) {
    if (!in_band(m, grid.nt())) continue;
    const double tau = grid.tau(m);
    for (std::size_t k = 0; k < grid.nx(); ++k) {
      if (!in_band(k, grid.nx())) continue;
      const double xi = grid.xi(k);
      const double dxi = (xi - xi0) / w;
      const double dsig = (tau - phase_symbol(xi, params) - sigma0) / h;
      const double env = std::exp(-0.5 * (dxi * dxi + dsig * dsig));
      // Packets sit at the space-time origin: translated packets rarely overlap
      // and only push the search into the far tail.
      f.at(k, m) = family == FieldFamily::gaussian_modes ? env * complex_gaussian(rng) : cplx(env);
    }
  }
  // A field whose envelope misses the band entirely falls back to a single mode.
  const bool zero = std::all_of(f.values.begin(), f.values.end(), [](const cplx& z) { return std::abs(z) == 0.0; });
  if (zero) f.at(0, 0) = 1.0;
  return f;
}

TrilinearProduct trilinear_product(const SpectralField& u, const SpectralField& v,
                                   const SpectralField& w, const SpaceTimeGrid& grid) {
  check_size(u, grid);
  check_size(v, grid);
  check_size(w, grid);
  const std::size_t nx2 = 2 * grid.nx();
  const std::size_t nt2 = 2 * grid.nt();
  SpaceTimeGrid fine(grid.length(), nx2, grid.time_span(), nt2);
  const auto uf = to_space_time_field(pad(u, nx2, nt2), fine);
  const auto vf = to_space_time_field(pad(v, nx2, nt2), fine);
  const auto wf = to_space_time_field(pad(w, nx2, nt2), fine);
  SpaceTimeField prod(nx2, nt2);
  for (std::size_t i = 0; i < prod.values.size(); ++i) {
    prod.values[i] = uf.values[i] * vf.values[i] * std::conj(wf.values[i]);
  }
  return {fine, to_spectral_field(prod, fine)};
}

double trilinear_ratio(const SpectralField& u, const SpectralField& v, const SpectralField& w,
                       double s, double b, const PhaseParams& params, const SpaceTimeGrid& grid) {
  const double den = xsb_norm(u, s, b, params, grid) * xsb_norm(v, s, b, params, grid) *
                     xsb_norm(w, s, b, params, grid);
  require(den > 0.0, ErrorCode::invalid_argument, "trilinear ratio is undefined for a zero field");
  const auto p = trilinear_product(u, v, w, grid);
  return xsb_norm(p.product, s, b - 1.0, params, p.grid) / den;
}

double TrilinearReport::prefix_max(std::size_t count) const {
  require(count >= 1 && count <= ratios.size(), ErrorCode::invalid_argument,
          "prefix length out of range");
  return *std::max_element(ratios.begin(), ratios.begin() + static_cast<long>(count));
}

TrilinearReport trilinear_ratio_search(double s, double b, std::size_t ensemble_size,
                                       const SpaceTimeGrid& grid, const PhaseParams& params,
                                       std::uint64_t seed) {
  params.validate();
  require(XsbIndex{s, b, b - 1.0}.in_trilinear_range(), ErrorCode::invalid_argument,
          "trilinear search needs -1/4 < s <= 0 and 7/12 < b < 11/12");
  require(ensemble_size >= 1, ErrorCode::invalid_argument, "ensemble is empty");

  auto witnesses = parallel_map(ensemble_size, [&](std::size_t i) {
    auto rng = substream(seed, i);
    TrilinearWitness wit;
    wit.index = i;
    SpectralField f[3];
    for (int j = 0; j < 3; ++j) {
      wit.families[j] = rng() % 2 == 0 ? FieldFamily::gaussian_modes : FieldFamily::packet;
      f[j] = random_field(wit.families[j], rng, params, grid);
    }
    wit.ratio = trilinear_ratio(f[0], f[1], f[2], s, b, params, grid);
    return wit;
  });

  TrilinearReport report;
  report.ratios.reserve(ensemble_size);
  for (const auto& wit : witnesses) {
    report.ratios.push_back(wit.ratio);
    if (wit.ratio > report.sup_ratio) {
      report.sup_ratio = wit.ratio;
      report.witness = wit;
    }
  }
  return report;
}

std::vector<CounterexampleRatio> bump_family_ratios(const std::vector<double>& n_values, double s,
                                                    double b,
                                                    const CounterexampleResolution& resolution,
                                                    const PhaseParams& params) {
  require(!n_values.empty(), ErrorCode::invalid_argument, "N list is empty");
  return parallel_map(n_values.size(), [&](std::size_t i) {
    return counterexample_ratio(n_values[i], s, b, resolution, params);
  });
}

}  // namespace xsblab
