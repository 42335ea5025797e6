#include "xsblab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "xsblab/error.hpp"
#include "xsblab/fft.hpp"

namespace xsblab {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool is_power_of_two_at_least_8(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

double spatial_scale(const SpaceTimeGrid& grid) {
  return grid.dx() * std::sqrt(static_cast<double>(grid.nx()) / two_pi);
}

double space_time_scale(const SpaceTimeGrid& grid) {
  return grid.dx() * grid.dt() * std::sqrt(static_cast<double>(grid.nx() * grid.nt())) / two_pi;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::blow_up: return "blow_up";
    case ErrorCode::outside_contraction: return "outside_contraction";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

void PhaseParams::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma.real()) &&
              std::isfinite(gamma.imag()),
          ErrorCode::invalid_argument, "phase coefficients must be finite");
  require(beta != 0.0, ErrorCode::invalid_argument, "beta must be nonzero");
}

SpaceTimeGrid::SpaceTimeGrid(double length, std::size_t nx, double time_span, std::size_t nt)
    : length_(length), nx_(nx), time_span_(time_span), nt_(nt) {
  require(std::isfinite(length) && length > 0, ErrorCode::invalid_argument,
          "spatial period must be positive");
  require(std::isfinite(time_span) && time_span > 0, ErrorCode::invalid_argument,
          "temporal period must be positive");
  require(is_power_of_two_at_least_8(nx), ErrorCode::invalid_argument,
          "nx must be a power of two >= 8, got " + std::to_string(nx));
  require(is_power_of_two_at_least_8(nt), ErrorCode::invalid_argument,
          "nt must be a power of two >= 8, got " + std::to_string(nt));
}

double SpaceTimeGrid::dxi() const { return two_pi / length_; }
double SpaceTimeGrid::dtau() const { return two_pi / time_span_; }

std::size_t SpaceTimeGrid::storage_index(long signed_k, std::size_t n) {
  const long half = static_cast<long>(n / 2);
  require(signed_k >= -half && signed_k < half, ErrorCode::invalid_argument,
          "mode index outside the lattice");
  return signed_k >= 0 ? static_cast<std::size_t>(signed_k)
                       : static_cast<std::size_t>(signed_k + static_cast<long>(n));
}

void check_size(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid) {
  require(u_hat.values.size() == grid.nx(), ErrorCode::dimension_mismatch,
          "spectrum length " + std::to_string(u_hat.values.size()) + " != nx " +
              std::to_string(grid.nx()));
}

void check_size(const SpectralField& u_hat, const SpaceTimeGrid& grid) {
  require(u_hat.nx == grid.nx() && u_hat.nt == grid.nt() &&
              u_hat.values.size() == grid.nx() * grid.nt(),
          ErrorCode::dimension_mismatch, "spectral field does not match the grid");
}

void check_size(const SpaceTimeField& u, const SpaceTimeGrid& grid) {
  require(u.nx == grid.nx() && u.nt == grid.nt() && u.values.size() == grid.nx() * grid.nt(),
          ErrorCode::dimension_mismatch, "space-time field does not match the grid");
}

SpatialSpectrum to_spectrum(const SpatialField& u, const SpaceTimeGrid& grid) {
  require(u.values.size() == grid.nx(), ErrorCode::dimension_mismatch,
          "field length does not match nx");
  SpatialSpectrum out{std::vector<cplx>(grid.nx())};
  fft::transform_1d(u.values, out.values, fft::Direction::forward);
  const double scale = spatial_scale(grid);
  for (auto& v : out.values) v *= scale;
  return out;
}

SpatialField to_field(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid) {
  check_size(u_hat, grid);
  SpatialField out{std::vector<cplx>(grid.nx())};
  fft::transform_1d(u_hat.values, out.values, fft::Direction::inverse);
  const double scale = 1.0 / spatial_scale(grid);
  for (auto& v : out.values) v *= scale;
  return out;
}

SpectralField to_spectral_field(const SpaceTimeField& u, const SpaceTimeGrid& grid) {
  check_size(u, grid);
  SpectralField out(grid.nx(), grid.nt());
  fft::transform_2d(u.values, out.values, grid.nt(), grid.nx(), fft::Direction::forward);
  const double scale = space_time_scale(grid);
  for (auto& v : out.values) v *= scale;
  return out;
}

SpaceTimeField to_space_time_field(const SpectralField& u_hat, const SpaceTimeGrid& grid) {
  check_size(u_hat, grid);
  SpaceTimeField out(grid.nx(), grid.nt());
  fft::transform_2d(u_hat.values, out.values, grid.nt(), grid.nx(), fft::Direction::inverse);
  const double scale = 1.0 / space_time_scale(grid);
  for (auto& v : out.values) v *= scale;
  return out;
}

SpatialSpectrum dft_roundtrip(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid) {
  return to_spectrum(to_field(u_hat, grid), grid);
}

SpectralField dft_roundtrip(const SpectralField& u_hat, const SpaceTimeGrid& grid) {
  return to_spectral_field(to_space_time_field(u_hat, grid), grid);
}

double l2_norm(const SpatialField& u, const SpaceTimeGrid& grid) {
  double sum = 0;
  for (const auto& v : u.values) sum += std::norm(v);
  return std::sqrt(sum * grid.dx());
}

double l2_norm(const SpaceTimeField& u, const SpaceTimeGrid& grid) {
  double sum = 0;
  for (const auto& v : u.values) sum += std::norm(v);
  return std::sqrt(sum * grid.dx() * grid.dt());
}

double l2_norm(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid) {
  return sobolev_norm(u_hat, 0.0, grid);
}

double sobolev_norm(const SpatialSpectrum& u_hat, double s, const SpaceTimeGrid& grid) {
  check_size(u_hat, grid);
  require(std::isfinite(s), ErrorCode::invalid_argument, "Sobolev index must be finite");
  double sum = 0;
  for (std::size_t k = 0; k < grid.nx(); ++k) {
    const double amp2 = std::norm(u_hat.values[k]);
    if (amp2 == 0.0) continue;
    sum += std::pow(bracket(grid.xi(k)), 2.0 * s) * amp2;
  }
  return std::sqrt(sum * grid.dxi());
}

SpatialSpectrum free_evolve(const SpatialSpectrum& u0_hat, double t, const PhaseParams& params,
                            const SpaceTimeGrid& grid) {
  check_size(u0_hat, grid);
  require(std::isfinite(t), ErrorCode::invalid_argument, "time must be finite");
  SpatialSpectrum out = u0_hat;
  if (t == 0.0) return out;
  for (std::size_t k = 0; k < grid.nx(); ++k) {
    out.values[k] *= std::polar(1.0, t * phase_symbol(grid.xi(k), params));
  }
  return out;
}

}  // namespace xsblab
