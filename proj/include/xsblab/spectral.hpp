#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace xsblab {

using cplx = std::complex<double>;

/// Coefficients of  u_t + i alpha u_xx + beta u_xxx + i gamma |u|^2 u = 0.
struct PhaseParams {
  double alpha = 0.0;
  double beta = 1.0;
  cplx gamma{1.0, 0.0};

  /// Conservation checks only apply when gamma is (numerically) real.
  bool gamma_is_real() const { return std::abs(gamma.imag()) < 1e-14; }

  /// Throws invalid_argument when beta == 0 or a coefficient is not finite.
  void validate() const;
};

/// Japanese bracket in the convention <x> = 1 + |x|.
inline double bracket(double x) { return 1.0 + (x < 0 ? -x : x); }

/// Dispersion symbol phi(xi) = alpha xi^2 + beta xi^3.
inline double phase_symbol(double xi, const PhaseParams& params) {
  return xi * xi * (params.alpha + params.beta * xi);
}

/// Periodic box [0, L) x [-T/2, T/2) with its frequency lattices.
///
/// Spatial modes are stored in canonical FFT order; `xi(k)` maps storage index
/// k to the signed frequency 2 pi k'/L with k' in [-nx/2, nx/2). The temporal
/// lattice works the same way with tau(m) = 2 pi m'/T.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(double length, std::size_t nx, double time_span, std::size_t nt);

  double length() const { return length_; }
  double time_span() const { return time_span_; }
  std::size_t nx() const { return nx_; }
  std::size_t nt() const { return nt_; }

  double dx() const { return length_ / static_cast<double>(nx_); }
  double dt() const { return time_span_ / static_cast<double>(nt_); }
  double dxi() const;
  double dtau() const;
  /// (2 pi / L)(2 pi / T): quadrature weight of one (xi, tau) lattice cell.
  double cell_area() const { return dxi() * dtau(); }

  double x(std::size_t j) const { return dx() * static_cast<double>(j); }
  double t(std::size_t n) const { return -0.5 * time_span_ + dt() * static_cast<double>(n); }

  static long signed_index(std::size_t k, std::size_t n) {
    return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
  }
  /// Storage slot of a signed mode index.
  static std::size_t storage_index(long signed_k, std::size_t n);

  double xi(std::size_t k) const { return dxi() * static_cast<double>(signed_index(k, nx_)); }
  double tau(std::size_t m) const { return dtau() * static_cast<double>(signed_index(m, nt_)); }

  /// Time node closest to t = 0 (exactly t = 0 since nt is even).
  std::size_t origin_node() const { return nt_ / 2; }

 private:
  double length_;
  std::size_t nx_;
  double time_span_;
  std::size_t nt_;
};

/// Samples u(x_j).
struct SpatialField {
  std::vector<cplx> values;
};

/// Continuum-normalised Fourier coefficients u^(xi_k), canonical FFT order.
struct SpatialSpectrum {
  std::vector<cplx> values;
};

/// Samples u(x_j, t_n), row-major with one row per time node.
struct SpaceTimeField {
  std::size_t nx = 0;
  std::size_t nt = 0;
  std::vector<cplx> values;

  SpaceTimeField() = default;
  SpaceTimeField(std::size_t nx_, std::size_t nt_) : nx(nx_), nt(nt_), values(nx_ * nt_) {}
  cplx& at(std::size_t j, std::size_t n) { return values[n * nx + j]; }
  const cplx& at(std::size_t j, std::size_t n) const { return values[n * nx + j]; }
};

/// Amplitudes u^(xi_k, tau_m), row-major with one row per temporal frequency.
struct SpectralField {
  std::size_t nx = 0;
  std::size_t nt = 0;
  std::vector<cplx> values;

  SpectralField() = default;
  SpectralField(std::size_t nx_, std::size_t nt_) : nx(nx_), nt(nt_), values(nx_ * nt_) {}
  cplx& at(std::size_t k, std::size_t m) { return values[m * nx + k]; }
  const cplx& at(std::size_t k, std::size_t m) const { return values[m * nx + k]; }
};

// Transforms carrying the continuum normalisation
//   u^(xi) = (2 pi)^{-1/2} \int u(x) e^{-i x xi} dx,
//   u^(xi, tau) = (2 pi)^{-1} \iint u(x, t) e^{-i (x xi + t tau)} dx dt,
// so that sum |u^|^2 dxi = sum |u|^2 dx exactly. Phases from the time origin
// are dropped; every norm only sees moduli.
SpatialSpectrum to_spectrum(const SpatialField& u, const SpaceTimeGrid& grid);
SpatialField to_field(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid);
SpectralField to_spectral_field(const SpaceTimeField& u, const SpaceTimeGrid& grid);
SpaceTimeField to_space_time_field(const SpectralField& u_hat, const SpaceTimeGrid& grid);

/// Inverse then forward transform; identity up to rounding.
SpatialSpectrum dft_roundtrip(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid);
SpectralField dft_roundtrip(const SpectralField& u_hat, const SpaceTimeGrid& grid);

double l2_norm(const SpatialField& u, const SpaceTimeGrid& grid);
double l2_norm(const SpaceTimeField& u, const SpaceTimeGrid& grid);
double l2_norm(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid);

/// ( sum_k <xi_k>^{2s} |u^_k|^2 dxi )^{1/2}
double sobolev_norm(const SpatialSpectrum& u_hat, double s, const SpaceTimeGrid& grid);

/// Free propagator: multiplies mode k by e^{i t phi(xi_k)}.
SpatialSpectrum free_evolve(const SpatialSpectrum& u0_hat, double t, const PhaseParams& params,
                            const SpaceTimeGrid& grid);

void check_size(const SpatialSpectrum& u_hat, const SpaceTimeGrid& grid);
void check_size(const SpectralField& u_hat, const SpaceTimeGrid& grid);
void check_size(const SpaceTimeField& u, const SpaceTimeGrid& grid);

}  // namespace xsblab
