#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xsblab/spectral.hpp"

namespace xsblab {

/// Exact four-wave phase mismatch phi(x1) + phi(x2) - phi(x1 + x2 - w) - phi(w),
/// evaluated in factored form so it stays accurate at large frequencies.
inline double four_wave_resonance(double x1, double x2, double w, const PhaseParams& params) {
  return -(x1 - w) * (x2 - w) * (2.0 * params.alpha + 3.0 * params.beta * (x1 + x2));
}

/// Point of the slab {N <= xi <= N + N^{-1/2}, |tau - phi(xi)| <= 1}. The
/// modulation sigma = tau - phi(xi) is stored directly to avoid cancellation.
struct BumpSample {
  double xi = 0.0;
  double sigma = 0.0;
  double weight = 0.0;
};

struct BumpSet {
  double n = 0.0;
  PhaseParams params;
  std::size_t n_xi = 0;
  std::size_t n_sigma = 0;
  std::vector<BumpSample> samples;
  double measure = 0.0;

  /// Slab width N^{-1/2}.
  double width() const;
};

/// Midpoint tensor quadrature of the slab. Requires N >= 4 and at least 64 x 64 cells.
BumpSet build_bump(double n, std::size_t n_xi, std::size_t n_sigma, const PhaseParams& params);

/// ( \int_B <xi>^{2s} <tau - phi(xi)>^{2b} )^{1/2}
double bump_xsb_norm(const BumpSet& bump, double s, double b);

/// Rectangular target lattice in rescaled coordinates: xi = N + N^{-1/2} v,
/// tau = phi(xi) + sigma, cell midpoints.
struct TargetLattice {
  std::size_t n_v = 0;
  std::size_t n_sigma = 0;
  double v_min = -1.0;
  double v_max = 2.0;
  double sigma_max = 0.0;

  double v(std::size_t i) const;
  double sigma(std::size_t j) const;
  double dv() const { return (v_max - v_min) / static_cast<double>(n_v); }
  double dsigma() const { return 2.0 * sigma_max / static_cast<double>(n_sigma); }
};

/// Lattice covering the full support of chi_B * chi_B * chi_{-B}.
TargetLattice support_lattice(const BumpSet& bump, std::size_t n_v, std::size_t n_sigma);

enum class ConvolutionMethod { tensor_grid, monte_carlo };

struct ConvolutionOptions {
  ConvolutionMethod method = ConvolutionMethod::tensor_grid;
  /// Monte Carlo: strata per dimension of the 4-d sample space (samples = m^4).
  std::size_t strata_per_dim = 8;
  std::uint64_t seed = 1;
  /// Tensor grid: Gauss-Legendre panels for the outer variable.
  std::size_t panels = 32;
};

struct ConvolutionResult {
  TargetLattice lattice;
  double n = 0.0;
  double width = 0.0;
  /// Row-major, one row per sigma value.
  std::vector<double> values;
  std::vector<double> std_errors;
  double total_mass = 0.0;
  double max_value = 0.0;
  /// Area of {conv >= max/2}, the lower-bound rectangle located empirically.
  double half_max_area = 0.0;
  double half_max_relative_error = 0.0;
  /// Set when the Monte Carlo relative error on the half-max region exceeds 5%.
  bool insufficient_sampling = false;

  double at(std::size_t i_v, std::size_t j_sigma) const { return values[j_sigma * lattice.n_v + i_v]; }
  double cell_area() const { return width * lattice.dv() * lattice.dsigma(); }
};

/// (chi_B * chi_B * chi_{-B})(zeta) = area{(x, y) in B x B : x + y - zeta in B}.
ConvolutionResult triple_convolution(const BumpSet& bump, const TargetLattice& lattice,
                                     const ConvolutionOptions& options);

/// Single target evaluated with the deterministic tensor rule.
double triple_convolution_at(const BumpSet& bump, double xi, double sigma, std::size_t panels = 32);

/// X^{s, b_minus_one} norm of the convolution over its lattice.
double convolution_xsb_norm(const ConvolutionResult& conv, double s, double b_minus_one);

struct CounterexampleResolution {
  std::size_t n_xi = 64;
  std::size_t n_sigma = 64;
  std::size_t target_v = 48;
  std::size_t target_sigma = 256;
  ConvolutionOptions convolution;
};

struct CounterexampleRatio {
  double n = 0.0;
  double num = 0.0;
  double den = 0.0;
  double ratio = 0.0;
  double total_mass = 0.0;
  double expected_mass = 0.0;
  double half_max_area = 0.0;
  bool insufficient_sampling = false;
};

/// num = ||chi_B * chi_B * chi_{-B}||_{X^{s,b-1}}, den = ||chi_B||_{X^{s,b}}^3.
CounterexampleRatio counterexample_ratio(double n, double s, double b,
                                         const CounterexampleResolution& resolution,
                                         const PhaseParams& params);

/// Same ratio for several s values sharing one convolution.
std::vector<CounterexampleRatio> counterexample_ratios(double n, const std::vector<double>& s_values,
                                                       double b,
                                                       const CounterexampleResolution& resolution,
                                                       const PhaseParams& params);

}  // namespace xsblab
