#pragma once

#include "xsblab/spectral.hpp"

namespace xsblab {

/// Regularity indices of an X^{s,b} measurement.
struct XsbIndex {
  double s = 0.0;
  double b = 0.5;
  /// Index of the forcing side in the Duhamel estimate.
  double b_prime = -0.4;

  double rho() const { return -s; }

  /// -1/4 < s <= 0 and 7/12 < b < 11/12 (range of the trilinear estimate).
  bool in_trilinear_range() const;
  /// -1/2 < b' <= 0 <= b <= b' + 1 (range of the Duhamel estimates).
  bool in_duhamel_range() const;
};

/// Smooth cutoff: 1 on |t| <= 1, 0 on |t| >= 2, monotone in between.
double cutoff(double t);

/// Derivative-free C^infinity transition built from e^{-1/x}: 0 at x <= 0, 1 at x >= 1.
double smooth_step(double x);

struct TimeWindow {
  enum class Kind { none, smooth_bump };
  Kind kind = Kind::smooth_bump;
  double scale = 1.0;

  /// psi_T(t) = psi(t / T), or 1 when kind == none.
  double operator()(double t) const {
    return kind == Kind::none ? 1.0 : cutoff(t / scale);
  }
};

/// ( sum_{k,m} <xi_k>^{2s} <tau_m - phi(xi_k)>^{2b} |F_{k,m}|^2 dxi dtau )^{1/2}
double xsb_norm(const SpectralField& field, double s, double b, const PhaseParams& params,
                const SpaceTimeGrid& grid);

inline double xsb_norm(const SpectralField& field, const XsbIndex& idx, const PhaseParams& params,
                       const SpaceTimeGrid& grid) {
  return xsb_norm(field, idx.s, idx.b, params, grid);
}

/// Pointwise multiplication by psi_T(t). Requires T in (0, T_span/4] so the
/// window fits strictly inside the time box.
SpaceTimeField apply_time_window(const SpaceTimeField& u, const TimeWindow& window,
                                 const SpaceTimeGrid& grid);

/// Space-time trajectory psi_T(t) U(t) u0 sampled on the grid nodes.
SpaceTimeField windowed_free_solution(const SpatialSpectrum& u0_hat, const TimeWindow& window,
                                      const PhaseParams& params, const SpaceTimeGrid& grid);

}  // namespace xsblab
