#include "xsblab/xsb.hpp"

#include <cmath>

#include "xsblab/error.hpp"

namespace xsblab {

bool XsbIndex::in_trilinear_range() const {
  return s > -0.25 && s <= 0.0 && b > 7.0 / 12.0 && b < 11.0 / 12.0;
}

bool XsbIndex::in_duhamel_range() const {
  return b_prime > -0.5 && b_prime <= 0.0 && b >= 0.0 && b <= b_prime + 1.0;
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double c = std::exp(-1.0 / (1.0 - x));
  return a / (a + c);
}

double cutoff(double t) {
  const double r = std::abs(t);
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return smooth_step(2.0 - r);
}

double xsb_norm(const SpectralField& field, double s, double b, const PhaseParams& params,
                const SpaceTimeGrid& grid) {
  check_size(field, grid);
  double sum = 0;
  for (std::size_t k = 0; k < grid.nx(); ++k) {
    const double xi = grid.xi(k);
    const double spatial_weight = std::pow(bracket(xi), 2.0 * s);
    const double phi = phase_symbol(xi, params);
    for (std::size_t m = 0; m < grid.nt(); ++m) {
      const double amp2 = std::norm(field.at(k, m));
      if (amp2 == 0.0) continue;
      sum += spatial_weight * std::pow(bracket(grid.tau(m) - phi), 2.0 * b) * amp2;
    }
  }
  return std::sqrt(sum * grid.cell_area());
}

SpaceTimeField apply_time_window(const SpaceTimeField& u, const TimeWindow& window,
                                 const SpaceTimeGrid& grid) {
  check_size(u, grid);
  if (window.kind == TimeWindow::Kind::none) return u;
  require(window.scale > 0.0 && window.scale <= grid.time_span() / 4.0,
          ErrorCode::invalid_argument,
          "window scale T must lie in (0, T_span/4] to stay inside the time box");
  SpaceTimeField out = u;
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    const double w = window(grid.t(n));
    for (std::size_t j = 0; j < grid.nx(); ++j) out.at(j, n) *= w;
  }
  return out;
}

SpaceTimeField windowed_free_solution(const SpatialSpectrum& u0_hat, const TimeWindow& window,
                                      const PhaseParams& params, const SpaceTimeGrid& grid) {
  check_size(u0_hat, grid);
  if (window.kind == TimeWindow::Kind::smooth_bump) {
    require(window.scale > 0.0 && window.scale <= grid.time_span() / 4.0,
            ErrorCode::invalid_argument,
            "window scale T must lie in (0, T_span/4] to stay inside the time box");
  }
  SpaceTimeField out(grid.nx(), grid.nt());
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    const double t = grid.t(n);
    const double w = window(t);
    if (w == 0.0) continue;
    SpatialField slice = to_field(free_evolve(u0_hat, t, params, grid), grid);
    for (std::size_t j = 0; j < grid.nx(); ++j) out.at(j, n) = w * slice.values[j];
  }
  return out;
}

}  // namespace xsblab
