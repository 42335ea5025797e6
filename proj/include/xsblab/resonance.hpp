#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xsblab/quadrature.hpp"
#include "xsblab/spectral.hpp"

namespace xsblab {

/// Weights and resonance functions of the trilinear duality integral.
///
/// Direct variables (x1, x2) carry the weight
///   G(xi, x1, x2) = <xi + x1 - x2>^{2 rho} <x1>^{2 rho} <x2>^{2 rho}
/// and the mismatch phi(xi) + phi(x1) - phi(xi + x1 - x2) - phi(x2). For
/// alpha = 0, beta = 1 the flip x -> -x turns it into g(xi, x1, x2).
struct ResonanceIntegrand {
  double rho = 0.2;
  double b = 0.7;
  PhaseParams params;

  double G(double xi, double x1, double x2) const;
  /// 3 (x1 - x2)(xi - x1)(xi + x2)
  static double g(double xi, double x1, double x2) {
    return 3.0 * (x1 - x2) * (xi - x1) * (xi + x2);
  }
  double mismatch(double xi, double x1, double x2) const;

  /// Rescaled variables xi - x1 = xi u, xi + x2 = xi v (flipped frame).
  double H(double xi, double u, double v) const;
  static double F(double u, double v) { return (2.0 - (u + v)) * u * v; }
  /// xi^2 / (<xi^3 z>^{2(1-b)} <xi>^{2 rho})
  double p(double xi, double z) const;
  static double l2(double x1, double z) { return (x1 - 2.0) * (x1 - 2.0) / 4.0 + z / x1; }
  double c() const { return (2.0 + 4.0 * rho) / 3.0; }

  /// Integrand of I(xi, y) in direct variables, without the prefactor.
  double direct(double xi, double y, double x1, double x2) const;
  /// Integrand in rescaled variables. The mismatch is exactly 3 beta xi^3 F,
  /// hence the factor 3 inside the bracket.
  double rescaled(double xi, double z, double u, double v) const;
};

enum class IntegralForm { automatic, direct, rescaled };

struct IntegralValue {
  IntegralForm form = IntegralForm::direct;
  /// prefactor * (truncated + tail); +inf when the tail does not decay.
  double value = 0.0;
  double truncated = 0.0;
  double tail_estimate = 0.0;
  double tail_slope = 0.0;
  double error = 0.0;
  double prefactor = 1.0;
  ShellIntegral shells;
};

/// I(xi, y) = <xi>^{-2 rho} <y>^{-2(1-b)} \iint G / <y + mismatch>^{2b}.
/// Requires 0 <= rho < 1/4 and b > rho + 1/3. The rescaled form is used for
/// |xi| > 1 when alpha = 0 (automatic). Throws QuadratureError with the
/// truncated value when the tail is not under control at the truncation radius.
IntegralValue eval_I(double xi, double y, double rho, double b, const QuadSpec& quad = {},
                     const PhaseParams& params = {}, IntegralForm form = IntegralForm::automatic);

/// Same quadrature without the convergence precondition or the tail check;
/// used by negative controls.
IntegralValue eval_I_unchecked(double xi, double y, double rho, double b, const QuadSpec& quad,
                               const PhaseParams& params, IntegralForm form,
                               bool mirrored = false);

struct DichotomyVerdict {
  enum class Regime { convergent, divergent, near_threshold };
  Regime regime = Regime::near_threshold;
  double tail_slope = 0.0;
  std::vector<double> radii;
  std::vector<double> partial_integrals;
};

std::string to_string(DichotomyVerdict::Regime regime);

/// I(0,0) over a geometric ladder of radii; divergent iff the shell increments
/// grow (log-log slope > 0.02), convergent iff they decay with slope < -0.02.
DichotomyVerdict dichotomy_I00(double rho, double b, const std::vector<double>& radii,
                               double rel_tol = 1e-6);

/// Geometric ladder r0, 2 r0, ..., up to r_max.
std::vector<double> geometric_radii(double r0, double r_max, double ratio = 2.0);

struct BoundPoint {
  double xi = 0.0;
  double y = 0.0;
  double z = 0.0;
  double value = 0.0;
  double truncated = 0.0;
  double tail_slope = 0.0;
  bool ok = true;
  std::string message;
};

struct BoundReport {
  std::vector<BoundPoint> points;
  /// sup of the extrapolated values over successful points (+inf if any tail diverges).
  double sup = 0.0;
  /// sup of the truncated values.
  double sup_truncated = 0.0;
  double argmax_xi = 0.0;
  double argmax_y = 0.0;
  std::size_t failures = 0;
  std::size_t divergent = 0;
};

/// Scan grid: xi in {0} U +-logspace(-1, log10(xi_max)), z in {0} U +-logspace(-2, 2).
/// The y coordinate is xi^3 z for |xi| > 1 and z otherwise.
struct ScanGrid {
  std::vector<double> xi;
  std::vector<double> z;
};
ScanGrid default_scan_grid(std::size_t points_per_decade, double xi_max = 1e3,
                           bool negative_xi = false);

double scan_y(double xi, double z);

/// sup of I over the grid. Per-point failures are recorded and the scan
/// continues. When alpha = 0 only xi >= 0 is needed: I(-xi, -y) = I(xi, y).
BoundReport uniform_bound_scan(double rho, double b, const ScanGrid& grid, const QuadSpec& quad = {},
                               const PhaseParams& params = {});

enum class PropositionIntegral { J1, J2 };

/// J2 = xi^{2+4 rho} \iint <xi^3 (z + F)>^{-2b}, J1 the same over x1 > 0 with
/// weight x1^{4 rho}. Both use F as written, without the factor 3.
IntegralValue eval_J(PropositionIntegral which, double xi, double z, double rho, double b,
                     const QuadSpec& quad = {});

struct PropositionReport {
  BoundReport j1;
  BoundReport j2;
};

/// J1 and J2 over xi_list x z_list (|xi| > 1, z >= 0).
PropositionReport proposition_checks(double rho, double b, const std::vector<double>& xi_list,
                                     const std::vector<double>& z_list, const QuadSpec& quad = {});

}  // namespace xsblab
