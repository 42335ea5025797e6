#pragma once

#include <vector>

#include "xsblab/quadrature.hpp"

namespace xsblab {

/// A one-dimensional calculus inequality measured at one parameter point:
/// `ratio` is the integral (or sup) times the claimed decay rate, which the
/// inequality says stays bounded.
struct LemmaCheck {
  double value = 0.0;
  double ratio = 0.0;
  double error = 0.0;
  /// Where the sup was attained (grid checks only).
  double argmax = 0.0;
};

/// \int dx / (<x - a1>^{2b} <x - a2>^{2b}), ratio = value <a1 - a2>^{2b}. Requires b > 1/2.
LemmaCheck check_el1(double a1, double a2, double b, const QuadSpec& quad = {});

/// \int dx / (|x - a1|^{c1} |x - a2|^{c2}), ratio = value |a1 - a2|^{c1 + c2 - 1}.
/// Requires 0 < c1, c2 < 1, c1 + c2 > 1, a1 != a2. The singular windows are
/// integrated by subtracting the leading power law.
LemmaCheck check_el2(double a1, double a2, double c1, double c2, const QuadSpec& quad = {});

/// sup_x |x|^{c1} / <a x>^{c2} over a log grid, ratio = sup a^{c1}.
/// Requires a > 0, 0 <= c1 <= c2.
LemmaCheck check_el3(double a, double c1, double c2, const QuadSpec& quad = {});

/// \int dx / <a (x^2 - eta^2)>^{2b}, ratio = value |a eta|. Requires b > 1/2, a, eta != 0.
LemmaCheck check_el4(double a, double eta, double b, const QuadSpec& quad = {});

/// max/min of the ratios; the uniformity statistic for a scan ladder.
double ratio_spread(const std::vector<LemmaCheck>& checks);

}  // namespace xsblab
