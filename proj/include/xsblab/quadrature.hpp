#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace xsblab {

/// Truncation and accuracy controls shared by the estimate checks.
struct QuadSpec {
  /// Outer truncation radius R of the dyadic-shell ladder (R >= 10).
  double truncation_radius = 1e4;
  /// Sample density for grid maximisation and scan ladders.
  std::size_t points_per_decade = 50;
  /// Relative error target of each adaptive quadrature.
  double tolerance = 1e-7;
  /// Bisection budget per adaptive quadrature, in multiples of the breakpoint count.
  std::size_t max_refinements = 200;

  void validate() const;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

namespace quad {

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

/// Global adaptive Gauss-Kronrod (QUADPACK QAG style) over consecutive
/// breakpoints. Stops when the summed error estimate drops below
/// max(abs_tol, rel_tol |value|) or after `max_bisections` splits.
template <typename F>
QuadResult adaptive(F&& f, std::span<const double> breaks, double rel_tol, double abs_tol,
                    std::size_t max_bisections) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& other) const { return error < other.error; }
  };
  QuadResult result;
  std::priority_queue<Piece> heap;
  auto eval = [&](double a, double b) {
    double err = 0;
    const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
    // Boost 1.74 reports |K - G| on the reference interval; rescale to [a, b].
    err *= 0.5 * (b - a);
    result.evaluations += 15;
    return Piece{a, b, v, std::isfinite(err) ? err : std::numeric_limits<double>::infinity()};
  };
  double total = 0, total_err = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Piece p = eval(breaks[i], breaks[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  std::size_t splits = 0;
  while (!heap.empty() && total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (splits >= max_bisections) {
      result.converged = false;
      break;
    }
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted at machine resolution; accept what is there.
      result.converged = false;
      break;
    }
    Piece left = eval(worst.a, mid);
    Piece right = eval(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  total = 0;
  total_err = 0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  result.value = total;
  result.error = total_err;
  if (total_err > std::max(abs_tol, rel_tol * std::abs(total)) * 10.0) result.converged = false;
  return result;
}

/// \int_x0^\infty f for f decaying like x^{-p}, p > 1. The substitution
/// x = x0 t^{-1/(p-1)} maps the tail onto (0, 1] with a bounded integrand.
template <typename F>
QuadResult tail(F&& f, double x0, double decay, double rel_tol, double abs_tol,
                std::size_t max_bisections) {
  const double q = 1.0 / (decay - 1.0);
  auto mapped = [&](double t) {
    const double x = x0 * std::pow(t, -q);
    return f(x) * x0 * q * std::pow(t, -q - 1.0);
  };
  const double breaks[] = {0.0, 1e-6, 1e-3, 0.1, 1.0};
  return adaptive(mapped, breaks, rel_tol, abs_tol, max_bisections);
}

/// Adds c, c +- w 4^j (j >= 0) inside (lo, hi) to `out`: resolves a peak of
/// width w centred at c with panels of geometrically growing size.
inline void geometric_breaks(double c, double w, double lo, double hi, std::vector<double>& out) {
  if (!(w > 0.0) || !std::isfinite(w) || !std::isfinite(c)) return;
  if (c > lo && c < hi) out.push_back(c);
  const double span = hi - lo;
  for (double step = w; step < span; step *= 4.0) {
    if (c + step > lo && c + step < hi) out.push_back(c + step);
    if (c - step > lo && c - step < hi) out.push_back(c - step);
  }
}

inline std::vector<double> finalize_breaks(std::vector<double> pts, double lo, double hi) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  out.reserve(pts.size());
  for (double p : pts) {
    if (p < lo || p > hi) continue;
    if (out.empty() || p > out.back()) out.push_back(p);
  }
  return out;
}

/// Resonance of the inner integrand as a quadratic in the inner variable t:
/// D(t) = scale (q2 t^2 + q1 t + q0). The integrand peaks where D = 0.
struct InnerProfile {
  double q2 = 0.0;
  double q1 = 0.0;
  double q0 = 0.0;
  double scale = 1.0;
  /// Points where the weight is only continuous (bracket kinks).
  std::vector<double> kinks;

  double resonance(double t) const { return scale * ((q2 * t + q1) * t + q0); }
};

/// Real roots of q2 t^2 + q1 t + q0.
std::vector<double> real_roots(const InnerProfile& profile);

/// Breakpoints resolving the ridges and kinks of an inner integrand on [lo, hi].
std::vector<double> inner_breaks(const InnerProfile& profile, double lo, double hi);

}  // namespace quad

/// Two-dimensional integrand weight(x1, x2) <D>^{-p} with D quadratic in
/// either variable. Orientation `outer_first` means the outer variable is x1
/// and the inner x2.
class RidgeIntegrand {
 public:
  virtual ~RidgeIntegrand() = default;
  /// Slowly varying factor; may have kinks listed in the profile.
  virtual double weight(double x1, double x2) const = 0;
  /// Exponent p of the resonance bracket.
  virtual double decay() const = 0;
  virtual quad::InnerProfile profile(double outer, bool outer_first) const = 0;
  /// Outer-variable points where the inner structure degenerates.
  virtual std::vector<double> outer_special(bool outer_first) const = 0;
  /// Characteristic width used to refine around outer special points.
  virtual double outer_width() const { return 1e-6; }

  double value(double x1, double x2) const;
};

/// \int_lo^hi of the integrand along the inner variable. Monotone branches of
/// D away from its vertex are integrated in w = D(t), where the resonance peak
/// has unit width however steep D is; the vertex zone stays in t.
QuadResult inner_integral(const RidgeIntegrand& integrand, double outer, bool outer_first,
                          double lo, double hi, double rel_tol, std::size_t max_bisections);

/// Geometric-shell decomposition of \iint over the box [-R, R]^2 (optionally cut
/// to x1 >= x1_min). partials[k] is the integral over [-radii[k], radii[k]]^2.
struct ShellIntegral {
  std::vector<double> radii;
  std::vector<double> partials;
  std::vector<double> errors;
  /// Slope of ln(shell increment) against ln(radius) over the last shells.
  double tail_slope = 0.0;
  /// Geometric-series estimate of the integral beyond the last radius; +inf
  /// when the increments do not decay.
  double tail_estimate = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;

  double truncated() const { return partials.empty() ? 0.0 : partials.back(); }
  double extrapolated() const { return truncated() + tail_estimate; }
};

struct ShellOptions {
  double core_radius = 4.0;
  double max_radius = 1e4;
  /// Ratio of consecutive shell radii.
  double shell_ratio = 2.0;
  /// Half-plane cut x1 >= x1_min (use -inf for the full plane).
  double x1_min = -std::numeric_limits<double>::infinity();
  double rel_tol = 1e-7;
  std::size_t max_bisections = 400;
  /// Shells used in the tail-slope fit.
  std::size_t tail_fit_shells = 4;
  /// Increments decaying faster than this slope are summed as a geometric tail.
  double convergence_slope = -0.02;
};

ShellIntegral integrate_shells(const RidgeIntegrand& integrand, const ShellOptions& options);

/// Integral of `integrand` over [a1, b1] x [a2, b2] by iterated quadrature.
QuadResult integrate_rectangle(const RidgeIntegrand& integrand, bool outer_first, double outer_lo,
                               double outer_hi, double inner_lo, double inner_hi, double rel_tol,
                               std::size_t max_bisections);

}  // namespace xsblab
