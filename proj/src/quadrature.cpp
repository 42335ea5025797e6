#include "xsblab/quadrature.hpp"

#include <cmath>

#include "xsblab/error.hpp"
#include "xsblab/spectral.hpp"

namespace xsblab {

void QuadSpec::validate() const {
  require(truncation_radius >= 10.0, ErrorCode::invalid_argument,
          "truncation radius must be >= 10");
  require(points_per_decade >= 2, ErrorCode::invalid_argument,
          "points_per_decade must be >= 2");
  require(tolerance > 0.0 && tolerance < 1.0, ErrorCode::invalid_argument,
          "tolerance must lie in (0, 1)");
  require(max_refinements >= 1, ErrorCode::invalid_argument, "max_refinements must be >= 1");
}

namespace quad {

std::vector<double> real_roots(const InnerProfile& p) {
  std::vector<double> out;
  if (p.q2 != 0.0) {
    const double disc = p.q1 * p.q1 - 4.0 * p.q2 * p.q0;
    if (disc < 0.0) return out;
    const double q = -0.5 * (p.q1 + std::copysign(std::sqrt(disc), p.q1));
    out.push_back(q / p.q2);
    if (q != 0.0) out.push_back(p.q0 / q);
  } else if (p.q1 != 0.0) {
    out.push_back(-p.q0 / p.q1);
  }
  return out;
}

std::vector<double> inner_breaks(const InnerProfile& p, double lo, double hi) {
  std::vector<double> pts(p.kinks.begin(), p.kinks.end());
  const double curvature = std::abs(p.scale * p.q2);
  if (p.q2 != 0.0) {
    const double vertex = -p.q1 / (2.0 * p.q2);
    geometric_breaks(vertex, 1.0 / std::sqrt(curvature), lo, hi, pts);
    const double disc = p.q1 * p.q1 - 4.0 * p.q2 * p.q0;
    if (disc >= 0.0) {
      const double q = -0.5 * (p.q1 + std::copysign(std::sqrt(disc), p.q1));
      for (double r : {q / p.q2, q != 0.0 ? p.q0 / q : vertex}) {
        const double slope = std::abs(p.scale * (2.0 * p.q2 * r + p.q1));
        geometric_breaks(r, 1.0 / std::max(slope, std::sqrt(curvature)), lo, hi, pts);
      }
    }
  } else if (p.q1 != 0.0) {
    geometric_breaks(-p.q0 / p.q1, 1.0 / std::abs(p.scale * p.q1), lo, hi, pts);
  }
  return finalize_breaks(std::move(pts), lo, hi);
}

}  // namespace quad

double RidgeIntegrand::value(double x1, double x2) const {
  return weight(x1, x2) * std::pow(bracket(profile(x1, true).resonance(x2)), -decay());
}

namespace {

/// Monotone piece of D on [a, b] integrated in w = D(t); t_of_w inverts D on
/// the piece and slope_of_w returns |D'(t(w))|.
template <typename T, typename S, typename W>
QuadResult branch_in_w(W&& weight_at, double p, const quad::InnerProfile& prof, double a, double b,
                       T&& t_of_w, S&& slope_of_w, double w_vertex, double vertex_scale,
                       double rel_tol, std::size_t max_bisections) {
  const double wa = prof.resonance(a);
  const double wb = prof.resonance(b);
  const double lo = std::min(wa, wb);
  const double hi = std::max(wa, wb);
  std::vector<double> pts;
  quad::geometric_breaks(0.0, 1.0, lo, hi, pts);
  if (std::isfinite(w_vertex)) quad::geometric_breaks(w_vertex, vertex_scale, lo, hi, pts);
  for (double k : prof.kinks) {
    if (k > a && k < b) pts.push_back(prof.resonance(k));
  }
  const auto breaks = quad::finalize_breaks(std::move(pts), lo, hi);
  auto f = [&](double w) {
    const double slope = slope_of_w(w);
    if (!(slope > 0.0)) return 0.0;
    return weight_at(t_of_w(w)) * std::pow(bracket(w), -p) / slope;
  };
  return quad::adaptive(f, breaks, rel_tol, 0.0, max_bisections);
}

void merge(QuadResult& into, const QuadResult& r) {
  into.value += r.value;
  into.error += r.error;
  into.evaluations += r.evaluations;
  into.converged = into.converged && r.converged;
}

}  // namespace

QuadResult inner_integral(const RidgeIntegrand& integrand, double outer, bool outer_first,
                          double lo, double hi, double rel_tol, std::size_t max_bisections) {
  QuadResult out;
  if (!(hi > lo)) return out;
  const auto prof = integrand.profile(outer, outer_first);
  const double p = integrand.decay();
  auto weight_at = [&](double t) {
    return outer_first ? integrand.weight(outer, t) : integrand.weight(t, outer);
  };
  auto in_t = [&](double a, double b) {
    if (!(b > a)) return;
    auto f = [&](double t) { return weight_at(t) * std::pow(bracket(prof.resonance(t)), -p); };
    const auto breaks = quad::inner_breaks(prof, a, b);
    merge(out, quad::adaptive(f, breaks, rel_tol, 0.0, max_bisections));
  };

  const double curvature = prof.scale * prof.q2;
  const double linear = prof.scale * prof.q1;
  if (curvature != 0.0) {
    const double tv = -prof.q1 / (2.0 * prof.q2);
    const double wv = prof.scale * (prof.q0 - prof.q1 * prof.q1 / (4.0 * prof.q2));
    const double delta = 4.0 / std::sqrt(std::abs(curvature));
    in_t(std::max(lo, tv - delta), std::min(hi, tv + delta));
    auto slope = [&](double w) { return 2.0 * std::sqrt(std::max(0.0, (w - wv) * curvature)); };
    for (int side : {-1, 1}) {
      const double a = side > 0 ? std::max(lo, tv + delta) : lo;
      const double b = side > 0 ? hi : std::min(hi, tv - delta);
      if (!(b > a)) continue;
      auto t_of_w = [&](double w) {
        return tv + side * std::sqrt(std::max(0.0, (w - wv) / curvature));
      };
      merge(out, branch_in_w(weight_at, p, prof, a, b, t_of_w, slope, wv, 16.0, rel_tol,
                             max_bisections));
    }
    return out;
  }
  if (std::abs(linear) * (hi - lo) > 64.0) {
    auto t_of_w = [&](double w) { return (w / prof.scale - prof.q0) / prof.q1; };
    auto slope = [&](double) { return std::abs(linear); };
    merge(out, branch_in_w(weight_at, p, prof, lo, hi, t_of_w, slope,
                           std::numeric_limits<double>::quiet_NaN(), 1.0, rel_tol,
                           max_bisections));
    return out;
  }
  in_t(lo, hi);
  return out;
}

QuadResult integrate_rectangle(const RidgeIntegrand& integrand, bool outer_first, double outer_lo,
                               double outer_hi, double inner_lo, double inner_hi, double rel_tol,
                               std::size_t max_bisections) {
  QuadResult total;
  if (!(outer_hi > outer_lo) || !(inner_hi > inner_lo)) return total;
  std::size_t inner_evals = 0;
  bool inner_ok = true;
  auto inner = [&](double outer) {
    const QuadResult r = inner_integral(integrand, outer, outer_first, inner_lo, inner_hi,
                                        rel_tol * 0.1, max_bisections);
    inner_evals += r.evaluations;
    inner_ok = inner_ok && r.converged;
    return r.value;
  };

  std::vector<double> pts;
  for (double c : integrand.outer_special(outer_first)) {
    quad::geometric_breaks(c, integrand.outer_width(), outer_lo, outer_hi, pts);
  }
  // The ridge D = 0 enters through the inner edges where the cross profile vanishes.
  for (double edge : {inner_lo, inner_hi}) {
    const auto cross = integrand.profile(edge, !outer_first);
    for (double r : quad::real_roots(cross)) {
      const double slope = std::abs(cross.scale * (2.0 * cross.q2 * r + cross.q1));
      quad::geometric_breaks(r, 1.0 / std::max(slope, 1.0), outer_lo, outer_hi, pts);
    }
  }
  const auto outer_breaks = quad::finalize_breaks(std::move(pts), outer_lo, outer_hi);
  total = quad::adaptive(inner, outer_breaks, rel_tol, 0.0, max_bisections);
  total.evaluations += inner_evals;
  total.converged = total.converged && inner_ok;
  return total;
}

ShellIntegral integrate_shells(const RidgeIntegrand& integrand, const ShellOptions& options) {
  require(options.core_radius > 0.0 && options.max_radius >= options.core_radius,
          ErrorCode::invalid_argument, "shell radii must satisfy 0 < core <= max");
  require(options.shell_ratio > 1.0, ErrorCode::invalid_argument, "shell ratio must exceed 1");
  const double q = options.shell_ratio;
  ShellIntegral out;
  const double cut = options.x1_min;

  auto accumulate = [&](const QuadResult& r, double& value, double& error) {
    value += r.value;
    error += r.error;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  };

  const double r0 = options.core_radius;
  {
    double value = 0, error = 0;
    accumulate(integrate_rectangle(integrand, true, std::max(-r0, cut), r0, -r0, r0,
                                   options.rel_tol, options.max_bisections),
               value, error);
    out.radii.push_back(r0);
    out.partials.push_back(value);
    out.errors.push_back(error);
  }

  std::vector<double> increments;
  for (double inner_r = r0; inner_r * q <= options.max_radius * (1.0 + 1e-12); inner_r *= q) {
    const double outer_r = q * inner_r;
    double value = 0, error = 0;
    const auto tol = options.rel_tol;
    const auto bis = options.max_bisections;
    // right and left strips span the full x2 range of the new box
    accumulate(integrate_rectangle(integrand, true, std::max(inner_r, cut), outer_r, -outer_r,
                                   outer_r, tol, bis),
               value, error);
    if (cut < -inner_r) {
      accumulate(integrate_rectangle(integrand, true, std::max(-outer_r, cut), -inner_r, -outer_r,
                                     outer_r, tol, bis),
                 value, error);
    }
    // top and bottom strips, x1 restricted to the old box
    const double x1_lo = std::max(-inner_r, cut);
    accumulate(integrate_rectangle(integrand, false, inner_r, outer_r, x1_lo, inner_r, tol, bis),
               value, error);
    accumulate(integrate_rectangle(integrand, false, -outer_r, -inner_r, x1_lo, inner_r, tol, bis),
               value, error);
    increments.push_back(value);
    out.radii.push_back(outer_r);
    out.partials.push_back(out.partials.back() + value);
    out.errors.push_back(out.errors.back() + error);
  }

  const std::size_t m = std::min(options.tail_fit_shells, increments.size());
  if (m < 2) {
    out.tail_slope = std::numeric_limits<double>::quiet_NaN();
    out.tail_estimate = 0.0;
    out.converged = false;
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = increments.size() - m; i < increments.size(); ++i) {
    if (!(increments[i] > 0.0)) continue;
    const double x = std::log(out.radii[i]);
    const double y = std::log(increments[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (used < 2) {
    // Increments vanish: the integrand has compact support inside the box.
    out.tail_slope = -std::numeric_limits<double>::infinity();
    out.tail_estimate = 0.0;
    return out;
  }
  const double n = static_cast<double>(used);
  out.tail_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (out.tail_slope < options.convergence_slope) {
    const double ratio = std::pow(q, out.tail_slope);
    out.tail_estimate = std::max(increments.back(), 0.0) * ratio / (1.0 - ratio);
  } else {
    out.tail_estimate = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace xsblab
