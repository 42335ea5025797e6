#include "xsblab/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "xsblab/counterexample.hpp"
#include "xsblab/error.hpp"
#include "xsblab/parallel.hpp"

namespace xsblab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 (lower degree when leading terms vanish).
std::vector<double> real_roots(double c3, double c2, double c1, double c0) {
  std::vector<double> out;
  const double size = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (size == 0.0) return out;
  if (std::abs(c3) <= 1e-14 * size) {
    if (std::abs(c2) <= 1e-14 * size) {
      if (c1 != 0.0) out.push_back(-c0 / c1);
      return out;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return out;
    const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
    out.push_back(q / c2);
    if (q != 0.0) out.push_back(c0 / q);
    return out;
  }
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    out.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) + shift);
  } else if (p == 0.0) {
    out.push_back(shift);
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) out.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
  }
  return out;
}

void append(std::vector<double>& to, const std::vector<double>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

/// y + mismatch in direct variables.
class DirectIntegrand final : public RidgeIntegrand {
 public:
  DirectIntegrand(const ResonanceIntegrand& r, double xi, double y) : r_(r), xi_(xi), y_(y) {}

  double weight(double x1, double x2) const override { return r_.G(xi_, x1, x2); }
  double decay() const override { return 2.0 * r_.b; }

  quad::InnerProfile profile(double outer, bool outer_first) const override {
    const double al = r_.params.alpha, be = r_.params.beta;
    quad::InnerProfile p;
    if (outer_first) {
      const double k = 2.0 * al + 3.0 * be * (xi_ + outer);
      p.q2 = -k;
      p.q1 = k * (xi_ + outer);
      p.q0 = -k * xi_ * outer + y_;
      p.kinks = {xi_ + outer, 0.0};
    } else {
      const double d = xi_ - outer;
      p.q2 = -3.0 * be * d;
      p.q1 = -d * (2.0 * al + 3.0 * be * xi_ - 3.0 * be * outer);
      p.q0 = d * outer * (2.0 * al + 3.0 * be * xi_) + y_;
      p.kinks = {outer - xi_, 0.0};
    }
    return p;
  }

  std::vector<double> outer_special(bool outer_first) const override {
    const double al = r_.params.alpha, be = r_.params.beta;
    std::vector<double> pts{0.0};
    if (outer_first) {
      const double pole = -xi_ - 2.0 * al / (3.0 * be);
      pts.push_back(pole);
      // folds: (2 al + 3 be xi + 3 be x1)(x1 - xi)^2 = -4 y
      const double k0 = 2.0 * al + 3.0 * be * xi_;
      const double k1 = 3.0 * be;
      append(pts, real_roots(k1, k0 - 2.0 * xi_ * k1, k1 * xi_ * xi_ - 2.0 * xi_ * k0,
                             k0 * xi_ * xi_ + 4.0 * y_));
    } else {
      pts.push_back(xi_);
      // folds: (xi - x2)(P + 3 be x2)^2 = -12 be y, P = 2 al + 3 be xi
      const double pp = 2.0 * al + 3.0 * be * xi_;
      const double m = 3.0 * be;
      // (xi - x)(P^2 + 2 P m x + m^2 x^2)
      append(pts, real_roots(-m * m, xi_ * m * m - 2.0 * pp * m, 2.0 * xi_ * pp * m - pp * pp,
                             xi_ * pp * pp + 12.0 * be * y_));
    }
    return pts;
  }

 private:
  ResonanceIntegrand r_;
  double xi_, y_;
};

/// Integrand in rescaled variables: weight / <xi^3 (z + factor F(u, v))>^{2b}.
class RescaledIntegrand final : public RidgeIntegrand {
 public:
  enum class Weight { h_rho, unit, outer_power };

  RescaledIntegrand(const ResonanceIntegrand& r, double xi, double z, double factor, Weight w)
      : r_(r), xi_(xi), z_(z), xi3_(xi * xi * xi), factor_(factor), weight_(w) {}

  double weight(double u, double v) const override {
    switch (weight_) {
      case Weight::h_rho:
        return r_.H(xi_, u, v);
      case Weight::outer_power:
        return std::pow(std::abs(u), 4.0 * r_.rho);
      case Weight::unit:
        break;
    }
    return 1.0;
  }
  double decay() const override { return 2.0 * r_.b; }

  quad::InnerProfile profile(double outer, bool) const override {
    quad::InnerProfile p;
    p.scale = xi3_;
    p.q2 = -factor_ * outer;
    p.q1 = factor_ * outer * (2.0 - outer);
    p.q0 = z_;
    if (weight_ == Weight::h_rho) p.kinks = {1.0 - outer, 1.0};
    return p;
  }

  std::vector<double> outer_special(bool) const override {
    std::vector<double> pts{0.0, 1.0, 2.0};
    // folds: factor u (2 - u)^2 + 4 z = 0
    append(pts, real_roots(factor_, -4.0 * factor_, 4.0 * factor_, 4.0 * z_));
    return pts;
  }

  double outer_width() const override { return 1e-3 / std::max(1.0, std::abs(xi3_)); }

 private:
  ResonanceIntegrand r_;
  double xi_, z_, xi3_, factor_;
  Weight weight_;
};

/// The reflection (x1, x2) -> (-x2, -x1) of another integrand.
class MirroredIntegrand final : public RidgeIntegrand {
 public:
  explicit MirroredIntegrand(const RidgeIntegrand& base) : base_(base) {}

  double weight(double x1, double x2) const override { return base_.weight(-x2, -x1); }
  double decay() const override { return base_.decay(); }

  quad::InnerProfile profile(double outer, bool outer_first) const override {
    auto p = base_.profile(-outer, !outer_first);
    p.q1 = -p.q1;
    for (auto& k : p.kinks) k = -k;
    return p;
  }

  std::vector<double> outer_special(bool outer_first) const override {
    auto pts = base_.outer_special(!outer_first);
    for (auto& x : pts) x = -x;
    return pts;
  }

  double outer_width() const override { return base_.outer_width(); }

 private:
  const RidgeIntegrand& base_;
};

ShellOptions shell_options(const QuadSpec& quad, double core) {
  ShellOptions o;
  o.core_radius = core;
  o.max_radius = std::max(quad.truncation_radius, 4.0 * core);
  o.rel_tol = quad.tolerance;
  o.max_bisections = quad.max_refinements * 2;
  return o;
}

IntegralValue package(IntegralForm form, double prefactor, ShellIntegral shells) {
  IntegralValue out;
  out.form = form;
  out.prefactor = prefactor;
  out.truncated = prefactor * shells.truncated();
  out.tail_estimate = prefactor * shells.tail_estimate;
  out.tail_slope = shells.tail_slope;
  out.error = prefactor * (shells.errors.empty() ? 0.0 : shells.errors.back());
  out.value = std::isfinite(shells.tail_estimate) ? out.truncated + out.tail_estimate : inf;
  out.shells = std::move(shells);
  return out;
}

IntegralForm resolve(IntegralForm form, double xi, const PhaseParams& params) {
  if (form != IntegralForm::automatic) return form;
  return (std::abs(xi) > 1.0 && params.alpha == 0.0) ? IntegralForm::rescaled : IntegralForm::direct;
}

}  // namespace

double ResonanceIntegrand::G(double xi, double x1, double x2) const {
  return std::pow(bracket(xi + x1 - x2) * bracket(x1) * bracket(x2), 2.0 * rho);
}

double ResonanceIntegrand::mismatch(double xi, double x1, double x2) const {
  return four_wave_resonance(xi, x1, x2, params);
}

double ResonanceIntegrand::H(double xi, double u, double v) const {
  return std::pow(bracket(xi * (1.0 - (u + v))) * bracket(xi * (1.0 - u)) * bracket(xi * (1.0 - v)),
                  2.0 * rho);
}

double ResonanceIntegrand::p(double xi, double z) const {
  return xi * xi /
         (std::pow(bracket(xi * xi * xi * z), 2.0 * (1.0 - b)) * std::pow(bracket(xi), 2.0 * rho));
}

double ResonanceIntegrand::direct(double xi, double y, double x1, double x2) const {
  return G(xi, x1, x2) * std::pow(bracket(y + mismatch(xi, x1, x2)), -2.0 * b);
}

double ResonanceIntegrand::rescaled(double xi, double z, double u, double v) const {
  return H(xi, u, v) * std::pow(bracket(xi * xi * xi * (z + 3.0 * params.beta * F(u, v))), -2.0 * b);
}

IntegralValue eval_I_unchecked(double xi, double y, double rho, double b, const QuadSpec& quad,
                               const PhaseParams& params, IntegralForm form, bool mirrored) {
  quad.validate();
  params.validate();
  require(std::isfinite(xi) && std::isfinite(y), ErrorCode::invalid_argument,
          "xi and y must be finite");
  require(rho >= 0.0 && rho < 0.25, ErrorCode::invalid_argument, "rho must lie in [0, 1/4)");
  require(b > 0.0, ErrorCode::invalid_argument, "b must be positive");
  const ResonanceIntegrand r{rho, b, params};
  form = resolve(form, xi, params);

  if (form == IntegralForm::rescaled) {
    require(params.alpha == 0.0 && xi != 0.0, ErrorCode::invalid_argument,
            "rescaled form needs alpha = 0 and xi != 0");
    const double z = y / (xi * xi * xi);
    const RescaledIntegrand f(r, xi, z, 3.0 * params.beta, RescaledIntegrand::Weight::h_rho);
    const MirroredIntegrand m(f);
    const double core = 4.0 * std::max(1.0, std::cbrt(std::abs(z)));
    auto shells = integrate_shells(mirrored ? static_cast<const RidgeIntegrand&>(m) : f,
                                   shell_options(quad, core));
    return package(form, r.p(xi, z), std::move(shells));
  }

  const DirectIntegrand f(r, xi, y);
  const MirroredIntegrand m(f);
  const double core =
      4.0 * std::max({1.0, std::abs(xi) + std::abs(2.0 * params.alpha / (3.0 * params.beta)),
                      std::cbrt(std::abs(y))});
  auto shells = integrate_shells(mirrored ? static_cast<const RidgeIntegrand&>(m) : f,
                                 shell_options(quad, core));
  const double prefactor =
      std::pow(bracket(xi), -2.0 * rho) * std::pow(bracket(y), -2.0 * (1.0 - b));
  return package(form, prefactor, std::move(shells));
}

IntegralValue eval_I(double xi, double y, double rho, double b, const QuadSpec& quad,
                     const PhaseParams& params, IntegralForm form) {
  require(b > rho + 1.0 / 3.0, ErrorCode::invalid_argument,
          "I(xi, y) is finite only for b > rho + 1/3");
  auto out = eval_I_unchecked(xi, y, rho, b, quad, params, form);
  if (!std::isfinite(out.value)) {
    throw QuadratureError("tail of I(xi, y) does not decay at the truncation radius", out.truncated,
                          inf);
  }
  return out;
}

std::string to_string(DichotomyVerdict::Regime regime) {
  switch (regime) {
    case DichotomyVerdict::Regime::convergent:
      return "convergent";
    case DichotomyVerdict::Regime::divergent:
      return "divergent";
    case DichotomyVerdict::Regime::near_threshold:
      break;
  }
  return "near_threshold";
}

std::vector<double> geometric_radii(double r0, double r_max, double ratio) {
  require(r0 > 0.0 && r_max >= r0 && ratio > 1.0, ErrorCode::invalid_argument,
          "geometric ladder needs 0 < r0 <= r_max and ratio > 1");
  std::vector<double> out;
  for (double r = r0; r <= r_max * (1.0 + 1e-12); r *= ratio) out.push_back(r);
  return out;
}

DichotomyVerdict dichotomy_I00(double rho, double b, const std::vector<double>& radii,
                               double rel_tol) {
  require(rho >= 0.0 && rho < 0.25, ErrorCode::invalid_argument, "rho must lie in [0, 1/4)");
  require(b > 0.0, ErrorCode::invalid_argument, "b must be positive");
  require(radii.size() >= 4, ErrorCode::invalid_argument, "dichotomy needs >= 4 radii");
  const double ratio = radii[1] / radii[0];
  require(radii[0] > 0.0 && ratio > 1.0, ErrorCode::invalid_argument,
          "radii must be an increasing geometric ladder");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    require(std::abs(radii[i] / radii[i - 1] - ratio) < 1e-9 * ratio, ErrorCode::invalid_argument,
            "radii must be an increasing geometric ladder");
  }
  const ResonanceIntegrand r{rho, b, PhaseParams{}};
  const DirectIntegrand f(r, 0.0, 0.0);
  ShellOptions o;
  o.core_radius = radii.front();
  o.max_radius = radii.back();
  o.shell_ratio = ratio;
  o.rel_tol = rel_tol;
  const auto shells = integrate_shells(f, o);

  DichotomyVerdict out;
  out.tail_slope = shells.tail_slope;
  out.radii = shells.radii;
  out.partial_integrals = shells.partials;
  if (out.tail_slope > 0.02) {
    out.regime = DichotomyVerdict::Regime::divergent;
  } else if (out.tail_slope < -0.02) {
    out.regime = DichotomyVerdict::Regime::convergent;
  }
  return out;
}

double scan_y(double xi, double z) { return std::abs(xi) > 1.0 ? xi * xi * xi * z : z; }

ScanGrid default_scan_grid(std::size_t points_per_decade, double xi_max, bool negative_xi) {
  require(points_per_decade >= 1 && xi_max > 0.1, ErrorCode::invalid_argument,
          "scan grid needs points_per_decade >= 1 and xi_max > 0.1");
  auto logspace = [&](double lo, double hi) {
    std::vector<double> v;
    const auto n = static_cast<long>(std::ceil((hi - lo) * static_cast<double>(points_per_decade)));
    for (long i = 0; i <= n; ++i) v.push_back(std::pow(10.0, lo + (hi - lo) * i / static_cast<double>(n)));
    return v;
  };
  ScanGrid g;
  g.xi.push_back(0.0);
  for (double x : logspace(-1.0, std::log10(xi_max))) {
    g.xi.push_back(x);
    if (negative_xi) g.xi.push_back(-x);
  }
  g.z.push_back(0.0);
  for (double z : logspace(-2.0, 2.0)) {
    g.z.push_back(z);
    g.z.push_back(-z);
  }
  std::sort(g.xi.begin(), g.xi.end());
  std::sort(g.z.begin(), g.z.end());
  return g;
}

namespace {

BoundReport summarize(std::vector<BoundPoint> points) {
  BoundReport rep;
  for (const auto& p : points) {
    if (!p.ok) {
      ++rep.failures;
      continue;
    }
    if (!std::isfinite(p.value)) ++rep.divergent;
    if (p.value > rep.sup) {
      rep.sup = p.value;
      rep.argmax_xi = p.xi;
      rep.argmax_y = p.y;
    }
    rep.sup_truncated = std::max(rep.sup_truncated, p.truncated);
  }
  rep.points = std::move(points);
  return rep;
}

}  // namespace

BoundReport uniform_bound_scan(double rho, double b, const ScanGrid& grid, const QuadSpec& quad,
                               const PhaseParams& params) {
  quad.validate();
  require(rho >= 0.0 && rho < 0.25, ErrorCode::invalid_argument, "rho must lie in [0, 1/4)");
  require(b > 0.0 && b < 1.0, ErrorCode::invalid_argument, "b must lie in (0, 1)");
  require(!grid.xi.empty() && !grid.z.empty(), ErrorCode::invalid_argument, "empty scan grid");
  const std::size_t nz = grid.z.size();
  auto points = parallel_map(grid.xi.size() * nz, [&](std::size_t i) {
    BoundPoint p;
    p.xi = grid.xi[i / nz];
    p.z = grid.z[i % nz];
    p.y = scan_y(p.xi, p.z);
    try {
      const auto v = eval_I_unchecked(p.xi, p.y, rho, b, quad, params, IntegralForm::automatic);
      p.value = v.value;
      p.truncated = v.truncated;
      p.tail_slope = v.tail_slope;
    } catch (const std::exception& e) {
      p.ok = false;
      p.message = e.what();
    }
    return p;
  });
  return summarize(std::move(points));
}

IntegralValue eval_J(PropositionIntegral which, double xi, double z, double rho, double b,
                     const QuadSpec& quad) {
  quad.validate();
  require(std::abs(xi) > 1.0, ErrorCode::invalid_argument, "J1, J2 need |xi| > 1");
  require(rho >= 0.0 && rho < 0.25 && b > 0.0, ErrorCode::invalid_argument,
          "J1, J2 need 0 <= rho < 1/4 and b > 0");
  const ResonanceIntegrand r{rho, b, PhaseParams{}};
  const auto weight = which == PropositionIntegral::J1 ? RescaledIntegrand::Weight::outer_power
                                                       : RescaledIntegrand::Weight::unit;
  const RescaledIntegrand f(r, xi, z, 1.0, weight);
  auto o = shell_options(quad, 4.0 * std::max(1.0, std::cbrt(std::abs(z))));
  if (which == PropositionIntegral::J1) o.x1_min = 0.0;
  auto shells = integrate_shells(f, o);
  return package(IntegralForm::rescaled, std::pow(std::abs(xi), 2.0 + 4.0 * rho), std::move(shells));
}

PropositionReport proposition_checks(double rho, double b, const std::vector<double>& xi_list,
                                     const std::vector<double>& z_list, const QuadSpec& quad) {
  require(!xi_list.empty() && !z_list.empty(), ErrorCode::invalid_argument, "empty lists");
  PropositionReport rep;
  const std::size_t nz = z_list.size();
  for (auto which : {PropositionIntegral::J1, PropositionIntegral::J2}) {
    auto points = parallel_map(xi_list.size() * nz, [&](std::size_t i) {
      BoundPoint p;
      p.xi = xi_list[i / nz];
      p.z = z_list[i % nz];
      p.y = p.xi * p.xi * p.xi * p.z;
      try {
        const auto v = eval_J(which, p.xi, p.z, rho, b, quad);
        p.value = v.value;
        p.truncated = v.truncated;
        p.tail_slope = v.tail_slope;
      } catch (const std::exception& e) {
        p.ok = false;
        p.message = e.what();
      }
      return p;
    });
    (which == PropositionIntegral::J1 ? rep.j1 : rep.j2) = summarize(std::move(points));
  }
  return rep;
}

}  // namespace xsblab
