// One PASS/FAIL line per acceptance criterion, with the measured quantities
// indented underneath. Usage: xsblab_acceptance [criterion numbers...]
//
// Exit status is 0 when every failing criterion fails only through checks
// marked as known-unattainable (documented in the README), 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xsblab/counterexample.hpp"
#include "xsblab/dynamics.hpp"
#include "xsblab/lemmas.hpp"
#include "xsblab/parallel.hpp"
#include "xsblab/resonance.hpp"
#include "xsblab/scaling.hpp"
#include "xsblab/trilinear.hpp"
#include "xsblab/xsb.hpp"

using namespace xsblab;
using std::numbers::pi;

namespace {

struct Check {
  std::string what;
  bool pass = false;
  /// A failure here is a documented property of the criterion, not a defect.
  bool known_unattainable = false;
};

struct Criterion {
  int id;
  std::string title;
  double runtime_budget;
  std::function<std::vector<Check>()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> ladder_n() { return {64.0, 128.0, 256.0, 512.0, 1024.0}; }

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(10.0, lo + (hi - lo) * i / (n - 1.0));
  return v;
}

// Gaussian spectral envelope, cut to the dealiased band |k| <= nx/3.
SpatialSpectrum gaussian_data(const SpaceTimeGrid& g, double amplitude, double width, std::uint64_t seed,
                              std::uint64_t index) {
  auto rng = substream(seed, index);
  SpatialSpectrum u{std::vector<cplx>(g.nx())};
  for (std::size_t k = 0; k < g.nx(); ++k) {
    const double xi = g.xi(k);
    u.values[k] = complex_gaussian(rng) * std::exp(-xi * xi / (width * width));
  }
  dealias_two_thirds(u);
  const double n = l2_norm(u, g);
  for (auto& v : u.values) v *= amplitude / n;
  return u;
}

double l2_gap(const SpatialSpectrum& a, const SpatialSpectrum& b, const SpaceTimeGrid& g) {
  SpatialSpectrum d = a;
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.values[k];
  return l2_norm(d, g);
}

// 1. ||chi_B||_{X^{s,b}} ~ N^{s - 1/4}.
std::vector<Check> norm_scaling() {
  std::vector<Check> out;
  for (double s : {-0.5, -0.25, 0.0}) {
    std::vector<ScalingPoint> pts;
    for (double n : ladder_n()) pts.push_back({n, bump_xsb_norm(build_bump(n, 64, 64, PhaseParams{}), s, 0.75)});
    const double slope = fit_scaling_exponent(pts).slope;
    out.push_back({fmt("s=%+.2f norm slope %.4f, target %.2f +- 0.05", s, slope, s - 0.25),
                   std::abs(slope - (s - 0.25)) <= 0.05});
  }
  return out;
}

// 2. Ratio exponent -2s - 1/2 and the sign change at s = -1/4.
std::vector<Check> ratio_threshold() {
  const std::vector<double> s_values{-0.5, -0.25, 0.0};
  const auto ns = ladder_n();
  auto rows = parallel_map(ns.size(), [&](std::size_t i) {
    return counterexample_ratios(ns[i], s_values, 0.75, CounterexampleResolution{}, PhaseParams{});
  });
  std::vector<Check> out;
  for (std::size_t j = 0; j < s_values.size(); ++j) {
    const double s = s_values[j];
    std::vector<ScalingPoint> pts;
    double worst_mass = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      pts.push_back({ns[i], rows[i][j].ratio});
      worst_mass = std::max(worst_mass, std::abs(rows[i][j].total_mass / rows[i][j].expected_mass - 1.0));
    }
    const double slope = fit_scaling_exponent(pts).slope;
    const double target = -2.0 * s - 0.5;
    bool sign_ok = true;
    const char* sign = "";
    if (s < -0.3) {
      sign_ok = slope > 0.0;
      sign = "positive";
    } else if (s < -0.1) {
      sign_ok = std::abs(slope) <= 0.1;
      sign = "zero within 0.1";
    } else {
      sign_ok = slope < 0.0;
      sign = "negative";
    }
    out.push_back({fmt("s=%+.2f ratio slope %.4f, target %.2f +- 0.1, sign %s", s, slope, target, sign),
                   std::abs(slope - target) <= 0.1 && sign_ok});
    out.push_back({fmt("s=%+.2f convolution mass vs |B|^3: worst relative error %.2e", s, worst_mass),
                   worst_mass < 0.02});
  }
  return out;
}

// 3. Calculus inequalities: ratios bounded across two-decade ladders.
std::vector<Check> lemma_suite() {
  std::vector<Check> out;
  const QuadSpec quad{1e4, 50, 1e-9, 200};
  auto spread = [&](const char* name, const std::vector<double>& params, auto&& check) {
    auto checks = parallel_map(params.size(), [&](std::size_t i) { return check(params[i]); });
    const double sp = ratio_spread(checks);
    out.push_back({fmt("%s ladder max/min ratio %.4f <= 8", name, sp), sp <= 8.0});
  };
  spread("el1 (a2 in [1, 100])", logspace(0, 2, 9), [&](double a2) { return check_el1(0.0, a2, 0.75, quad); });
  spread("el2 (a2 in [0.1, 10])", logspace(-1, 1, 9), [&](double a2) { return check_el2(0.0, a2, 0.6, 0.6, quad); });
  spread("el3 (a in [0.1, 10])", logspace(-1, 1, 9), [&](double a) { return check_el3(a, 0.5, 1.0, quad); });
  spread("el4 (a in [1, 100])", logspace(0, 2, 9), [&](double a) { return check_el4(a, 1.0, 0.75, quad); });
  const double unit = check_el3(1.0, 1.0, 1.0, quad).value;
  out.push_back({fmt("el3 c1=c2=1 sup %.6f, closed form 1 within 1%%", unit), std::abs(unit - 1.0) <= 0.01});
  return out;
}

// 4. Convergence of I(0,0) iff b > rho + 1/3.
std::vector<Check> dichotomy() {
  const double rhos[] = {0.0, 0.05, 0.1, 0.15, 0.2};
  const double bs[] = {0.2, 0.27, 0.6, 0.75, 0.9};
  const auto radii = geometric_radii(4.0, 1024.0);
  std::vector<Check> out;
  int matched = 0;
  double min_gap = 1.0;
  for (double rho : rhos) {
    for (double b : bs) {
      min_gap = std::min(min_gap, std::abs(b - rho - 1.0 / 3.0));
      const auto v = dichotomy_I00(rho, b, radii);
      const auto expected = b > rho + 1.0 / 3.0 ? DichotomyVerdict::Regime::convergent
                                                : DichotomyVerdict::Regime::divergent;
      if (v.regime == expected) {
        ++matched;
      } else {
        out.push_back({fmt("rho=%.2f b=%.2f: %s, tail slope %.3f", rho, b, to_string(v.regime).c_str(),
                           v.tail_slope),
                       false});
      }
    }
  }
  out.push_back({fmt("lattice distance to the threshold %.3f >= 0.05", min_gap), min_gap >= 0.05});
  out.push_back({fmt("%d/25 verdicts match sign(b - rho - 1/3)", matched), matched == 25});
  return out;
}

// 5. sup of I stable under refinement at (0.2, 0.7); growth at (0.2, 0.5).
std::vector<Check> uniform_bound() {
  std::vector<Check> out;
  auto scan = [](double rho, double b, std::size_t ppd, double radius) {
    QuadSpec q;
    q.truncation_radius = radius;
    q.tolerance = 1e-5;
    return uniform_bound_scan(rho, b, default_scan_grid(ppd, 1e3), q);
  };
  const auto base = scan(0.2, 0.7, 1, 256.0);
  const auto fine = scan(0.2, 0.7, 2, 512.0);
  const double change = std::abs(fine.sup - base.sup) / base.sup;
  out.push_back({fmt("(0.2, 0.7) sup %.4f -> %.4f under grid x2 and truncation x2: change %.2f%% < 10%%", base.sup,
                     fine.sup, 100.0 * change),
                 std::isfinite(change) && change < 0.1});
  out.push_back({fmt("(0.2, 0.7) failed points %zu + %zu", base.failures, fine.failures),
                 base.failures + fine.failures == 0});
  const auto n1 = scan(0.2, 0.5, 1, 256.0);
  const auto n2 = scan(0.2, 0.5, 1, 512.0);
  out.push_back({fmt("(0.2, 0.5) divergent tails %zu/%zu and %zu/%zu; truncated sup %.1f -> %.1f", n1.divergent,
                     n1.points.size(), n2.divergent, n2.points.size(), n1.sup_truncated, n2.sup_truncated),
                 n1.divergent > 0 && n2.divergent > 0 && n2.sup_truncated > n1.sup_truncated &&
                     !std::isfinite(n2.sup)});
  return out;
}

// 6. Random-triple search and the bump family.
std::vector<Check> trilinear() {
  std::vector<Check> out;
  const SpaceTimeGrid grid(16.0 * pi, 64, 8.0 * pi, 256);
  const auto rep = trilinear_ratio_search(-0.2, 0.75, 2000, grid, PhaseParams{}, 1);
  const double m1 = rep.prefix_max(1000);
  const double m2 = rep.sup_ratio;
  out.push_back({fmt("s=-0.2 ensemble max %.5f (1000) -> %.5f (2000): x%.3f < 1.5", m1, m2, m2 / m1),
                 m2 / m1 < 1.5});
  const std::vector<double> ns{64.0, 128.0, 256.0, 512.0};
  const auto fam = bump_family_ratios(ns, -0.2, 0.75, CounterexampleResolution{}, PhaseParams{});
  const double g1 = fam.back().ratio / fam.front().ratio;
  out.push_back({fmt("s=-0.2 bump family N 64 -> 512: x%.3f < 1.5", g1), g1 < 1.5});
  const auto ctl = bump_family_ratios(ns, -0.4, 0.75, CounterexampleResolution{}, PhaseParams{});
  const double g2 = ctl.back().ratio / ctl.front().ratio;
  out.push_back({fmt("s=-0.4 bump family N 64 -> 512: x%.3f > 2 (exponent 0.3 caps it at 8^0.3 = %.3f)", g2,
                     std::pow(8.0, 0.3)),
                 g2 > 2.0, true});
  return out;
}

// 7. L2 conservation for real gamma.
std::vector<Check> conservation() {
  const SpaceTimeGrid g(8.0 * pi, 64, 8.0, 64);
  const PhaseParams params{0.0, 1.0, {1.0, 0.0}};
  const auto u0 = gaussian_data(g, 2.0, 1.0, 7, 0);
  SolveConfig cfg;
  cfg.dt = 1e-3;
  cfg.dealias = Dealias::none;
  const auto traj = splitstep_evolve(u0, cfg, params, g, 1.0);
  const double m0 = l2_norm(u0, g);
  double drift = 0.0;
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(l2_norm(s, g) - m0) / m0);
  return {{fmt("max relative L2 drift over %zu steps %.3e < 1e-10", traj.states.size() - 1, drift), drift < 1e-10}};
}

// 8. Strang order, Picard contraction, solver agreement.
std::vector<Check> solvers() {
  std::vector<Check> out;
  {
    const SpaceTimeGrid g(8.0 * pi, 64, 8.0, 64);
    const PhaseParams params{0.0, 1.0, {1.0, 0.0}};
    const auto u0 = gaussian_data(g, 2.0, 1.0, 7, 0);
    auto final_state = [&](double dt) {
      SolveConfig cfg;
      cfg.dt = dt;
      return splitstep_evolve(u0, cfg, params, g, 1.0).states.back();
    };
    const std::vector<double> dts{0.02, 0.01, 0.005, 0.0025};
    const auto ref = final_state(dts.back() / 16.0);
    std::vector<ScalingPoint> pts;
    for (auto it = dts.rbegin(); it != dts.rend(); ++it) pts.push_back({*it, l2_gap(final_state(*it), ref, g)});
    const double order = fit_scaling_exponent(pts).slope;
    out.push_back({fmt("split-step self-convergence order %.4f, target 2.0 +- 0.1", order),
                   std::abs(order - 2.0) <= 0.1});
  }
  const SpaceTimeGrid g(16.0 * pi, 128, 8.0, 64);
  const PhaseParams params{0.0, 1.0, {1.0, 0.0}};
  const auto u0 = gaussian_data(g, 0.1, 2.0, 9, 0);
  SolveConfig cfg;
  cfg.dt = 1e-3;
  const auto pic = picard_iterate(u0, cfg, params, g, 0.5);
  double worst = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 1; i < pic.residuals.size(); ++i) {
    // Below ~1e-14 the residual is rounding noise and its ratio carries no information.
    if (pic.residuals[i - 1] < 1e-14) break;
    worst = std::max(worst, pic.residuals[i] / pic.residuals[i - 1]);
    ++counted;
  }
  out.push_back({fmt("Picard converged in %zu iterations, worst residual ratio %.2e < 0.5 over %zu ratios",
                     pic.residuals.size(), worst, counted),
                 pic.converged && counted >= 1 && worst < 0.5});
  const auto split = splitstep_evolve(u0, cfg, params, g, 0.5);
  double gap = 0.0;
  for (std::size_t n = 0; n < split.states.size(); ++n) {
    gap = std::max(gap, l2_gap(split.states[n], pic.trajectory.states[n], g));
  }
  out.push_back({fmt("sup_t L2 gap Picard vs split-step %.3e < 1e-6", gap), gap < 1e-6});
  return out;
}

// 9. Duhamel output grows at least like T^{1 - b + b'}.
std::vector<Check> duhamel() {
  std::vector<Check> out;
  const SpaceTimeGrid g(8.0 * pi, 32, 16.0, 2048);
  const PhaseParams params{0.5, 1.0, {1.0, 0.0}};
  const XsbIndex idx{0.0, 0.7, -0.2};
  const double eps = 1.0 - idx.b + idx.b_prime;
  const std::vector<double> windows{0.125, 0.25, 0.5, 1.0};
  double worst_slope = 1e300;
  std::vector<double> constants;
  for (std::uint64_t f = 0; f < 5; ++f) {
    auto rng = substream(11, f);
    cplx a[4];
    for (auto& z : a) z = complex_gaussian(rng);
    SpaceTimeField forcing(32, 2048);
    for (std::size_t n = 0; n < 2048; ++n) {
      const double t = g.t(n);
      for (std::size_t j = 0; j < 32; ++j) {
        const double x = g.x(j);
        forcing.at(j, n) = std::exp(-t * t / 8.0) *
                           (a[0] * std::cos(x / 4.0 + 0.3 * t) + a[1] * std::sin(x / 2.0) +
                            a[2] * std::exp(cplx(0.0, 0.75 * x - t)) + a[3] * std::cos(t) * std::cos(x / 4.0));
      }
    }
    std::vector<ScalingPoint> pts;
    double c = 0.0;
    for (double t : windows) {
      const auto d = duhamel_apply(forcing, t, idx, params, g);
      pts.push_back({t, d.output_norm});
      c = std::max(c, d.constant);
    }
    const double slope = fit_scaling_exponent(pts).slope;
    worst_slope = std::min(worst_slope, slope);
    constants.push_back(c);
    out.push_back({fmt("F%llu: slope %.4f, C = max_T out / (T^eps ||F||) = %.4f", static_cast<unsigned long long>(f),
                       slope, c),
                   slope >= eps - 0.15});
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  out.push_back({fmt("worst slope %.4f >= (1 - b + b') - 0.15 = %.2f", worst_slope, eps - 0.15),
                 worst_slope >= eps - 0.15});
  out.push_back({fmt("constant spread across F: max/min %.4f <= 2", *hi / *lo), *hi / *lo <= 2.0});
  return out;
}

// 10. ||psi U(t) u0||_{X^{s,b}} / ||u0||_{H^s} is a constant (||psi||_{H^b}).
std::vector<Check> linear_estimate() {
  // The temporal lattice must reach past phi(xi) on the data band, |xi| <= 16/3
  // gives phi <= 152 against tau_max = 402, or the modulation weight aliases.
  const SpaceTimeGrid g(8.0 * pi, 64, 16.0, 2048);
  const PhaseParams params{};
  const double s = -0.2, b = 0.7;
  const TimeWindow psi{TimeWindow::Kind::smooth_bump, 1.0};
  auto ratios = parallel_map(20, [&](std::size_t i) {
    auto rng = substream(21, i);
    std::uniform_real_distribution<double> width(0.5, 3.0);
    const auto u0 = gaussian_data(g, 1.0, width(rng), 21, 100 + i);
    const auto sol = windowed_free_solution(u0, psi, params, g);
    return xsb_norm(to_spectral_field(sol, g), s, b, params, g) / sobolev_norm(u0, s, g);
  });
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  // Continuum value: the space-time transform factors as u0^(xi) psi^(tau - phi(xi)),
  // so the ratio is ||psi||_{H^b}. psi is even and compactly supported, so
  // psi^(sigma) = (2 pi)^{-1/2} \int psi(t) cos(t sigma) dt by the trapezoid rule.
  const std::size_t nodes = 4000;
  const double h_t = 4.0 / nodes;
  double hb = 0.0;
  const double d_sigma = 0.02;
  for (double sigma = -150.0; sigma <= 150.0; sigma += d_sigma) {
    double ft = 0.0;
    for (std::size_t n = 0; n <= nodes; ++n) {
      const double t = -2.0 + h_t * n;
      ft += psi(t) * std::cos(t * sigma);
    }
    ft *= h_t / std::sqrt(2.0 * pi);
    hb += std::pow(bracket(sigma), 2.0 * b) * ft * ft * d_sigma;
  }
  hb = std::sqrt(hb);
  double mean = 0.0;
  for (double r : ratios) mean += r / ratios.size();
  return {{fmt("20 ratios in [%.6f, %.6f]: spread %.3f%% < 5%%", *lo, *hi, 100.0 * (*hi / *lo - 1.0)),
           *hi / *lo - 1.0 < 0.05},
          {fmt("mean ratio %.6f vs continuum ||psi||_{H^b} = %.6f: relative gap %.2e < 5%%", mean, hb,
               std::abs(mean / hb - 1.0)),
           std::abs(mean / hb - 1.0) < 0.05}};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "counterexample norm scaling", 60.0, norm_scaling},
      {2, "ill-posedness threshold", 300.0, ratio_threshold},
      {3, "calculus inequality suite", 60.0, lemma_suite},
      {4, "convergence dichotomy of I(0,0)", 120.0, dichotomy},
      {5, "uniform bound and negative control", 300.0, uniform_bound},
      {6, "trilinear search", 300.0, trilinear},
      {7, "L2 conservation", 10.0, conservation},
      {8, "solver convergence and cross-validation", 60.0, solvers},
      {9, "Duhamel estimate", 60.0, duhamel},
      {10, "linear estimate", 30.0, linear_estimate},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool unexpected_failure = false;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Check> checks;
    try {
      checks = c.run();
    } catch (const std::exception& e) {
      checks.push_back({std::string("threw: ") + e.what(), false});
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    checks.push_back({fmt("runtime %.1f s < %.0f s", elapsed, c.runtime_budget), elapsed < c.runtime_budget});

    bool pass = true, only_known = true;
    for (const auto& k : checks) {
      pass = pass && k.pass;
      if (!k.pass && !k.known_unattainable) only_known = false;
    }
    std::printf("%s %2d %s%s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                pass ? "" : (only_known ? " (known unattainable, see README)" : ""));
    for (const auto& k : checks) {
      std::printf("       [%s] %s%s\n", k.pass ? "ok" : "x ", k.what.c_str(),
                  !k.pass && k.known_unattainable ? "  <- known unattainable" : "");
    }
    std::fflush(stdout);
    if (!pass && !only_known) unexpected_failure = true;
  }
  return unexpected_failure ? 1 : 0;
}
