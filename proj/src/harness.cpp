#include "xsblab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <locale>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "toml.hpp"
#include "xsblab/counterexample.hpp"
#include "xsblab/dynamics.hpp"
#include "xsblab/lemmas.hpp"
#include "xsblab/parallel.hpp"
#include "xsblab/resonance.hpp"
#include "xsblab/scaling.hpp"
#include "xsblab/trilinear.hpp"
#include "xsblab/xsb.hpp"

namespace xsblab::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

const std::vector<CatalogEntry> entries = {
    {ExperimentKind::counterexample_scaling, "counterexample",
     "bump-slab norm and trilinear-ratio scaling in N",
     "the trilinear estimate fails for s < -1/4: ratio ~ N^{-2s-1/2}, slab norm ~ N^{s-1/4}"},
    {ExperimentKind::lemma_suite, "lemmas", "one-dimensional calculus inequalities el1-el4",
     "each inequality's ratio stays bounded across a two-decade parameter ladder"},
    {ExperimentKind::uniform_bound, "bound-scan", "sup of the duality integral I(xi, y)",
     "I(xi, y) is bounded uniformly in (xi, y) when rho + 1/3 < b"},
    {ExperimentKind::trilinear_search, "trilinear", "random-triple search for the trilinear ratio",
     "||u v conj(w)||_{s,b-1} <= C ||u|| ||v|| ||w|| for -1/4 < s <= 0, 7/12 < b < 11/12"},
    {ExperimentKind::evolve, "evolve", "split-step evolution with conservation diagnostics",
     "the flow preserves the L2 norm when gamma is real"},
    {ExperimentKind::picard_vs_splitstep, "picard", "Picard iteration of the Duhamel equation",
     "small data contract geometrically and the fixed point matches the split-step solution"},
    {ExperimentKind::continuous_dependence, "dependence", "Lipschitz probe of u0 -> u(t)",
     "the data-to-solution map is continuous: difference ratios stay bounded as delta -> 0"},
    {ExperimentKind::existence_time, "existence-time", "largest contracting time versus data size",
     "the contraction time shrinks as the data grow and stays above T^eps = 1/(2 C M^2)"},
};

// Defaults, one table per experiment. Every accepted key appears here.
json grid_defaults(double length, int nx, double time_span, int nt) {
  return {{"length", length}, {"nx", nx}, {"time_span", time_span}, {"nt", nt}};
}

json initial_defaults(double amplitude, double width) {
  return {{"kind", "random"}, {"amplitude", amplitude}, {"width", width}, {"center", nan},
          {"mode", 1}};
}

json defaults(ExperimentKind kind) {
  const json phase = {{"alpha", 0.0}, {"beta", 1.0}, {"gamma_re", 1.0}, {"gamma_im", 0.0}};
  json p;
  switch (kind) {
    case ExperimentKind::counterexample_scaling:
      p = {{"s_values", {-0.5, -0.25, 0.0}},
           {"b", 0.75},
           {"n_values", {64, 128, 256, 512, 1024}},
           {"alpha", 0.0},
           {"beta", 1.0},
           {"n_xi", 64},
           {"n_sigma", 64},
           {"target_v", 48},
           {"target_sigma", 256},
           {"method", "tensor_grid"},
           {"strata_per_dim", 8}};
      break;
    case ExperimentKind::lemma_suite:
      p = {{"tolerance", 1e-9}, {"ladder_points", 9}, {"b", 0.75}, {"c1", 0.6}, {"c2", 0.6},
           {"max_spread", 8.0}};
      break;
    case ExperimentKind::uniform_bound:
      p = {{"rho", 0.2},          {"b", 0.7},          {"points_per_decade", 1},
           {"xi_max", 1000.0},    {"truncation_radius", 256.0}, {"tolerance", 1e-5},
           {"refine", true},      {"negative_control", false}};
      break;
    case ExperimentKind::trilinear_search:
      p = {{"s", -0.2},
           {"b", 0.75},
           {"ensemble_size", 1000},
           {"doubling", true},
           {"grid", grid_defaults(16.0 * pi, 64, 8.0 * pi, 256)},
           {"bump_n", {64, 128, 256, 512}},
           {"control_s", nullptr},
           {"alpha", 0.0},
           {"beta", 1.0}};
      break;
    case ExperimentKind::evolve:
      p = phase;
      p.update({{"grid", grid_defaults(8.0 * pi, 64, 8.0, 64)},
                {"dt", 1e-3},
                {"t_final", 1.0},
                {"dealias", "none"},
                {"scheme", "strang"},
                {"initial", initial_defaults(1.0, 1.0)},
                {"s", 0.0},
                {"order_dts", json::array()},
                {"dump", true}});
      break;
    case ExperimentKind::picard_vs_splitstep:
      p = phase;
      p.update({{"grid", grid_defaults(16.0 * pi, 128, 8.0, 64)},
                {"dt", 1e-3},
                {"t_final", 0.5},
                {"dealias", "none"},
                {"initial", initial_defaults(0.1, 2.0)},
                {"s", 0.0},
                {"picard_tol", 1e-12},
                {"picard_max_iters", 60}});
      break;
    case ExperimentKind::continuous_dependence:
      p = phase;
      p.update({{"grid", grid_defaults(8.0 * pi, 64, 8.0, 64)},
                {"dt", 1e-2},
                {"t_final", 1.0},
                {"dealias", "none"},
                {"initial", initial_defaults(0.3, 2.0)},
                {"s", 0.0},
                {"deltas", {1e-2, 5e-3, 1e-3, 1e-4, 1e-5, 1e-6}}});
      break;
    case ExperimentKind::existence_time:
      p = phase;
      p.update({{"grid", grid_defaults(8.0 * pi, 64, 8.0, 64)},
                {"dt", 1e-2},
                {"dealias", "none"},
                {"initial", initial_defaults(2.0, 1.0)},
                {"lambdas", {1, 2, 4, 8}},
                {"s", 0.0},
                {"b", 0.7},
                {"b_prime", -0.25},
                {"c_measured", 1.0},
                {"picard_tol", 1e-8},
                {"picard_max_iters", 60},
                {"bisection_steps", 10}});
      break;
  }
  return p;
}

void unknown_keys(const json& given, const json& known, const std::string& prefix,
                  std::vector<std::string>& errs) {
  if (!given.is_object() || !known.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    if (!known.contains(key)) {
      errs.push_back("unknown parameter '" + prefix + key + "'");
    } else if (known.at(key).is_object()) {
      unknown_keys(value, known.at(key), prefix + key + ".", errs);
    }
  }
}

/// Typed access with violations collected instead of thrown.
struct Reader {
  const json& p;
  std::string prefix;
  std::vector<std::string>& errs;

  void need(bool ok, const std::string& msg) const {
    if (!ok) errs.push_back(msg);
  }
  double num(const char* key) const {
    const auto& v = p.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_null()) return nan;
    errs.push_back(prefix + key + " must be a number");
    return nan;
  }
  std::size_t count(const char* key) const {
    const double v = num(key);
    if (!(v >= 0.0) || v != std::floor(v)) {
      errs.push_back(prefix + key + " must be a non-negative integer");
      return 0;
    }
    return static_cast<std::size_t>(v);
  }
  std::vector<double> nums(const char* key) const {
    const auto& v = p.at(key);
    std::vector<double> out;
    if (!v.is_array()) {
      errs.push_back(prefix + key + " must be an array of numbers");
      return out;
    }
    for (const auto& x : v) {
      if (!x.is_number()) {
        errs.push_back(prefix + key + " must be an array of numbers");
        return {};
      }
      out.push_back(x.get<double>());
    }
    return out;
  }
  std::string str(const char* key) const {
    const auto& v = p.at(key);
    if (v.is_string()) return v.get<std::string>();
    errs.push_back(prefix + key + " must be a string");
    return {};
  }
  bool flag(const char* key) const {
    const auto& v = p.at(key);
    if (v.is_boolean()) return v.get<bool>();
    errs.push_back(prefix + key + " must be true or false");
    return false;
  }
  Reader sub(const char* key) const {
    static const json empty = json::object();
    const auto& v = p.at(key);
    if (!v.is_object()) {
      errs.push_back(prefix + key + " must be a table");
      return Reader{empty, prefix + key + ".", errs};
    }
    return Reader{v, prefix + key + ".", errs};
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

// Typed parameter sets.

struct GridParams {
  double length, time_span;
  std::size_t nx, nt;
  std::optional<SpaceTimeGrid> grid;
};

GridParams read_grid(const Reader& r) {
  GridParams g{r.num("length"), r.num("time_span"), r.count("nx"), r.count("nt"), std::nullopt};
  try {
    g.grid.emplace(g.length, g.nx, g.time_span, g.nt);
  } catch (const Error& e) {
    r.errs.push_back(r.prefix + "invalid grid: " + e.what());
  }
  return g;
}

PhaseParams read_phase(const Reader& r, bool with_gamma) {
  PhaseParams params;
  params.alpha = r.num("alpha");
  params.beta = r.num("beta");
  if (with_gamma) params.gamma = cplx(r.num("gamma_re"), r.num("gamma_im"));
  try {
    params.validate();
  } catch (const Error& e) {
    r.errs.push_back(e.what());
  }
  return params;
}

Dealias read_dealias(const Reader& r) {
  const auto s = r.str("dealias");
  r.need(s == "none" || s == "two_thirds", r.prefix + "dealias must be 'none' or 'two_thirds'");
  return s == "two_thirds" ? Dealias::two_thirds : Dealias::none;
}

struct InitialParams {
  std::string kind;
  double amplitude, width, center;
  double mode;
};

InitialParams read_initial(const Reader& r) {
  InitialParams p{r.str("kind"), r.num("amplitude"), r.num("width"), r.num("center"), r.num("mode")};
  r.need(p.kind == "random" || p.kind == "gaussian" || p.kind == "mode",
         r.prefix + "kind must be 'random', 'gaussian' or 'mode'");
  r.need(p.amplitude > 0.0 && std::isfinite(p.amplitude), r.prefix + "amplitude must be > 0");
  r.need(p.width > 0.0 && std::isfinite(p.width), r.prefix + "width must be > 0");
  return p;
}

/// random: complex Gaussian modes with envelope exp(-xi^2 / width^2), L2 norm = amplitude.
/// gaussian: amplitude-normalised exp(-(x - center)^2 / width^2). mode: amplitude e^{i xi_mode x}.
SpatialSpectrum make_initial(const InitialParams& p, const SpaceTimeGrid& grid, std::uint64_t seed) {
  const std::size_t nx = grid.nx();
  if (p.kind == "random") {
    SpatialSpectrum u{std::vector<cplx>(nx)};
    auto rng = substream(seed, 0);
    for (std::size_t k = 0; k < nx; ++k) {
      const double xi = grid.xi(k) / p.width;
      u.values[k] = complex_gaussian(rng) * std::exp(-xi * xi);
    }
    const double n = l2_norm(u, grid);
    for (auto& z : u.values) z *= p.amplitude / n;
    return u;
  }
  SpatialField f{std::vector<cplx>(nx)};
  const double c = std::isnan(p.center) ? 0.5 * grid.length() : p.center;
  for (std::size_t j = 0; j < nx; ++j) {
    const double x = grid.x(j);
    if (p.kind == "gaussian") {
      const double d = (x - c) / p.width;
      f.values[j] = std::exp(-d * d);
    } else {
      f.values[j] = std::polar(p.amplitude, grid.dxi() * std::round(p.mode) * x);
    }
  }
  auto u = to_spectrum(f, grid);
  if (p.kind == "gaussian") {
    const double n = l2_norm(u, grid);
    for (auto& z : u.values) z *= p.amplitude / n;
  }
  return u;
}

/// Pieces shared by the evolution experiments.
struct Dynamics {
  GridParams grid;
  PhaseParams params;
  SolveConfig cfg;
  InitialParams initial;
  double s = 0.0;
};

Dynamics read_dynamics(const Reader& r, bool has_final_time) {
  Dynamics d{read_grid(r.sub("grid")), read_phase(r, true), {}, read_initial(r.sub("initial")),
             r.num("s")};
  d.cfg.dt = r.num("dt");
  d.cfg.dealias = read_dealias(r);
  d.cfg.residual_s = d.s;
  r.need(d.cfg.dt > 0.0 && d.cfg.dt <= 1.0, r.prefix + "dt must lie in (0, 1]");
  r.need(std::isfinite(d.s), r.prefix + "s must be finite");
  if (has_final_time && d.grid.grid) {
    const double t = r.num("t_final");
    r.need(t > 0.0 && t <= 0.5 * d.grid.time_span,
           r.prefix + "t_final must lie in (0, time_span/2] = (0, " + fmt(0.5 * d.grid.time_span) + "]");
  }
  return d;
}

// Tables and bundle writing.

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <typename... T>
  void add(const T&... cells) {
    rows.push_back({cell(cells)...});
  }
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / name);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + (dir / name).string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
  }
};

struct Outcome {
  json results = json::object();
  std::vector<Verdict> verdicts;
  std::vector<Table> tables;
  std::vector<PlotSeries> plots;
  /// Files written by the experiment itself (relative names).
  std::vector<std::function<void(const fs::path&)>> writers;
  std::vector<std::string> extra_files;
  bool incomplete = false;
  std::vector<std::string> notes;

  void verdict(std::string name, bool pass, double value, std::string criterion) {
    verdicts.push_back({std::move(name), pass, value, std::move(criterion)});
  }
};

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<ScalingPoint> pts;
  for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({x[i], y[i]});
  return fit_scaling_exponent(pts).slope;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back(std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  return v;
}

// Experiments. Each `check_*` reads and validates, each `run_*` computes.

struct CounterexampleParams {
  std::vector<double> s_values, n_values;
  double b;
  PhaseParams params;
  CounterexampleResolution res;
};

CounterexampleParams check_counterexample(const Reader& r, std::uint64_t seed) {
  CounterexampleParams p{r.nums("s_values"), r.nums("n_values"), r.num("b"), read_phase(r, false), {}};
  p.res.n_xi = r.count("n_xi");
  p.res.n_sigma = r.count("n_sigma");
  p.res.target_v = r.count("target_v");
  p.res.target_sigma = r.count("target_sigma");
  const auto method = r.str("method");
  r.need(method == "tensor_grid" || method == "monte_carlo",
         "method must be 'tensor_grid' or 'monte_carlo'");
  p.res.convolution.method =
      method == "monte_carlo" ? ConvolutionMethod::monte_carlo : ConvolutionMethod::tensor_grid;
  p.res.convolution.strata_per_dim = r.count("strata_per_dim");
  p.res.convolution.seed = seed;
  r.need(!p.s_values.empty(), "s_values must not be empty");
  r.need(p.n_values.size() >= 4 && strictly_increasing(p.n_values),
         "n_values needs >= 4 strictly increasing entries");
  r.need(std::all_of(p.n_values.begin(), p.n_values.end(), [](double n) { return n >= 4.0; }),
         "n_values must all be >= 4");
  r.need(p.b > 0.5 && p.b < 1.0, "b must lie in (1/2, 1)");
  r.need(p.res.n_xi >= 64 && p.res.n_sigma >= 64, "n_xi and n_sigma must be >= 64");
  r.need(p.res.target_v >= 8 && p.res.target_sigma >= 8, "target lattice must be at least 8 x 8");
  r.need(p.res.convolution.strata_per_dim >= 2, "strata_per_dim must be >= 2");
  return p;
}

Outcome run_counterexample(const CounterexampleParams& p) {
  Outcome out;
  auto rows = parallel_map(p.n_values.size(), [&](std::size_t i) {
    return counterexample_ratios(p.n_values[i], p.s_values, p.b, p.res, p.params);
  });
  Table t{"ratios.csv",
          {"N", "s", "num", "den", "ratio", "slab_norm", "total_mass", "expected_mass",
           "half_max_area", "insufficient_sampling"},
          {}};
  json results = json::array();
  for (std::size_t j = 0; j < p.s_values.size(); ++j) {
    const double s = p.s_values[j];
    std::vector<double> ratio, norm;
    PlotSeries ps{"ratio_s" + fmt(s), {{"s", fmt(s)}, {"b", fmt(p.b)}, {"x", "N"}, {"y", "ratio"}}, {}};
    for (std::size_t i = 0; i < p.n_values.size(); ++i) {
      const auto& r = rows[i][j];
      ratio.push_back(r.ratio);
      norm.push_back(std::cbrt(r.den));
      ps.points.emplace_back(r.n, r.ratio);
      out.incomplete = out.incomplete || r.insufficient_sampling;
      t.add(r.n, s, r.num, r.den, r.ratio, std::cbrt(r.den), r.total_mass, r.expected_mass,
            r.half_max_area, r.insufficient_sampling);
    }
    const double slope_norm = fitted_slope(p.n_values, norm);
    const double slope_ratio = fitted_slope(p.n_values, ratio);
    results.push_back({{"s", s},
                       {"slope_norm", slope_norm},
                       {"expected_slope_norm", s - 0.25},
                       {"slope_ratio", slope_ratio},
                       {"expected_slope_ratio", -2.0 * s - 0.5}});
    out.verdict("norm_slope_s=" + fmt(s), std::abs(slope_norm - (s - 0.25)) <= 0.05, slope_norm,
                "|slope - (s - 1/4)| <= 0.05");
    out.verdict("ratio_slope_s=" + fmt(s), std::abs(slope_ratio - (-2.0 * s - 0.5)) <= 0.1,
                slope_ratio, "|slope - (-2s - 1/2)| <= 0.1");
    out.plots.push_back(std::move(ps));
  }
  out.results["per_s"] = results;
  if (p.s_values.size() == 1) {
    out.results["slope_ratio"] = results[0]["slope_ratio"];
    out.results["slope_norm"] = results[0]["slope_norm"];
  }
  out.tables.push_back(std::move(t));
  return out;
}

struct LemmaParams {
  QuadSpec quad;
  std::size_t points;
  double b, c1, c2, max_spread;
};

LemmaParams check_lemmas(const Reader& r) {
  LemmaParams p{{}, r.count("ladder_points"), r.num("b"), r.num("c1"), r.num("c2"), r.num("max_spread")};
  p.quad.tolerance = r.num("tolerance");
  r.need(p.quad.tolerance > 0.0 && p.quad.tolerance < 1e-2, "tolerance must lie in (0, 1e-2)");
  r.need(p.points >= 3, "ladder_points must be >= 3");
  r.need(p.b > 0.5, "b must be > 1/2 (el1, el4)");
  r.need(p.c1 > 0.0 && p.c1 < 1.0 && p.c2 > 0.0 && p.c2 < 1.0 && p.c1 + p.c2 > 1.0,
         "el2 needs 0 < c1, c2 < 1 and c1 + c2 > 1");
  r.need(p.max_spread >= 1.0, "max_spread must be >= 1");
  return p;
}

Outcome run_lemmas(const LemmaParams& p) {
  Outcome out;
  Table t{"lemmas.csv", {"lemma", "parameter", "value", "ratio", "error", "argmax"}, {}};
  auto ladder = [&](const char* name, const std::vector<double>& params, auto&& check) {
    auto checks = parallel_map(params.size(), [&](std::size_t i) { return check(params[i]); });
    PlotSeries ps{name, {{"x", "parameter"}, {"y", "ratio"}}, {}};
    for (std::size_t i = 0; i < params.size(); ++i) {
      t.add(name, params[i], checks[i].value, checks[i].ratio, checks[i].error, checks[i].argmax);
      ps.points.emplace_back(params[i], checks[i].ratio);
    }
    const double spread = ratio_spread(checks);
    out.results[name] = {{"spread", spread}};
    out.verdict(std::string(name) + "_spread", spread <= p.max_spread, spread,
                "max/min ratio <= " + fmt(p.max_spread));
    out.plots.push_back(std::move(ps));
    return checks;
  };
  ladder("el1", logspace(0.0, 2.0, p.points), [&](double a2) { return check_el1(0.0, a2, p.b, p.quad); });
  ladder("el2", logspace(-1.0, 1.0, p.points),
         [&](double a2) { return check_el2(0.0, a2, p.c1, p.c2, p.quad); });
  ladder("el3", logspace(-1.0, 1.0, p.points), [&](double a) { return check_el3(a, 0.5, 1.0, p.quad); });
  ladder("el4", logspace(0.0, 2.0, p.points), [&](double a) { return check_el4(a, 1.0, p.b, p.quad); });

  const auto unit = check_el3(1.0, 1.0, 1.0, p.quad);
  t.add("el3_c1=c2=1", 1.0, unit.value, unit.ratio, unit.error, unit.argmax);
  out.results["el3_unit_sup"] = unit.value;
  out.verdict("el3_unit_sup", std::abs(unit.value - 1.0) <= 0.01, unit.value, "|sup - 1| <= 0.01");
  out.tables.push_back(std::move(t));
  return out;
}

struct BoundParams {
  double rho, b, xi_max;
  std::size_t ppd;
  QuadSpec quad;
  bool refine, negative;
};

BoundParams check_bound(const Reader& r) {
  BoundParams p{r.num("rho"), r.num("b"), r.num("xi_max"), r.count("points_per_decade"), {},
                r.flag("refine"), r.flag("negative_control")};
  p.quad.truncation_radius = r.num("truncation_radius");
  p.quad.tolerance = r.num("tolerance");
  r.need(p.rho > 0.0 && p.rho < 0.25, "rho must lie in (0, 1/4)");
  if (!p.negative) {
    r.need(p.b > 7.0 / 12.0 && p.b < 11.0 / 12.0,
           "b must lie in (7/12, 11/12) (set negative_control = true to probe outside)");
  } else {
    r.need(p.b > 0.0 && p.b < 1.0, "negative control needs b in (0, 1)");
  }
  r.need(p.ppd >= 1, "points_per_decade must be >= 1");
  r.need(p.xi_max > 1.0 && p.xi_max <= 1e3, "xi_max must lie in (1, 1e3]");
  r.need(p.quad.truncation_radius >= 10.0, "truncation_radius must be >= 10");
  r.need(p.quad.tolerance > 0.0 && p.quad.tolerance < 1e-2, "tolerance must lie in (0, 1e-2)");
  return p;
}

Outcome run_bound(const BoundParams& p) {
  Outcome out;
  Table t{"scan.csv", {"run", "xi", "y", "z", "value", "truncated", "tail_slope", "ok", "message"}, {}};
  auto scan = [&](const char* run, std::size_t ppd, QuadSpec quad) {
    const auto rep = uniform_bound_scan(p.rho, p.b, default_scan_grid(ppd, p.xi_max), quad);
    for (const auto& pt : rep.points) {
      t.add(run, pt.xi, pt.y, pt.z, pt.value, pt.truncated, pt.tail_slope, pt.ok, pt.message);
    }
    out.results[run] = {{"sup", rep.sup},
                        {"sup_truncated", rep.sup_truncated},
                        {"argmax_xi", rep.argmax_xi},
                        {"argmax_y", rep.argmax_y},
                        {"points", rep.points.size()},
                        {"failures", rep.failures},
                        {"divergent", rep.divergent},
                        {"points_per_decade", ppd},
                        {"truncation_radius", quad.truncation_radius}};
    out.incomplete = out.incomplete || rep.failures > 0;
    return rep;
  };
  const auto base = scan("base", p.ppd, p.quad);
  if (!p.refine) {
    if (!p.negative) out.verdict("finite_sup", std::isfinite(base.sup), base.sup, "sup < inf");
    out.tables.push_back(std::move(t));
    return out;
  }
  QuadSpec fine = p.quad;
  fine.truncation_radius *= 2.0;
  const auto refined = scan("refined", 2 * p.ppd, fine);
  if (p.negative) {
    const bool grows = refined.sup_truncated > base.sup_truncated;
    const bool divergent = base.divergent > 0 && refined.divergent > 0;
    out.verdict("unbounded_growth", grows && divergent, refined.sup_truncated / base.sup_truncated,
                "divergent tails present and truncated sup grows under refinement");
  } else {
    const double change = std::abs(refined.sup - base.sup) / base.sup;
    out.results["relative_change"] = change;
    out.verdict("sup_stable", std::isfinite(change) && change < 0.1, change,
                "|sup_refined - sup| / sup < 0.1");
  }
  out.tables.push_back(std::move(t));
  return out;
}

struct TrilinearParams {
  double s, b;
  std::size_t ensemble;
  bool doubling;
  GridParams grid;
  std::vector<double> bump_n;
  double control_s;
  PhaseParams params;
};

TrilinearParams check_trilinear(const Reader& r) {
  TrilinearParams p{r.num("s"), r.num("b"), r.count("ensemble_size"), r.flag("doubling"),
                    read_grid(r.sub("grid")), r.nums("bump_n"), r.num("control_s"),
                    read_phase(r, false)};
  r.need(p.s > -0.25 && p.s <= 0.0, "s must lie in (-1/4, 0]");
  r.need(p.b > 7.0 / 12.0 && p.b < 11.0 / 12.0, "b must lie in (7/12, 11/12)");
  r.need(p.ensemble >= 1, "ensemble_size must be >= 1");
  r.need(p.bump_n.empty() || (p.bump_n.size() >= 2 && strictly_increasing(p.bump_n) && p.bump_n[0] >= 4.0),
         "bump_n must be empty or >= 2 increasing entries, all >= 4");
  r.need(std::isnan(p.control_s) || p.control_s <= -0.25, "control_s must be <= -1/4 (outside the range)");
  return p;
}

Outcome run_trilinear(const TrilinearParams& p, std::uint64_t seed) {
  Outcome out;
  const std::size_t total = p.doubling ? 2 * p.ensemble : p.ensemble;
  const auto rep = trilinear_ratio_search(p.s, p.b, total, *p.grid.grid, p.params, seed);
  Table t{"ensemble.csv", {"index", "family_u", "family_v", "family_w", "ratio"}, {}};
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    auto rng = substream(seed, i);
    std::string fam[3];
    for (auto& f : fam) f = to_string(rng() % 2 == 0 ? FieldFamily::gaussian_modes : FieldFamily::packet);
    t.add(i, fam[0], fam[1], fam[2], rep.ratios[i]);
  }
  out.tables.push_back(std::move(t));
  out.results["sup_ratio"] = rep.sup_ratio;
  out.results["witness"] = {{"index", rep.witness.index},
                            {"families",
                             {to_string(rep.witness.families[0]), to_string(rep.witness.families[1]),
                              to_string(rep.witness.families[2])}}};
  if (p.doubling) {
    const double growth = rep.prefix_max(total) / rep.prefix_max(p.ensemble);
    out.results["doubling_growth"] = growth;
    out.verdict("ensemble_doubling", growth < 1.5, growth, "max ratio grows < x1.5 when the ensemble doubles");
  }

  if (!p.bump_n.empty()) {
    CounterexampleResolution res;
    Table bt{"bump.csv", {"s", "N", "ratio"}, {}};
    auto family = [&](double s, const std::string& name) {
      const auto rows = bump_family_ratios(p.bump_n, s, p.b, res, p.params);
      PlotSeries ps{name, {{"s", fmt(s)}, {"x", "N"}, {"y", "ratio"}}, {}};
      for (const auto& r : rows) {
        bt.add(s, r.n, r.ratio);
        ps.points.emplace_back(r.n, r.ratio);
      }
      out.plots.push_back(std::move(ps));
      return rows.back().ratio / rows.front().ratio;
    };
    const double growth = family(p.s, "bump");
    out.results["bump_growth"] = growth;
    out.verdict("bump_family", growth < 1.5, growth, "bump ratio grows < x1.5 over the N ladder");
    if (!std::isnan(p.control_s)) {
      const double control = family(p.control_s, "bump_control");
      out.results["control_growth"] = control;
      out.verdict("bump_control", control > 2.0, control, "bump ratio grows > x2 at control_s");
    }
    out.tables.push_back(std::move(bt));
  }
  return out;
}

struct EvolveParams {
  Dynamics d;
  double t_final;
  std::vector<double> order_dts;
  bool dump;
};

EvolveParams check_evolve(const Reader& r) {
  EvolveParams p{read_dynamics(r, true), r.num("t_final"), r.nums("order_dts"), r.flag("dump")};
  const auto scheme = r.str("scheme");
  r.need(scheme == "strang" || scheme == "lie", "scheme must be 'strang' or 'lie'");
  p.d.cfg.scheme = scheme == "lie" ? SplitScheme::lie : SplitScheme::strang;
  r.need(p.order_dts.empty() || (p.order_dts.size() >= 3 &&
                                 std::is_sorted(p.order_dts.rbegin(), p.order_dts.rend()) &&
                                 p.order_dts.back() > 0.0),
         "order_dts must be empty or >= 3 decreasing positive steps");
  return p;
}

Outcome run_evolve(const EvolveParams& p, std::uint64_t seed) {
  Outcome out;
  const auto& grid = *p.d.grid.grid;
  const auto u0 = make_initial(p.d.initial, grid, seed);
  std::optional<Trajectory> solved;
  try {
    solved = splitstep_evolve(u0, p.d.cfg, p.d.params, grid, p.t_final);
  } catch (const BlowUpError& e) {
    out.incomplete = true;
    out.results["blow_up_time_estimate"] = e.time_estimate();
    out.notes.push_back(e.what());
    return out;
  }
  const Trajectory& traj = *solved;
  const double n0 = l2_norm(u0, grid);
  double drift = 0.0;
  double free_dev = 0.0;
  const bool linear = std::abs(p.d.params.gamma) == 0.0;
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    drift = std::max(drift, std::abs(l2_norm(traj.states[n], grid) - n0) / n0);
    if (linear) {
      auto f = free_evolve(u0, traj.times[n], p.d.params, grid);
      for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] -= traj.states[n].values[k];
      free_dev = std::max(free_dev, l2_norm(f, grid) / n0);
    }
  }
  out.results["max_l2_drift"] = drift;
  out.results["steps"] = traj.states.size() - 1;
  out.results["dt"] = traj.dt;
  if (p.d.params.gamma_is_real() && p.d.cfg.dealias == Dealias::none) {
    out.verdict("l2_conservation", drift < 1e-10 * p.t_final, drift, "relative L2 drift < 1e-10 T");
  } else {
    out.notes.push_back("conservation verdict skipped: needs real gamma and dealias = none");
  }
  if (linear) {
    out.results["max_free_deviation"] = free_dev;
    out.verdict("free_evolution", free_dev < 1e-12, free_dev, "gamma = 0 matches the free group to 1e-12");
  }
  out.writers.push_back([traj, s = p.d.s](const fs::path& dir) { write_trajectory_csv(traj, s, dir / "trajectory.csv"); });
  out.extra_files.push_back("trajectory.csv");
  if (p.dump) {
    out.writers.push_back([traj](const fs::path& dir) { write_trajectory_binary(traj, dir / "trajectory.xsbt"); });
    out.extra_files.push_back("trajectory.xsbt");
  }

  if (!p.order_dts.empty()) {
    SolveConfig ref_cfg = p.d.cfg;
    ref_cfg.dt = p.order_dts.back() / 16.0;
    const auto ref = splitstep_evolve(u0, ref_cfg, p.d.params, grid, p.t_final).states.back();
    auto errs = parallel_map(p.order_dts.size(), [&](std::size_t i) {
      SolveConfig c = p.d.cfg;
      c.dt = p.order_dts[i];
      auto last = splitstep_evolve(u0, c, p.d.params, grid, p.t_final).states.back();
      for (std::size_t k = 0; k < last.values.size(); ++k) last.values[k] -= ref.values[k];
      return l2_norm(last, grid);
    });
    Table t{"order.csv", {"dt", "error"}, {}};
    PlotSeries ps{"order", {{"x", "dt"}, {"y", "error"}, {"reference_dt", fmt(ref_cfg.dt)}}, {}};
    std::vector<double> dts(p.order_dts.rbegin(), p.order_dts.rend());
    std::vector<double> es(errs.rbegin(), errs.rend());
    for (std::size_t i = 0; i < dts.size(); ++i) {
      t.add(dts[i], es[i]);
      ps.points.emplace_back(dts[i], es[i]);
    }
    const double order = fitted_slope(dts, es);
    out.results["convergence_order"] = order;
    out.verdict("convergence_order", std::abs(order - 2.0) <= 0.1, order, "|order - 2| <= 0.1");
    out.tables.push_back(std::move(t));
    out.plots.push_back(std::move(ps));
  }
  return out;
}

struct PicardParams {
  Dynamics d;
  double t_final;
};

PicardParams check_picard(const Reader& r) {
  PicardParams p{read_dynamics(r, true), r.num("t_final")};
  p.d.cfg.picard_tol = r.num("picard_tol");
  p.d.cfg.picard_max_iters = r.count("picard_max_iters");
  r.need(p.d.cfg.picard_tol > 0.0, "picard_tol must be > 0");
  r.need(p.d.cfg.picard_max_iters >= 1, "picard_max_iters must be >= 1");
  return p;
}

Outcome run_picard(const PicardParams& p, std::uint64_t seed) {
  Outcome out;
  const auto& grid = *p.d.grid.grid;
  const auto u0 = make_initial(p.d.initial, grid, seed);
  PicardResult pr{Trajectory{grid, p.d.params, 0.0, {}, {}}, {}, false};
  try {
    pr = picard_iterate(u0, p.d.cfg, p.d.params, grid, p.t_final);
  } catch (const ContractionError& e) {
    out.incomplete = true;
    out.notes.push_back(e.what());
    pr.residuals = e.residuals();
  }
  Table rt{"residuals.csv", {"iteration", "residual", "ratio"}, {}};
  PlotSeries ps{"residuals", {{"x", "iteration"}, {"y", "residual"}}, {}};
  double worst = 0.0;
  for (std::size_t k = 0; k < pr.residuals.size(); ++k) {
    // Ratios below the rounding floor carry no contraction information.
    const bool informative = k > 0 && pr.residuals[k - 1] > 10.0 * p.d.cfg.picard_tol;
    const double ratio = k > 0 ? pr.residuals[k] / pr.residuals[k - 1] : nan;
    if (informative) worst = std::max(worst, ratio);
    rt.add(k + 1, pr.residuals[k], ratio);
    ps.points.emplace_back(static_cast<double>(k + 1), pr.residuals[k]);
  }
  out.tables.push_back(std::move(rt));
  out.plots.push_back(std::move(ps));
  out.results["iterations"] = pr.residuals.size();
  out.results["converged"] = pr.converged;
  out.results["max_residual_ratio"] = worst;
  out.verdict("picard_converged", pr.converged, static_cast<double>(pr.residuals.size()),
              "residual < picard_tol within the iteration budget");
  out.verdict("picard_geometric", pr.converged && worst < 0.5, worst, "successive residual ratio < 0.5");
  if (!pr.converged) return out;

  const auto ss = splitstep_evolve(u0, p.d.cfg, p.d.params, grid, p.t_final);
  Table ct{"comparison.csv", {"t", "l2_difference"}, {}};
  double sup = 0.0;
  for (std::size_t n = 0; n < ss.states.size(); ++n) {
    SpatialSpectrum d{ss.states[n].values};
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= pr.trajectory.states[n].values[k];
    const double diff = l2_norm(d, grid);
    sup = std::max(sup, diff);
    ct.add(ss.times[n], diff);
  }
  out.tables.push_back(std::move(ct));
  out.results["sup_l2_difference"] = sup;
  out.verdict("cross_solver", sup < 1e-6, sup, "sup_t ||picard - splitstep||_L2 < 1e-6");
  return out;
}

struct DependenceParams {
  Dynamics d;
  double t_final;
  std::vector<double> deltas;
};

DependenceParams check_dependence(const Reader& r) {
  DependenceParams p{read_dynamics(r, true), r.num("t_final"), r.nums("deltas")};
  r.need(p.deltas.size() >= 2, "deltas needs >= 2 entries");
  r.need(std::is_sorted(p.deltas.rbegin(), p.deltas.rend()), "deltas must be decreasing");
  r.need(std::all_of(p.deltas.begin(), p.deltas.end(), [](double d) { return d >= 0.0 && d <= 1.0; }),
         "deltas must lie in [0, 1]");
  return p;
}

Outcome run_dependence(const DependenceParams& p, std::uint64_t seed) {
  Outcome out;
  const auto& grid = *p.d.grid.grid;
  const auto u0 = make_initial(p.d.initial, grid, seed);
  const auto pts = continuous_dependence_probe(u0, p.deltas, p.d.s, p.d.cfg, p.d.params, grid,
                                               p.t_final, seed + 1);
  Table t{"dependence.csv", {"delta", "ratio", "skipped"}, {}};
  PlotSeries ps{"dependence", {{"x", "delta"}, {"y", "ratio"}}, {}};
  std::vector<double> ratios;
  for (const auto& q : pts) {
    t.add(q.delta, q.ratio, q.skipped);
    if (q.skipped) continue;
    ratios.push_back(q.ratio);
    ps.points.emplace_back(q.delta, q.ratio);
  }
  out.tables.push_back(std::move(t));
  out.plots.push_back(std::move(ps));
  if (ratios.empty()) {
    out.incomplete = true;
    return out;
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  double step = 0.0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    step = std::max(step, std::abs(ratios[i] - ratios[i - 1]) / ratios[i - 1]);
  }
  const double upper = 2.0 * std::exp(p.t_final);
  out.results["ratio_min"] = *lo;
  out.results["ratio_max"] = *hi;
  out.verdict("ratio_band", *lo >= 0.5 && *hi <= upper, *hi, "ratios within [1/2, 2 e^T]");
  out.verdict("delta_independence", *hi / *lo <= 1.2, *hi / *lo, "max/min ratio <= 1.2");
  out.verdict("stabilization", step < 0.1, step, "consecutive ratios differ < 10%");
  return out;
}

struct ExistenceParams {
  Dynamics d;
  std::vector<double> lambdas;
  double b, b_prime, c_measured;
  std::size_t bisection_steps;
};

ExistenceParams check_existence(const Reader& r) {
  ExistenceParams p{read_dynamics(r, false), r.nums("lambdas"), r.num("b"), r.num("b_prime"),
                    r.num("c_measured"), r.count("bisection_steps")};
  p.d.cfg.picard_tol = r.num("picard_tol");
  p.d.cfg.picard_max_iters = r.count("picard_max_iters");
  r.need(!p.lambdas.empty() && strictly_increasing(p.lambdas) && p.lambdas.front() > 0.0,
         "lambdas must be positive and strictly increasing");
  r.need(XsbIndex{p.d.s, p.b, p.b_prime}.in_duhamel_range(), "needs -1/2 < b' <= 0 <= b <= b' + 1");
  r.need(1.0 - p.b + p.b_prime > 0.0, "needs eps = 1 - b + b' > 0");
  r.need(p.c_measured > 0.0, "c_measured must be > 0");
  r.need(p.d.cfg.picard_tol > 0.0, "picard_tol must be > 0");
  return p;
}

Outcome run_existence(const ExistenceParams& p, std::uint64_t seed) {
  Outcome out;
  const auto& grid = *p.d.grid.grid;
  const auto shape = make_initial(p.d.initial, grid, seed);
  const auto rep = existence_time_probe(shape, p.lambdas, p.d.s, p.b, p.b_prime, p.d.cfg, p.d.params,
                                        grid, p.c_measured, p.bisection_steps);
  Table t{"existence.csv", {"lambda", "t_observed", "censored", "exhausted", "t_floor"}, {}};
  PlotSeries ps{"existence", {{"x", "lambda"}, {"y", "t_observed"}}, {}};
  bool monotone = true;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const auto& q = rep.points[i];
    t.add(q.lambda, q.t_observed, q.censored, q.exhausted, q.t_floor);
    ps.points.emplace_back(q.lambda, q.t_observed);
    out.incomplete = out.incomplete || q.exhausted;
    if (i > 0 && q.t_observed > rep.points[i - 1].t_observed * (1.0 + 1e-9)) monotone = false;
  }
  out.tables.push_back(std::move(t));
  out.plots.push_back(std::move(ps));
  out.results["theory_slope"] = rep.theory_slope;
  out.results["observed_slope"] = rep.fit ? json(rep.fit->slope) : json(nullptr);
  out.results["slope_comparison"] = "observed vs -2/eps, reported only (the bound is sufficient, not sharp)";
  out.verdict("monotone_in_lambda", monotone && (!rep.fit || rep.fit->slope <= 0.0),
              rep.fit ? rep.fit->slope : 0.0, "T_observed nonincreasing in lambda, slope <= 0");
  out.verdict("theory_floor", rep.floor_respected, 0.0, "T_observed >= theory floor for every lambda");
  return out;
}

/// Reads and validates; on success `run` dispatches to the experiment.
struct Prepared {
  std::function<Outcome()> run;
};

Prepared prepare(const ExperimentConfig& config, const json& params, std::vector<std::string>& errs) {
  Reader r{params, "", errs};
  const auto seed = config.seed;
  switch (config.experiment) {
    case ExperimentKind::counterexample_scaling: {
      auto p = check_counterexample(r, seed);
      return {[p] { return run_counterexample(p); }};
    }
    case ExperimentKind::lemma_suite: {
      auto p = check_lemmas(r);
      return {[p] { return run_lemmas(p); }};
    }
    case ExperimentKind::uniform_bound: {
      auto p = check_bound(r);
      return {[p] { return run_bound(p); }};
    }
    case ExperimentKind::trilinear_search: {
      auto p = check_trilinear(r);
      return {[p, seed] { return run_trilinear(p, seed); }};
    }
    case ExperimentKind::evolve: {
      auto p = check_evolve(r);
      return {[p, seed] { return run_evolve(p, seed); }};
    }
    case ExperimentKind::picard_vs_splitstep: {
      auto p = check_picard(r);
      return {[p, seed] { return run_picard(p, seed); }};
    }
    case ExperimentKind::continuous_dependence: {
      auto p = check_dependence(r);
      return {[p, seed] { return run_dependence(p, seed); }};
    }
    case ExperimentKind::existence_time: {
      auto p = check_existence(r);
      return {[p, seed] { return run_existence(p, seed); }};
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown experiment");
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (auto&& [key, value] : *t) j[std::string(key.str())] = toml_to_json(value);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (auto&& value : *a) j.push_back(toml_to_json(value));
    return j;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw ValidationError({"unsupported TOML value (dates and times are not parameters)"});
}

ExperimentConfig from_json(const json& doc, std::string source) {
  std::vector<std::string> errs;
  ExperimentConfig cfg;
  cfg.source = std::move(source);
  if (!doc.is_object()) throw ValidationError({"config must be a table"});
  for (const auto& [key, value] : doc.items()) {
    if (key != "experiment" && key != "parameters" && key != "seed" && key != "output_dir") {
      errs.push_back("unknown top-level key '" + key + "'");
    }
  }
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    errs.push_back("experiment must be one of the catalog names");
  } else if (auto kind = parse_kind(doc["experiment"].get<std::string>())) {
    cfg.experiment = *kind;
  } else {
    errs.push_back("unknown experiment '" + doc["experiment"].get<std::string>() + "'");
  }
  if (doc.contains("parameters")) {
    if (doc["parameters"].is_object()) {
      cfg.parameters = doc["parameters"];
    } else {
      errs.push_back("parameters must be a table");
    }
  }
  if (doc.contains("seed")) {
    if (doc["seed"].is_number_unsigned() || (doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
      cfg.seed = doc["seed"].get<std::uint64_t>();
    } else {
      errs.push_back("seed must be a non-negative integer");
    }
  }
  if (doc.contains("output_dir")) {
    if (doc["output_dir"].is_string()) {
      cfg.output_dir = doc["output_dir"].get<std::string>();
    } else {
      errs.push_back("output_dir must be a string");
    }
  }
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return cfg;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::io, "write failed for " + path.string());
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::counterexample_scaling: return "counterexample_scaling";
    case ExperimentKind::lemma_suite: return "lemma_suite";
    case ExperimentKind::uniform_bound: return "uniform_bound";
    case ExperimentKind::trilinear_search: return "trilinear_search";
    case ExperimentKind::evolve: return "evolve";
    case ExperimentKind::picard_vs_splitstep: return "picard_vs_splitstep";
    case ExperimentKind::continuous_dependence: return "continuous_dependence";
    case ExperimentKind::existence_time: return "existence_time";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& e : entries) {
    if (to_string(e.kind) == name || e.subcommand == name) return e.kind;
  }
  return std::nullopt;
}

const std::vector<CatalogEntry>& catalog() { return entries; }

const CatalogEntry& catalog_entry(ExperimentKind kind) {
  for (const auto& e : entries) {
    if (e.kind == kind) return e;
  }
  throw Error(ErrorCode::invalid_argument, "experiment missing from the catalog");
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::invalid_argument, "config rejected:" + join(violations)),
      violations_(std::move(violations)) {}

ExperimentConfig parse_config(std::string_view text, bool is_json) {
  if (is_json) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError({std::string("JSON parse error: ") + e.what()});
    }
    return from_json(doc, std::string(text));
  }
  try {
    const auto table = toml::parse(text);
    return from_json(toml_to_json(table), std::string(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw ValidationError({msg.str()});
  }
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.extension() == ".json");
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError({"override '" + std::string(assignment) + "' is not key=value"});
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &config.parameters;
  std::size_t start = 0;
  for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
    node = &(*node)[key.substr(start, dot - start)];
    if (!node->is_object()) *node = json::object();
    start = dot + 1;
  }
  (*node)[key.substr(start)] = value;
}

json resolved_parameters(const ExperimentConfig& config) {
  json p = defaults(config.experiment);
  p.merge_patch(config.parameters);
  return p;
}

void validate(const ExperimentConfig& config) {
  std::vector<std::string> errs;
  unknown_keys(config.parameters, defaults(config.experiment), "", errs);
  const json params = resolved_parameters(config);
  try {
    prepare(config, params, errs);
  } catch (const json::exception& e) {
    errs.push_back(std::string("malformed parameters: ") + e.what());
  }
  if (config.output_dir.empty()) errs.push_back("output_dir must not be empty");
  if (!errs.empty()) throw ValidationError(std::move(errs));
}

bool ReportBundle::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

int exit_code(const ReportBundle& bundle) {
  if (bundle.incomplete) return 2;
  return bundle.all_pass() ? 0 : 1;
}

ReportBundle run_experiment(const ExperimentConfig& config) {
  validate(config);
  const json params = resolved_parameters(config);
  std::vector<std::string> errs;
  const auto prepared = prepare(config, params, errs);
  Outcome out = prepared.run();

  const fs::path target = fs::absolute(config.output_dir);
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const std::string tag = std::to_string(::getpid());
  const fs::path tmp = parent / ("." + target.filename().string() + ".tmp-" + tag);
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  std::vector<std::string> files;
  for (const auto& t : out.tables) {
    t.write(tmp);
    files.push_back(t.name);
  }
  for (const auto& w : out.writers) w(tmp);
  files.insert(files.end(), out.extra_files.begin(), out.extra_files.end());
  if (!out.plots.empty()) {
    fs::create_directories(tmp / "plotdata");
    for (const auto& path : emit_plotdata(out.plots, tmp / "plotdata")) {
      files.push_back("plotdata/" + path.filename().string());
    }
  }

  const auto& entry = catalog_entry(config.experiment);
  json verdicts = json::array();
  for (const auto& v : out.verdicts) {
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"value", v.value}, {"criterion", v.criterion}});
  }
  ReportBundle bundle;
  bundle.directory = target;
  bundle.verdicts = out.verdicts;
  bundle.incomplete = out.incomplete;
  bundle.summary = {{"experiment", to_string(config.experiment)},
                    {"seed", config.seed},
                    {"claims", {entry.claim}},
                    {"config",
                     {{"source", config.source},
                      {"experiment", to_string(config.experiment)},
                      {"seed", config.seed},
                      {"output_dir", config.output_dir.string()},
                      {"parameters", params}}},
                    {"results", out.results},
                    {"verdicts", verdicts},
                    {"all_pass", bundle.all_pass()},
                    {"incomplete", out.incomplete},
                    {"notes", out.notes},
                    {"files", files}};
  write_text(tmp / "summary.json", bundle.summary.dump(2) + "\n");

  // Swap into place: the previous bundle survives until the new one is complete.
  const fs::path old = parent / ("." + target.filename().string() + ".old-" + tag);
  fs::remove_all(old);
  if (fs::exists(target)) fs::rename(target, old);
  fs::rename(tmp, target);
  fs::remove_all(old);
  return bundle;
}

std::vector<fs::path> emit_plotdata(const std::vector<PlotSeries>& series, const fs::path& directory) {
  require(!series.empty(), ErrorCode::invalid_argument, "plot data needs at least one series");
  std::vector<fs::path> paths;
  std::error_code ec;
  fs::create_directories(directory, ec);
  require(!ec, ErrorCode::io, "cannot create " + directory.string());
  for (const auto& s : series) {
    require(!s.points.empty(), ErrorCode::invalid_argument, "plot series '" + s.name + "' is empty");
    require(!s.name.empty() && s.name.find('/') == std::string::npos, ErrorCode::invalid_argument,
            "plot series needs a file-safe name");
    const fs::path path = directory / (s.name + ".dat");
    std::ostringstream text;
    text << "# series=" << s.name << '\n';
    for (const auto& [k, v] : s.meta) text << "# " << k << '=' << v << '\n';
    for (const auto& [x, y] : s.points) text << fmt(x) << ' ' << fmt(y) << '\n';
    write_text(path, text.str());
    paths.push_back(path);
  }
  return paths;
}

PlotSeries parse_plotdata(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read " + path.string());
  PlotSeries s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      require(eq != std::string::npos, ErrorCode::io, "malformed header line in " + path.string());
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = line.substr(eq + 1);
      if (key == "series") {
        s.name = value;
      } else {
        s.meta[key] = value;
      }
      continue;
    }
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double x = 0.0, y = 0.0;
    row >> x >> y;
    require(static_cast<bool>(row), ErrorCode::io, "malformed data line in " + path.string());
    s.points.emplace_back(x, y);
  }
  return s;
}

}  // namespace xsblab::harness
