#include "xsblab/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "xsblab/parallel.hpp"

namespace xsblab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::size_t step_count(double t_final, double dt) {
  if (t_final <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

void check_horizon(double t_final, const SpaceTimeGrid& grid) {
  require(std::isfinite(t_final) && t_final >= 0.0, ErrorCode::invalid_argument,
          "final time must be finite and >= 0");
  require(t_final <= 0.5 * grid.time_span() * (1.0 + 1e-12), ErrorCode::invalid_argument,
          "final time exceeds half the time box");
}

bool all_finite(const std::vector<cplx>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

std::vector<double> symbols(const PhaseParams& params, const SpaceTimeGrid& grid) {
  std::vector<double> phi(grid.nx());
  for (std::size_t k = 0; k < grid.nx(); ++k) phi[k] = phase_symbol(grid.xi(k), params);
  return phi;
}

void rotate(std::vector<cplx>& v, const std::vector<double>& phi, double t) {
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= std::polar(1.0, t * phi[k]);
}

SpatialSpectrum difference(const SpatialSpectrum& a, const SpatialSpectrum& b) {
  SpatialSpectrum d{a.values};
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.values[k];
  return d;
}

/// F^(u) for a state given by its spectrum.
std::vector<cplx> forcing_spectrum(const SpatialSpectrum& u_hat, cplx gamma, Dealias dealias,
                                   const SpaceTimeGrid& grid) {
  return to_spectrum(cubic_nonlinearity(to_field(u_hat, grid), gamma, dealias, grid), grid).values;
}

}  // namespace

void SolveConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::invalid_argument, "dt must be > 0");
  require(picard_max_iters >= 1, ErrorCode::invalid_argument, "picard_max_iters must be >= 1");
  require(std::isfinite(picard_tol) && picard_tol > 0.0, ErrorCode::invalid_argument,
          "picard_tol must be > 0");
  require(std::isfinite(residual_s), ErrorCode::invalid_argument, "residual_s must be finite");
}

void dealias_two_thirds(SpatialSpectrum& u_hat) {
  const std::size_t n = u_hat.values.size();
  const long cut = static_cast<long>(n / 3);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(SpaceTimeGrid::signed_index(k, n)) > cut) u_hat.values[k] = 0.0;
  }
}

SpatialField cubic_nonlinearity(const SpatialField& u, cplx gamma, Dealias dealias,
                                const SpaceTimeGrid& grid) {
  require(u.values.size() == grid.nx(), ErrorCode::dimension_mismatch,
          "field size does not match the grid");
  require(all_finite(u.values), ErrorCode::invalid_argument, "nonlinearity input is not finite");
  const cplx ig = cplx(0.0, 1.0) * gamma;
  auto product = [&](const SpatialField& v) {
    SpatialField out{v.values};
    for (auto& z : out.values) z = ig * std::norm(z) * z;
    return out;
  };
  if (dealias == Dealias::none) return product(u);

  auto u_hat = to_spectrum(u, grid);
  dealias_two_thirds(u_hat);
  auto f_hat = to_spectrum(product(to_field(u_hat, grid)), grid);
  dealias_two_thirds(f_hat);
  return to_field(f_hat, grid);
}

void nonlinear_flow(SpatialField& u, cplx gamma, double h) {
  const double gi = gamma.imag();
  if (std::abs(gi) < 1e-300) {
    for (auto& z : u.values) z *= std::exp(cplx(0.0, -1.0) * gamma * std::norm(z) * h);
    return;
  }
  // |u|^2(h) = m / (1 - 2 gi m h), phase from \int_0^h |u|^2.
  for (auto& z : u.values) {
    const double m = std::norm(z);
    const double arg = -2.0 * gi * m * h;
    if (arg <= -1.0) throw BlowUpError("nonlinear substep crosses the blow-up time", 1.0 / (2.0 * gi * m));
    const double log_term = std::log1p(arg);
    z *= std::exp(cplx(0.0, 1.0) * gamma * log_term / (2.0 * gi));
  }
}

Trajectory splitstep_evolve(const SpatialSpectrum& u0_hat, const SolveConfig& cfg,
                            const PhaseParams& params, const SpaceTimeGrid& grid, double t_final) {
  cfg.validate();
  params.validate();
  check_size(u0_hat, grid);
  check_horizon(t_final, grid);
  require(all_finite(u0_hat.values), ErrorCode::invalid_argument, "initial state is not finite");

  const std::size_t steps = step_count(t_final, cfg.dt);
  const double h = steps == 0 ? cfg.dt : t_final / static_cast<double>(steps);
  const auto phi = symbols(params, grid);

  Trajectory traj{grid, params, h, {}, {}};
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(u0_hat);

  const bool strang = cfg.scheme == SplitScheme::strang;
  const double nl_step = strang ? 0.5 * h : h;
  auto nonlinear = [&](SpatialSpectrum& v, double t_now) {
    auto field = to_field(v, grid);
    try {
      nonlinear_flow(field, params.gamma, nl_step);
    } catch (const BlowUpError& e) {
      throw BlowUpError(e.what(), t_now + e.time_estimate());
    }
    v = to_spectrum(field, grid);
    if (cfg.dealias == Dealias::two_thirds) dealias_two_thirds(v);
  };
  auto max_modulus2 = [&](const SpatialSpectrum& v) {
    double m = 0.0;
    for (const auto& z : to_field(v, grid).values) m = std::max(m, std::norm(z));
    return m;
  };

  SpatialSpectrum v = u0_hat;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t_now = h * static_cast<double>(n);
    nonlinear(v, t_now);
    rotate(v.values, phi, h);
    if (strang) nonlinear(v, t_now + 0.5 * h);
    if (!all_finite(v.values)) {
      const double gi = params.gamma.imag();
      const double m = max_modulus2(traj.states.back());
      const double estimate = gi > 0.0 && m > 0.0 ? t_now + 1.0 / (2.0 * gi * m) : t_now;
      throw BlowUpError("split-step state is no longer finite", estimate);
    }
    traj.times.push_back(h * static_cast<double>(n + 1));
    traj.states.push_back(v);
  }
  return traj;
}

PicardResult picard_iterate(const SpatialSpectrum& u0_hat, const SolveConfig& cfg,
                            const PhaseParams& params, const SpaceTimeGrid& grid, double t_final) {
  cfg.validate();
  params.validate();
  check_size(u0_hat, grid);
  check_horizon(t_final, grid);
  require(all_finite(u0_hat.values), ErrorCode::invalid_argument, "initial state is not finite");

  const std::size_t steps = step_count(t_final, cfg.dt);
  const double h = steps == 0 ? cfg.dt : t_final / static_cast<double>(steps);
  const auto phi = symbols(params, grid);
  const std::size_t nx = grid.nx();

  PicardResult out{Trajectory{grid, params, h, {}, {}}, {}, false};
  auto& traj = out.trajectory;
  for (std::size_t n = 0; n <= steps; ++n) {
    traj.times.push_back(h * static_cast<double>(n));
    traj.states.push_back(free_evolve(u0_hat, traj.times.back(), params, grid));
  }
  if (steps == 0) {
    out.converged = true;
    return out;
  }

  std::vector<cplx> g_prev(nx), g(nx), acc(nx);
  std::size_t rising = 0;
  for (std::size_t iter = 0; iter < cfg.picard_max_iters; ++iter) {
    std::vector<SpatialSpectrum> next(steps + 1);
    next[0] = u0_hat;
    std::fill(acc.begin(), acc.end(), cplx{});
    double residual = 0.0;
    for (std::size_t n = 0; n <= steps; ++n) {
      g = forcing_spectrum(traj.states[n], params.gamma, cfg.dealias, grid);
      rotate(g, phi, -traj.times[n]);
      if (n > 0) {
        for (std::size_t k = 0; k < nx; ++k) acc[k] += 0.5 * h * (g_prev[k] + g[k]);
        next[n].values.resize(nx);
        for (std::size_t k = 0; k < nx; ++k) next[n].values[k] = u0_hat.values[k] - acc[k];
        rotate(next[n].values, phi, traj.times[n]);
        residual = std::max(residual,
                            sobolev_norm(difference(next[n], traj.states[n]), cfg.residual_s, grid));
      }
      std::swap(g_prev, g);
    }
    if (!std::isfinite(residual)) {
      throw ContractionError("Picard iterate is no longer finite", out.residuals);
    }
    out.residuals.push_back(residual);
    traj.states = std::move(next);
    if (residual < cfg.picard_tol) {
      out.converged = true;
      return out;
    }
    const std::size_t r = out.residuals.size();
    rising = r >= 2 && out.residuals[r - 1] >= out.residuals[r - 2] ? rising + 1 : 0;
    if (rising >= 3) {
      std::ostringstream msg;
      msg << "Picard residuals rose for 3 consecutive iterations (last " << residual << ")";
      throw ContractionError(msg.str(), out.residuals);
    }
  }
  return out;
}

DuhamelResult duhamel_apply(const SpaceTimeField& forcing, double t_window, const XsbIndex& idx,
                            const PhaseParams& params, const SpaceTimeGrid& grid) {
  params.validate();
  check_size(forcing, grid);
  require(idx.in_duhamel_range(), ErrorCode::invalid_argument,
          "Duhamel estimate needs -1/2 < b' <= 0 <= b <= b' + 1");
  require(t_window > 0.0 && t_window <= 1.0, ErrorCode::invalid_argument, "T must lie in (0, 1]");
  require(t_window <= 0.25 * grid.time_span(), ErrorCode::invalid_argument,
          "window support 2T does not fit inside half the time box");

  const std::size_t nx = grid.nx();
  const std::size_t nt = grid.nt();
  const double h = grid.dt();
  const auto phi = symbols(params, grid);

  // g_n = e^{-i t_n phi} F^(t_n), integrated from the origin node in both directions.
  std::vector<std::vector<cplx>> g(nt);
  for (std::size_t n = 0; n < nt; ++n) {
    SpatialField row;
    row.values.assign(forcing.values.begin() + static_cast<long>(n * nx),
                      forcing.values.begin() + static_cast<long>((n + 1) * nx));
    g[n] = to_spectrum(row, grid).values;
    rotate(g[n], phi, -grid.t(n));
  }
  std::vector<std::vector<cplx>> acc(nt, std::vector<cplx>(nx));
  const std::size_t n0 = grid.origin_node();
  for (std::size_t n = n0 + 1; n < nt; ++n) {
    for (std::size_t k = 0; k < nx; ++k) acc[n][k] = acc[n - 1][k] + 0.5 * h * (g[n - 1][k] + g[n][k]);
  }
  for (std::size_t n = n0; n-- > 0;) {
    for (std::size_t k = 0; k < nx; ++k) acc[n][k] = acc[n + 1][k] - 0.5 * h * (g[n + 1][k] + g[n][k]);
  }

  const TimeWindow window{TimeWindow::Kind::smooth_bump, t_window};
  DuhamelResult out;
  out.output = SpaceTimeField(nx, nt);
  for (std::size_t n = 0; n < nt; ++n) {
    const double w = window(grid.t(n));
    if (w == 0.0) continue;
    SpatialSpectrum v{acc[n]};
    rotate(v.values, phi, grid.t(n));
    const auto field = to_field(v, grid);
    for (std::size_t j = 0; j < nx; ++j) out.output.at(j, n) = w * field.values[j];
  }

  out.output_norm = xsb_norm(to_spectral_field(out.output, grid), idx.s, idx.b, params, grid);
  out.forcing_norm = xsb_norm(to_spectral_field(forcing, grid), idx.s, idx.b_prime, params, grid);
  const double eps = 1.0 - idx.b + idx.b_prime;
  out.constant = out.forcing_norm > 0.0
                     ? out.output_norm / (std::pow(t_window, eps) * out.forcing_norm)
                     : 0.0;
  return out;
}

ContractionParams contraction_params(double u0_norm, double b, double b_prime, double c_measured) {
  require(u0_norm >= 0.0 && std::isfinite(u0_norm), ErrorCode::invalid_argument,
          "initial norm must be finite and >= 0");
  require(c_measured > 0.0 && std::isfinite(c_measured), ErrorCode::invalid_argument,
          "constant must be > 0");
  ContractionParams p;
  p.eps_contraction = 1.0 - b + b_prime;
  require(p.eps_contraction > 0.0, ErrorCode::invalid_argument, "needs 1 - b + b' > 0");
  p.C_measured = c_measured;
  p.M = 2.0 * c_measured * u0_norm;
  p.T = p.M > 0.0 ? std::pow(1.0 / (2.0 * c_measured * p.M * p.M), 1.0 / p.eps_contraction) : inf;
  return p;
}

std::vector<DependencePoint> continuous_dependence_probe(const SpatialSpectrum& u0_hat,
                                                         const std::vector<double>& deltas,
                                                         double s, const SolveConfig& cfg,
                                                         const PhaseParams& params,
                                                         const SpaceTimeGrid& grid, double t_final,
                                                         std::uint64_t seed) {
  check_size(u0_hat, grid);
  require(!deltas.empty(), ErrorCode::invalid_argument, "delta list is empty");

  SpatialSpectrum dir{std::vector<cplx>(grid.nx())};
  auto rng = substream(seed, 0);
  const long cut = static_cast<long>(grid.nx() / 3);
  for (std::size_t k = 0; k < grid.nx(); ++k) {
    if (std::abs(SpaceTimeGrid::signed_index(k, grid.nx())) <= cut) dir.values[k] = complex_gaussian(rng);
  }
  const double norm = sobolev_norm(dir, s, grid);
  for (auto& z : dir.values) z /= norm;

  // Index 0 is the base trajectory; the perturbed runs are independent.
  auto runs = parallel_map(deltas.size() + 1, [&](std::size_t i) -> std::vector<SpatialSpectrum> {
    if (i > 0 && !(deltas[i - 1] > 0.0)) return {};
    SpatialSpectrum u0 = u0_hat;
    if (i > 0) {
      for (std::size_t k = 0; k < u0.values.size(); ++k) u0.values[k] += deltas[i - 1] * dir.values[k];
    }
    return splitstep_evolve(u0, cfg, params, grid, t_final).states;
  });

  std::vector<DependencePoint> out;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    DependencePoint p;
    p.delta = deltas[i];
    const auto& pert = runs[i + 1];
    if (pert.empty()) {
      p.skipped = true;
      out.push_back(p);
      continue;
    }
    double sup = 0.0;
    for (std::size_t n = 0; n < pert.size(); ++n) {
      sup = std::max(sup, sobolev_norm(difference(pert[n], runs[0][n]), s, grid));
    }
    p.ratio = sup / p.delta;
    out.push_back(p);
  }
  return out;
}

ExistenceReport existence_time_probe(const SpatialSpectrum& u0_shape,
                                     const std::vector<double>& lambdas, double s, double b,
                                     double b_prime, const SolveConfig& cfg,
                                     const PhaseParams& params, const SpaceTimeGrid& grid,
                                     double c_measured, std::size_t bisection_steps) {
  check_size(u0_shape, grid);
  require(!lambdas.empty(), ErrorCode::invalid_argument, "lambda list is empty");
  require(std::is_sorted(lambdas.begin(), lambdas.end()) && lambdas.front() > 0.0,
          ErrorCode::invalid_argument, "lambdas must be positive and increasing");
  const double eps = 1.0 - b + b_prime;
  require(eps > 0.0, ErrorCode::invalid_argument, "needs 1 - b + b' > 0");

  ExistenceReport report;
  report.theory_slope = -2.0 / eps;
  const double ceiling = 0.5 * grid.time_span();
  const double shape_norm = sobolev_norm(u0_shape, s, grid);

  report.points = parallel_map(lambdas.size(), [&](std::size_t i) {
    ExistencePoint p;
    p.lambda = lambdas[i];
    SpatialSpectrum u0 = u0_shape;
    for (auto& z : u0.values) z *= p.lambda;
    p.t_floor = contraction_params(p.lambda * shape_norm, b, b_prime, c_measured).T;

    auto contracts = [&](double t) {
      SolveConfig local = cfg;
      local.dt = std::min(cfg.dt, t / 8.0);
      try {
        const auto r = picard_iterate(u0, local, params, grid, t);
        if (!r.converged) return false;
        for (std::size_t k = 1; k < r.residuals.size(); ++k) {
          if (!(r.residuals[k] < r.residuals[k - 1])) return false;
        }
        return true;
      } catch (const Error&) {
        return false;
      }
    };

    if (contracts(ceiling)) {
      p.t_observed = ceiling;
      p.censored = true;
      return p;
    }
    double hi = ceiling;
    double lo = ceiling;
    bool bracketed = false;
    for (int k = 0; k < 40; ++k) {
      lo *= 0.5;
      if (contracts(lo)) {
        bracketed = true;
        break;
      }
      hi = lo;
    }
    if (!bracketed) {
      p.exhausted = true;
      return p;
    }
    for (std::size_t k = 0; k < bisection_steps; ++k) {
      const double mid = std::sqrt(lo * hi);
      (contracts(mid) ? lo : hi) = mid;
    }
    p.t_observed = lo;
    return p;
  });

  std::vector<ScalingPoint> pts;
  for (const auto& p : report.points) {
    if (!p.exhausted && p.t_observed < p.t_floor) report.floor_respected = false;
    if (!p.censored && !p.exhausted) pts.push_back({p.lambda, p.t_observed});
  }
  if (pts.size() >= 4) report.fit = fit_scaling_exponent(pts);
  return report;
}

void write_trajectory_csv(const Trajectory& traj, double s, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path.string());
  out.precision(17);
  out << "t,l2,hs\n";
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    out << traj.times[n] << ',' << l2_norm(traj.states[n], traj.grid) << ','
        << sobolev_norm(traj.states[n], s, traj.grid) << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::io, "write failed for " + path.string());
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4] = {};
  in.read(reinterpret_cast<char*>(bytes), 4);
  require(static_cast<bool>(in), ErrorCode::io, "truncated trajectory dump");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

constexpr char magic[4] = {'X', 'S', 'B', 'T'};
constexpr std::uint32_t dump_version = 1;

}  // namespace

void write_trajectory_binary(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path.string());
  out.write(magic, 4);
  put_u32(out, dump_version);
  put_u32(out, static_cast<std::uint32_t>(traj.grid.nx()));
  put_u32(out, static_cast<std::uint32_t>(traj.states.size()));
  for (const auto& state : traj.states) {
    for (const auto& z : to_field(state, traj.grid).values) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
    }
  }
  require(static_cast<bool>(out), ErrorCode::io, "write failed for " + path.string());
}

BinaryDump read_trajectory_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  char head[4] = {};
  in.read(head, 4);
  require(static_cast<bool>(in) && std::equal(head, head + 4, magic), ErrorCode::io,
          "not a trajectory dump: " + path.string());
  BinaryDump dump;
  dump.version = get_u32(in);
  require(dump.version == dump_version, ErrorCode::io, "unsupported dump version");
  dump.nx = get_u32(in);
  dump.rows = get_u32(in);
  const std::size_t count = static_cast<std::size_t>(dump.nx) * dump.rows;
  dump.values.resize(count);
  for (auto& z : dump.values) {
    const float re = std::bit_cast<float>(get_u32(in));
    const float im = std::bit_cast<float>(get_u32(in));
    z = {re, im};
  }
  return dump;
}

}  // namespace xsblab
