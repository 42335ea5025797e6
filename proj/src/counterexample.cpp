#include "xsblab/counterexample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "xsblab/error.hpp"
#include "xsblab/parallel.hpp"

namespace xsblab {
namespace {

// 4-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 4> gl_nodes{-0.8611363115940526, -0.3399810435848563,
                                         0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> gl_weights{0.3478548451374538, 0.6521451548625461,
                                           0.6521451548625461, 0.3478548451374538};

template <typename Fn>
double gauss_legendre(Fn&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0;
  for (std::size_t i = 0; i < gl_nodes.size(); ++i) sum += gl_weights[i] * f(mid + half * gl_nodes[i]);
  return sum * half;
}

// Primitive of the triangle density max(0, 2 - |w|) of sigma1 + sigma2.
double triangle_primitive(double x) {
  if (x <= -2.0) return 0.0;
  if (x <= 0.0) return 0.5 * (x + 2.0) * (x + 2.0);
  if (x < 2.0) return 4.0 - 0.5 * (2.0 - x) * (2.0 - x);
  return 4.0;
}

// area{(s1, s2) in [-1,1]^2 : |s1 + s2 - c| <= 1}
double modulation_overlap(double c) { return triangle_primitive(c + 1.0) - triangle_primitive(c - 1.0); }

// Real roots of a x^2 + b x + c inside (lo, hi).
void roots_inside(double a, double b, double c, double lo, double hi, std::vector<double>& out) {
  auto keep = [&](double r) {
    if (std::isfinite(r) && r > lo && r < hi) out.push_back(r);
  };
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return;
  if (std::abs(a) <= 1e-14 * scale) {
    if (b != 0.0) keep(-c / b);
    return;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  keep(q / a);
  if (q != 0.0) keep(c / q);
}

struct RescaledSlab {
  double n;
  double width;  // N^{-1/2}
  double alpha;
  double beta;

  // K(u1, u2) = K1 + kappa u2 with K1 = 2 alpha + 3 beta (2N + width u1).
  double k1(double u1) const { return 2.0 * alpha + 3.0 * beta * (2.0 * n + width * u1); }
  double kappa() const { return 3.0 * beta * width; }
  // Resonance in rescaled coordinates, -(xi1 - w)(xi2 - w) K.
  double resonance(double u1, double u2, double v) const {
    return -(u1 - v) * (u2 - v) * (k1(u1) + kappa() * u2) / n;
  }
};

// \int du2 A(c(u2)) over the admissible u2 interval, for fixed u1.
double inner_overlap_integral(const RescaledSlab& slab, double u1, double v, double sigma) {
  const double lo = std::max(0.0, v - u1);
  const double hi = std::min(1.0, v + 1.0 - u1);
  if (hi <= lo) return 0.0;
  const double d = u1 - v;
  const double k1 = slab.k1(u1);
  const double kappa = slab.kappa();
  auto c_of = [&](double u2) { return sigma + d * (u2 - v) * (k1 + kappa * u2) / slab.n; };

  std::vector<double> cuts{lo, hi};
  if (d != 0.0) {
    const double qa = d * kappa / slab.n;
    const double qb = d * (k1 - kappa * v) / slab.n;
    const double qc0 = -d * k1 * v / slab.n + sigma;
    for (double kink : {-3.0, -1.0, 1.0, 3.0}) roots_inside(qa, qb, qc0 - kink, lo, hi, cuts);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += gauss_legendre([&](double u2) { return modulation_overlap(c_of(u2)); }, cuts[i],
                            cuts[i + 1]);
  }
  return total;
}

double tensor_convolution(const RescaledSlab& slab, double v, double sigma, std::size_t panels) {
  std::vector<double> cuts;
  for (std::size_t p = 0; p <= panels; ++p) cuts.push_back(static_cast<double>(p) / static_cast<double>(panels));
  for (double special : {v, v - 1.0, v + 1.0}) {
    if (special > 0.0 && special < 1.0) cuts.push_back(special);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += gauss_legendre([&](double u1) { return inner_overlap_integral(slab, u1, v, sigma); },
                            cuts[i], cuts[i + 1]);
  }
  // dxi1 dxi2 = N^{-1} du1 du2
  return total / slab.n;
}

RescaledSlab rescaled(const BumpSet& bump) {
  return RescaledSlab{bump.n, bump.width(), bump.params.alpha, bump.params.beta};
}

}  // namespace

double BumpSet::width() const { return 1.0 / std::sqrt(n); }

BumpSet build_bump(double n, std::size_t n_xi, std::size_t n_sigma, const PhaseParams& params) {
  params.validate();
  require(std::isfinite(n) && n >= 4.0, ErrorCode::invalid_argument,
          "bump scale N must be >= 4");
  require(n_xi >= 64 && n_sigma >= 64, ErrorCode::invalid_argument,
          "bump resolution must be at least 64 x 64");
  BumpSet bump;
  bump.n = n;
  bump.params = params;
  bump.n_xi = n_xi;
  bump.n_sigma = n_sigma;
  const double width = bump.width();
  const double dxi = width / static_cast<double>(n_xi);
  const double dsigma = 2.0 / static_cast<double>(n_sigma);
  bump.samples.reserve(n_xi * n_sigma);
  for (std::size_t i = 0; i < n_xi; ++i) {
    const double xi = n + (static_cast<double>(i) + 0.5) * dxi;
    for (std::size_t j = 0; j < n_sigma; ++j) {
      const double sigma = -1.0 + (static_cast<double>(j) + 0.5) * dsigma;
      bump.samples.push_back({xi, sigma, dxi * dsigma});
    }
  }
  double measure = 0;
  for (const auto& sample : bump.samples) measure += sample.weight;
  bump.measure = measure;
  return bump;
}

double bump_xsb_norm(const BumpSet& bump, double s, double b) {
  double sum = 0;
  for (const auto& sample : bump.samples) {
    sum += sample.weight * std::pow(bracket(sample.xi), 2.0 * s) *
           std::pow(bracket(sample.sigma), 2.0 * b);
  }
  return std::sqrt(sum);
}

double TargetLattice::v(std::size_t i) const { return v_min + (static_cast<double>(i) + 0.5) * dv(); }

double TargetLattice::sigma(std::size_t j) const {
  return -sigma_max + (static_cast<double>(j) + 0.5) * dsigma();
}

TargetLattice support_lattice(const BumpSet& bump, std::size_t n_v, std::size_t n_sigma) {
  require(n_v >= 8 && n_sigma >= 8, ErrorCode::invalid_argument, "target lattice too coarse");
  const double width = bump.width();
  // |xi_i - w| <= 2 N^{-1/2} and xi1 + xi2 <= 2N + 2 N^{-1/2} on the support.
  const double k_max = 2.0 * std::abs(bump.params.alpha) +
                       3.0 * std::abs(bump.params.beta) * (2.0 * bump.n + 2.0 * width);
  const double resonance_max = 4.0 * width * width * k_max;
  TargetLattice lattice;
  lattice.n_v = n_v;
  lattice.n_sigma = n_sigma;
  lattice.v_min = -1.0;
  lattice.v_max = 2.0;
  lattice.sigma_max = 3.0 + resonance_max;
  return lattice;
}

double triple_convolution_at(const BumpSet& bump, double xi, double sigma, std::size_t panels) {
  const double v = (xi - bump.n) / bump.width();
  return tensor_convolution(rescaled(bump), v, sigma, std::max<std::size_t>(panels, 1));
}

ConvolutionResult triple_convolution(const BumpSet& bump, const TargetLattice& lattice,
                                     const ConvolutionOptions& options) {
  const RescaledSlab slab = rescaled(bump);
  ConvolutionResult result;
  result.lattice = lattice;
  result.n = bump.n;
  result.width = bump.width();
  const std::size_t count = lattice.n_v * lattice.n_sigma;
  result.values.assign(count, 0.0);
  result.std_errors.assign(count, 0.0);

  if (options.method == ConvolutionMethod::tensor_grid) {
    auto rows = parallel_map(lattice.n_sigma, [&](std::size_t j) {
      std::vector<double> row(lattice.n_v);
      for (std::size_t i = 0; i < lattice.n_v; ++i) {
        row[i] = tensor_convolution(slab, lattice.v(i), lattice.sigma(j), options.panels);
      }
      return row;
    });
    for (std::size_t j = 0; j < lattice.n_sigma; ++j) {
      std::copy(rows[j].begin(), rows[j].end(), result.values.begin() + j * lattice.n_v);
    }
  } else {
    // Jittered stratified samples of (u1, u2, s1, s2) in [0,1]^2 x [-1,1]^2,
    // shared by every target.
    const std::size_t m = std::max<std::size_t>(options.strata_per_dim, 1);
    const std::size_t total = m * m * m * m;
    std::vector<std::array<double, 4>> points(total);
    auto rng = substream(options.seed, static_cast<std::uint64_t>(bump.n * 1024.0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double cell = 1.0 / static_cast<double>(m);
    std::size_t idx = 0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t c = 0; c < m; ++c)
          for (std::size_t d = 0; d < m; ++d) {
            points[idx++] = {(static_cast<double>(a) + unit(rng)) * cell,
                             (static_cast<double>(b) + unit(rng)) * cell,
                             -1.0 + 2.0 * (static_cast<double>(c) + unit(rng)) * cell,
                             -1.0 + 2.0 * (static_cast<double>(d) + unit(rng)) * cell};
          }
    const double volume = 4.0 / slab.n;
    auto rows = parallel_map(lattice.n_sigma, [&](std::size_t j) {
      std::vector<std::pair<double, double>> row(lattice.n_v);
      const double sigma = lattice.sigma(j);
      for (std::size_t i = 0; i < lattice.n_v; ++i) {
        const double v = lattice.v(i);
        std::size_t hits = 0;
        for (const auto& p : points) {
          const double u3 = p[0] + p[1] - v;
          if (u3 < 0.0 || u3 > 1.0) continue;
          const double s3 = p[2] + p[3] - sigma + slab.resonance(p[0], p[1], v);
          if (std::abs(s3) <= 1.0) ++hits;
        }
        const double frac = static_cast<double>(hits) / static_cast<double>(total);
        row[i] = {volume * frac,
                  volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(total))};
      }
      return row;
    });
    for (std::size_t j = 0; j < lattice.n_sigma; ++j) {
      for (std::size_t i = 0; i < lattice.n_v; ++i) {
        result.values[j * lattice.n_v + i] = rows[j][i].first;
        result.std_errors[j * lattice.n_v + i] = rows[j][i].second;
      }
    }
  }

  const double cell = result.cell_area();
  double mass = 0, peak = 0;
  for (double v : result.values) {
    mass += v * cell;
    peak = std::max(peak, v);
  }
  result.total_mass = mass;
  result.max_value = peak;

  double region_sum = 0, region_var = 0;
  std::size_t region_cells = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (result.values[k] >= 0.5 * peak && peak > 0.0) {
      ++region_cells;
      region_sum += result.values[k];
      region_var += result.std_errors[k] * result.std_errors[k];
    }
  }
  result.half_max_area = static_cast<double>(region_cells) * cell;
  result.half_max_relative_error = region_sum > 0.0 ? std::sqrt(region_var) / region_sum : 1.0;
  result.insufficient_sampling =
      options.method == ConvolutionMethod::monte_carlo && result.half_max_relative_error > 0.05;
  return result;
}

double convolution_xsb_norm(const ConvolutionResult& conv, double s, double b_minus_one) {
  const auto& lattice = conv.lattice;
  double sum = 0;
  for (std::size_t i = 0; i < lattice.n_v; ++i) {
    const double xi = conv.n + conv.width * lattice.v(i);
    const double spatial = std::pow(bracket(xi), 2.0 * s);
    for (std::size_t j = 0; j < lattice.n_sigma; ++j) {
      const double value = conv.at(i, j);
      if (value == 0.0) continue;
      sum += spatial * std::pow(bracket(lattice.sigma(j)), 2.0 * b_minus_one) * value * value;
    }
  }
  return std::sqrt(sum * conv.cell_area());
}

std::vector<CounterexampleRatio> counterexample_ratios(double n, const std::vector<double>& s_values,
                                                       double b,
                                                       const CounterexampleResolution& resolution,
                                                       const PhaseParams& params) {
  const BumpSet bump = build_bump(n, resolution.n_xi, resolution.n_sigma, params);
  const TargetLattice lattice = support_lattice(bump, resolution.target_v, resolution.target_sigma);
  const ConvolutionResult conv = triple_convolution(bump, lattice, resolution.convolution);
  std::vector<CounterexampleRatio> out;
  out.reserve(s_values.size());
  for (double s : s_values) {
    CounterexampleRatio r;
    r.n = n;
    r.num = convolution_xsb_norm(conv, s, b - 1.0);
    r.den = std::pow(bump_xsb_norm(bump, s, b), 3.0);
    r.ratio = r.num / r.den;
    r.total_mass = conv.total_mass;
    r.expected_mass = std::pow(bump.measure, 3.0);
    r.half_max_area = conv.half_max_area;
    r.insufficient_sampling = conv.insufficient_sampling;
    out.push_back(r);
  }
  return out;
}

CounterexampleRatio counterexample_ratio(double n, double s, double b,
                                         const CounterexampleResolution& resolution,
                                         const PhaseParams& params) {
  return counterexample_ratios(n, {s}, b, resolution, params).front();
}

}  // namespace xsblab
