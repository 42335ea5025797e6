#include "xsblab/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xsblab/error.hpp"
#include "xsblab/spectral.hpp"

namespace xsblab {

namespace {

struct Sum {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;

  void add(const QuadResult& r) {
    value += r.value;
    error += r.error;
    converged = converged && r.converged;
  }
};

LemmaCheck finish(const char* name, const Sum& sum, double ratio_factor, const QuadSpec& quad) {
  if (!sum.converged && sum.error > 10.0 * quad.tolerance * std::abs(sum.value)) {
    throw QuadratureError(std::string(name) + ": quadrature did not reach tolerance", sum.value,
                          sum.error / std::max(std::abs(sum.value), 1e-300));
  }
  LemmaCheck out;
  out.value = sum.value;
  out.error = sum.error;
  out.ratio = sum.value * ratio_factor;
  return out;
}

std::size_t budget(const QuadSpec& quad, std::size_t pieces) {
  return quad.max_refinements * std::max<std::size_t>(pieces, 1);
}

template <typename F>
QuadResult integrate_peaked(F&& f, double lo, double hi, std::initializer_list<double> centres,
                            double width, const QuadSpec& quad) {
  std::vector<double> pts;
  for (double c : centres) quad::geometric_breaks(c, width, lo, hi, pts);
  const auto breaks = quad::finalize_breaks(std::move(pts), lo, hi);
  return quad::adaptive(f, breaks, quad.tolerance, 0.0, budget(quad, breaks.size()));
}

}  // namespace

LemmaCheck check_el1(double a1, double a2, double b, const QuadSpec& quad) {
  quad.validate();
  require(b > 0.5, ErrorCode::invalid_argument, "el1 needs b > 1/2");
  require(std::isfinite(a1) && std::isfinite(a2), ErrorCode::invalid_argument,
          "el1 centres must be finite");
  const double lo_c = std::min(a1, a2);
  const double hi_c = std::max(a1, a2);
  const double reach = std::max(1.0, hi_c - lo_c);
  auto f = [=](double x) { return std::pow(bracket(x - a1) * bracket(x - a2), -2.0 * b); };

  Sum sum;
  sum.add(integrate_peaked(f, lo_c - reach, hi_c + reach, {a1, a2}, 1.0, quad));
  const double decay = 4.0 * b;
  sum.add(quad::tail([&](double s) { return f(hi_c + s); }, reach, decay, quad.tolerance, 0.0,
                     budget(quad, 4)));
  sum.add(quad::tail([&](double s) { return f(lo_c - s); }, reach, decay, quad.tolerance, 0.0,
                     budget(quad, 4)));
  return finish("el1", sum, std::pow(bracket(a1 - a2), 2.0 * b), quad);
}

LemmaCheck check_el2(double a1, double a2, double c1, double c2, const QuadSpec& quad) {
  quad.validate();
  require(c1 > 0.0 && c1 < 1.0 && c2 > 0.0 && c2 < 1.0, ErrorCode::invalid_argument,
          "el2 needs 0 < c1, c2 < 1");
  require(c1 + c2 > 1.0, ErrorCode::invalid_argument, "el2 needs c1 + c2 > 1");
  require(a1 != a2, ErrorCode::invalid_argument, "el2 needs a1 != a2");
  if (a1 > a2) {
    std::swap(a1, a2);
    std::swap(c1, c2);
  }
  const double d = a2 - a1;
  const double w = std::min(0.1, d / 4.0);
  const double reach = std::max(1.0, d);
  auto f = [=](double x) {
    return std::pow(std::abs(x - a1), -c1) * std::pow(std::abs(x - a2), -c2);
  };

  Sum sum;
  // Window |x - a| < w: |x - a|^{-c} h(x) = |x - a|^{-c} h(a) + |x - a|^{-c} (h(x) - h(a)).
  auto window = [&](double a, double c, double other, double c_other) {
    auto h = [=](double x) { return std::pow(std::abs(x - other), -c_other); };
    const double ha = h(a);
    sum.value += ha * 2.0 * std::pow(w, 1.0 - c) / (1.0 - c);
    auto rem = [=](double x) {
      const double r = std::abs(x - a);
      return r == 0.0 ? 0.0 : std::pow(r, -c) * (h(x) - ha);
    };
    const double breaks[] = {a - w, a, a + w};
    sum.add(quad::adaptive(rem, breaks, quad.tolerance, 1e-300, budget(quad, 2)));
  };
  window(a1, c1, a2, c2);
  window(a2, c2, a1, c1);

  sum.add(integrate_peaked(f, a1 - reach, a1 - w, {a1}, w, quad));
  sum.add(integrate_peaked(f, a1 + w, a2 - w, {a1, a2}, w, quad));
  sum.add(integrate_peaked(f, a2 + w, a2 + reach, {a2}, w, quad));
  const double decay = c1 + c2;
  sum.add(quad::tail([&](double s) { return f(a2 + s); }, reach, decay, quad.tolerance, 0.0,
                     budget(quad, 4)));
  sum.add(quad::tail([&](double s) { return f(a1 - s); }, reach, decay, quad.tolerance, 0.0,
                     budget(quad, 4)));
  return finish("el2", sum, std::pow(d, c1 + c2 - 1.0), quad);
}

LemmaCheck check_el3(double a, double c1, double c2, const QuadSpec& quad) {
  quad.validate();
  require(a > 0.0 && std::isfinite(a), ErrorCode::invalid_argument, "el3 needs a > 0");
  require(c1 >= 0.0 && c1 <= c2, ErrorCode::invalid_argument, "el3 needs 0 <= c1 <= c2");
  auto f = [=](double x) { return std::pow(x, c1) * std::pow(bracket(a * x), -c2); };
  LemmaCheck out;
  out.value = f(0.0);
  out.argmax = 0.0;
  const auto per_decade = static_cast<double>(quad.points_per_decade);
  const long steps = static_cast<long>(16 * quad.points_per_decade);
  for (long i = 0; i <= steps; ++i) {
    const double x = std::pow(10.0, -8.0 + static_cast<double>(i) / per_decade);
    const double v = f(x);
    if (v > out.value) {
      out.value = v;
      out.argmax = x;
    }
  }
  out.ratio = out.value * std::pow(a, c1);
  return out;
}

LemmaCheck check_el4(double a, double eta, double b, const QuadSpec& quad) {
  quad.validate();
  require(b > 0.5, ErrorCode::invalid_argument, "el4 needs b > 1/2");
  require(a != 0.0 && eta != 0.0, ErrorCode::invalid_argument, "el4 needs a != 0, eta != 0");
  const double aa = std::abs(a);
  const double e = std::abs(eta);
  auto f = [=](double x) { return std::pow(bracket(aa * (x - e) * (x + e)), -2.0 * b); };
  const double reach = 2.0 * e + 2.0 / std::sqrt(aa);
  const double width = 1.0 / std::max(2.0 * aa * e, std::sqrt(aa));

  Sum half;
  half.add(integrate_peaked(f, 0.0, reach, {e}, width, quad));
  half.add(quad::tail(f, reach, 4.0 * b, quad.tolerance, 0.0, budget(quad, 4)));
  Sum sum;
  sum.value = 2.0 * half.value;
  sum.error = 2.0 * half.error;
  sum.converged = half.converged;
  return finish("el4", sum, aa * e, quad);
}

double ratio_spread(const std::vector<LemmaCheck>& checks) {
  require(!checks.empty(), ErrorCode::invalid_argument, "ratio_spread needs checks");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& c : checks) {
    lo = std::min(lo, c.ratio);
    hi = std::max(hi, c.ratio);
  }
  return hi / lo;
}

}  // namespace xsblab
