#include "xsblab/scaling.hpp"

#include <cmath>
#include <string>

#include "xsblab/error.hpp"

namespace xsblab {

ScalingReport fit_scaling_exponent(const std::vector<ScalingPoint>& points) {
  require(points.size() >= 4, ErrorCode::invalid_argument,
          "scaling fit needs at least 4 points, got " + std::to_string(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(std::isfinite(points[i].value) && points[i].value > 0.0, ErrorCode::invalid_argument,
            "scaling fit needs positive values (point " + std::to_string(i) + ")");
    require(points[i].n > 0.0, ErrorCode::invalid_argument, "scale parameter must be positive");
    if (i > 0) {
      require(points[i].n > points[i - 1].n, ErrorCode::invalid_argument,
              "scale parameters must be strictly increasing");
    }
  }

  const double count = static_cast<double>(points.size());
  double mean_x = 0, mean_y = 0;
  for (const auto& p : points) {
    mean_x += std::log(p.n);
    mean_y += std::log(p.value);
  }
  mean_x /= count;
  mean_y /= count;

  double sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double dx = std::log(p.n) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(p.value) - mean_y);
  }

  ScalingReport report;
  report.points = points;
  report.slope = sxy / sxx;
  report.intercept = mean_y - report.slope * mean_x;

  double rss = 0;
  for (const auto& p : points) {
    const double r = std::log(p.value) - (report.intercept + report.slope * std::log(p.n));
    rss += r * r;
  }
  report.stderr_slope = std::sqrt(rss / (count - 2.0) / sxx);
  return report;
}

}  // namespace xsblab
