#pragma once

#include <vector>

namespace xsblab {

struct ScalingPoint {
  double n = 0.0;
  double value = 0.0;
};

/// Power-law fit value ~ C N^slope by least squares on (ln N, ln value).
struct ScalingReport {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Needs >= 4 points with strictly increasing N and positive values.
ScalingReport fit_scaling_exponent(const std::vector<ScalingPoint>& points);

}  // namespace xsblab
