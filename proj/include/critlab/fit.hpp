#pragma once

#include <utility>
#include <vector>

namespace critlab {

struct ExponentFit {
  std::vector<std::pair<double, double>> points;  // (scale, probability)
  double slope = 0.0;
  double intercept = 0.0;
  double slopeStdErr = 0.0;
};

// Least squares of log(probability) on log(scale). Weights default to uniform.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights = {});

// Same regression with the scale used as-is on the abscissa (rates in time).
ExponentFit fit_log_linear(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights = {});

}  // namespace critlab
