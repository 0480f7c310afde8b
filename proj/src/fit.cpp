#include "critlab/fit.hpp"

#include <cmath>
#include <set>
#include <string>

#include "critlab/errors.hpp"

namespace critlab {

namespace {

ExponentFit regress(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights,
                    bool logScale) {
  require(points.size() >= 3, "fit needs at least 3 points");
  require(weights.empty() || weights.size() == points.size(), "one weight per point");
  std::set<double> scales;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [x, y] = points[i];
    if (!(y > 0.0) || !std::isfinite(y))
      throw PreconditionError("nonpositive probability at point " + std::to_string(i) + " (scale " +
                              std::to_string(x) + ", probability " + std::to_string(y) + ")");
    if (logScale && !(x > 0.0)) throw PreconditionError("nonpositive scale at point " + std::to_string(i));
    scales.insert(x);
  }
  require(scales.size() == points.size(), "fit needs distinct scales");

  const std::size_t n = points.size();
  double sw = 0, sx = 0, sy = 0;
  std::vector<double> xs(n), ys(n), ws(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = logScale ? std::log(points[i].first) : points[i].first;
    ys[i] = std::log(points[i].second);
    ws[i] = weights.empty() ? 1.0 : weights[i];
    require(ws[i] > 0.0, "weights must be positive");
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
  }
  ExponentFit fit;
  fit.points = points;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += ws[i] * r * r;
  }
  // weights are relative unless they are inverse variances; residual scale covers both
  fit.slopeStdErr = std::sqrt(rss / double(n - 2) / sxx);
  return fit;
}

}  // namespace

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights) {
  return regress(points, weights, true);
}

ExponentFit fit_log_linear(const std::vector<std::pair<double, double>>& points, const std::vector<double>& weights) {
  return regress(points, weights, false);
}

}  // namespace critlab
