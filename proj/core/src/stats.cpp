#include "slowsep/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace slowsep::stats {

Summary summarize(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("summarize: no samples");
  Summary s;
  s.count = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

double z_score(double estimate, double theory, double std_error) {
  const double d = estimate - theory;
  if (d == 0.0) return 0.0;
  if (std_error == 0.0) return d > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
  return d / std_error;
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs >= 2 matching points");
  if (!sigma.empty() && sigma.size() != x.size()) throw std::invalid_argument("sigma length mismatch");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = sigma.empty() ? 1.0 : sigma[i];
    if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
    const double w = 1.0 / (s * s);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (det <= 0.0) throw std::invalid_argument("line fit: degenerate abscissae");
  LineFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope_std_error = std::sqrt(sw / det);
  return fit;
}

}  // namespace slowsep::stats
