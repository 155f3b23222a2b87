#include "npca/stats.hpp"

#include <algorithm>
#include <cmath>

#include "npca/errors.hpp"

namespace npca {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  if (p <= 0) return sorted.front();
  if (p >= 1) return sorted.back();
  double h = p * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("box_stats of an empty sample");
  std::sort(samples.begin(), samples.end());
  BoxStats b;
  b.count = static_cast<long long>(samples.size());
  double sum = 0;
  for (double x : samples) sum += x;
  b.mean = sum / static_cast<double>(samples.size());
  b.median = quantile_sorted(samples, 0.5);
  b.q1 = quantile_sorted(samples, 0.25);
  b.q3 = quantile_sorted(samples, 0.75);
  double iqr = b.q3 - b.q1;
  double lo_fence = b.q1 - 1.5 * iqr;
  double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q3;
  b.whisker_high = b.q1;
  bool any_in = false;
  for (double x : samples) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      if (!any_in) {
        b.whisker_low = x;
        any_in = true;
      }
      b.whisker_high = x;
    }
  }
  if (!any_in) {  // degenerate: everything flagged, fall back to the box
    b.whisker_low = b.q1;
    b.whisker_high = b.q3;
  }
  return b;
}

}  // namespace npca
