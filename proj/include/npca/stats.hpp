#pragma once

#include <vector>

namespace npca {

// Five-number box summary plus mean. Quartiles interpolate linearly between
// order statistics (the default of R and NumPy); whiskers reach the furthest
// samples within 1.5 IQR of the box.
struct BoxStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
  long long count = 0;
};

// p in [0,1] over a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

BoxStats box_stats(std::vector<double> samples);  // throws ConfigError if empty

}  // namespace npca
