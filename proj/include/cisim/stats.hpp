#ifndef CISIM_STATS_HPP
#define CISIM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "cisim/errors.hpp"

namespace cisim {

struct SampleStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double rmse = 0.0;  // versus a supplied reference
  double mad = 0.0;   // median absolute deviation from the sample median
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw EmptyInput("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

inline SampleStats stats(const std::vector<double>& values,
                         double reference = 0.0) {
  if (values.empty()) throw EmptyInput("stats of empty sample");
  const double n = static_cast<double>(values.size());
  SampleStats s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double var = 0.0, se = 0.0;
  for (double v : values) {
    var += (v - s.mean) * (v - s.mean);
    se += (v - reference) * (v - reference);
  }
  s.stderr_ = values.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
  s.rmse = std::sqrt(se / n);
  const double med = median(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    dev[i] = std::abs(values[i] - med);
  s.mad = median(dev);
  return s;
}

}  // namespace cisim

#endif  // CISIM_STATS_HPP
