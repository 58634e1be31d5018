#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace flround {

// Streaming mean / variance / extrema with the pooled (Chan et al.) merge.
struct RunningMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
    if (x < min) min = x;
    if (x > max) max = x;
  }

  void merge(const RunningMoments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(o.count);
    const double n = n1 + n2;
    const double delta = o.mean - mean;
    mean += delta * (n2 / n);
    m2 += o.m2 + delta * delta * (n1 * n2 / n);
    count += o.count;
    if (o.min < min) min = o.min;
    if (o.max > max) max = o.max;
  }

  // Sample variance; zero for fewer than two observations.
  double variance() const {
    return count > 1 ? (m2 > 0.0 ? m2 : 0.0) / static_cast<double>(count - 1)
                     : 0.0;
  }

  double std_error() const {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

}  // namespace flround
