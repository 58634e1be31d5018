#include "flround/kernels.hpp"

namespace flround::kernels::scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a * x[i];
    y[i] = y[i] + t;
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double t = x[i + l] * y[i + l];
      lane[l] = lane[l] + t;
    }
  }
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < n; ++i) {
    const double t = x[i] * y[i];
    sum = sum + t;
  }
  return sum;
}

std::size_t argmin_open(const double* dist, const std::uint8_t* open,
                        std::size_t n) {
  std::size_t best = kNoIndex;
  for (std::size_t i = 0; i < n; ++i) {
    if (open[i] != 0 && (best == kNoIndex || dist[i] < dist[best])) best = i;
  }
  return best;
}

}  // namespace flround::kernels::scalar
