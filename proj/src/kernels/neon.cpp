#include "flround/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <limits>

namespace flround::kernels::neon {

bool available() { return true; }

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), t));
  }
  for (; i < n; ++i) {
    const double t = a * x[i];
    y[i] = y[i] + t;
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  // Lanes {0,1} and {2,3} of the four-lane reference order.
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double sum = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
               (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (std::size_t i = n4; i < n; ++i) {
    const double t = x[i] * y[i];
    sum = sum + t;
  }
  return sum;
}

std::size_t argmin_open(const double* dist, const std::uint8_t* open,
                        std::size_t n) {
  // Narrow rows; the scalar scan is already optimal here.
  return scalar::argmin_open(dist, open, n);
}

}  // namespace flround::kernels::neon

#else

namespace flround::kernels::neon {
bool available() { return false; }
void axpy(double a, const double* x, double* y, std::size_t n) {
  scalar::axpy(a, x, y, n);
}
double dot(const double* x, const double* y, std::size_t n) {
  return scalar::dot(x, y, n);
}
std::size_t argmin_open(const double* d, const std::uint8_t* o,
                        std::size_t n) {
  return scalar::argmin_open(d, o, n);
}
}  // namespace flround::kernels::neon

#endif
