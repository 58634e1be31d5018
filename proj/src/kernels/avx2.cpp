#include "flround/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <cstring>
#include <limits>

#define FLROUND_AVX2 __attribute__((target("avx2")))

namespace flround::kernels::avx2 {

bool available() { return __builtin_cpu_supports("avx2"); }

FLROUND_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) {
    const double t = a * x[i];
    y[i] = y[i] + t;
  }
}

FLROUND_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d t =
        _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, t);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = n4; i < n; ++i) {
    const double t = x[i] * y[i];
    sum = sum + t;
  }
  return sum;
}

FLROUND_AVX2 std::size_t argmin_open(const double* dist,
                                     const std::uint8_t* open,
                                     std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  const __m256d vinf = _mm256_set1_pd(inf);
  __m256d vmin = vinf;
  bool any = false;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    std::uint32_t bytes;
    std::memcpy(&bytes, open + i, 4);
    if (bytes == 0) continue;
    any = true;
    const __m256i wide = _mm256_cvtepu8_epi64(
        _mm_cvtsi32_si128(static_cast<int>(bytes)));
    const __m256d mask = _mm256_castsi256_pd(
        _mm256_cmpgt_epi64(wide, _mm256_setzero_si256()));
    const __m256d d = _mm256_blendv_pd(vinf, _mm256_loadu_pd(dist + i), mask);
    vmin = _mm256_min_pd(vmin, d);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, vmin);
  double best = inf;
  for (double v : lane) best = v < best ? v : best;
  for (std::size_t t = i; t < n; ++t) {
    if (open[t] != 0) {
      any = true;
      if (dist[t] < best) best = dist[t];
    }
  }
  if (!any) return kNoIndex;
  // NaN or all-infinite rows: let the reference decide.
  if (!(best < inf)) return scalar::argmin_open(dist, open, n);
  // The smallest value is known; the first open index holding it wins.
  for (std::size_t t = 0; t < n; ++t) {
    if (open[t] != 0 && dist[t] == best) return t;
  }
  return kNoIndex;
}

}  // namespace flround::kernels::avx2

#else

namespace flround::kernels::avx2 {
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
}  // namespace flround::kernels::avx2

#endif
