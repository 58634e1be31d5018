#include <doctest.h>

#include <cstring>
#include <vector>

#include "flround/kernels.hpp"
#include "flround/rng.hpp"

using namespace flround;
namespace k = flround::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = (rng.uniform() - 0.5) * 1e3;
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// Runs `check` with each instruction set the CPU supports.
template <class F>
void for_each_isa(F&& check) {
  const k::Isa saved = k::active_isa();
  for (k::Isa isa : {k::Isa::kScalar, k::Isa::kAvx2, k::Isa::kNeon}) {
    if (!k::select_isa(isa)) continue;
    CAPTURE(k::isa_name(isa));
    check(isa);
  }
  k::select_isa(saved);
}

}  // namespace

TEST_CASE("dot agrees bit for bit across instruction sets") {
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1001u}) {
    const auto x = noise(n, 11 + n), y = noise(n, 97 + n);
    const double ref = k::scalar::dot(x.data(), y.data(), n);
    for_each_isa([&](k::Isa) { CHECK(same_bits(k::dot(x, y), ref)); });
    if (k::avx2::available()) CHECK(same_bits(k::avx2::dot(x.data(), y.data(), n), ref));
  }
}

TEST_CASE("axpy agrees bit for bit across instruction sets") {
  for (std::size_t n : {0u, 1u, 2u, 5u, 16u, 17u, 333u}) {
    const auto x = noise(n, 5 + n), y0 = noise(n, 6 + n);
    std::vector<double> ref = y0;
    k::scalar::axpy(-1.7, x.data(), ref.data(), n);
    for_each_isa([&](k::Isa) {
      std::vector<double> y = y0;
      k::axpy(-1.7, x, y);
      for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(y[i], ref[i]));
    });
  }
}

TEST_CASE("scalar dot uses four interleaved lanes") {
  // Left to right this sums to 1; pairing the lanes as (l0 + l1) + (l2 + l3)
  // absorbs both ones into the large terms.
  const std::vector<double> x{1.0, 1e17, -1e17, 1.0}, ones(4, 1.0);
  CHECK(k::scalar::dot(x.data(), ones.data(), 4) == 0.0);
  const std::vector<double> tail{1.0, 1e17, -1e17, 1.0, 2.0}, ones5(5, 1.0);
  CHECK(k::scalar::dot(tail.data(), ones5.data(), 5) == 2.0);
}

TEST_CASE("argmin_open takes the lowest index on ties and skips closed entries") {
  const std::vector<double> d{5, 2, 7, 2, 1, 2, 9, 2, 2};
  std::vector<std::uint8_t> open{1, 1, 1, 1, 0, 1, 1, 1, 1};
  for_each_isa([&](k::Isa) {
    CHECK(k::argmin_open(d, open) == 1);
    std::vector<std::uint8_t> none(d.size(), 0);
    CHECK(k::argmin_open(d, none) == k::kNoIndex);
    std::vector<std::uint8_t> last(d.size(), 0);
    last.back() = 1;
    CHECK(k::argmin_open(d, last) == d.size() - 1);
  });
}

TEST_CASE("argmin_open matches the scalar reference on random data") {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng.engine()() % 40;
    std::vector<double> d(n);
    std::vector<std::uint8_t> open(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = static_cast<double>(rng.engine()() % 6);  // plenty of ties
      open[i] = rng.bernoulli(0.6);
    }
    const std::size_t ref = k::scalar::argmin_open(d.data(), open.data(), n);
    for_each_isa([&](k::Isa) { CHECK(k::argmin_open(d, open) == ref); });
  }
}

TEST_CASE("select_isa refuses unsupported instruction sets") {
  const k::Isa saved = k::active_isa();
  CHECK(k::select_isa(k::Isa::kScalar));
  CHECK(k::active_isa() == k::Isa::kScalar);
  if (!k::neon::available()) {
    CHECK_FALSE(k::select_isa(k::Isa::kNeon));
    CHECK(k::active_isa() == k::Isa::kScalar);
  }
  k::select_isa(saved);
  CHECK(k::active_isa() == saved);
  CHECK(k::isa_name(k::detect_isa()).size() > 0);
}
