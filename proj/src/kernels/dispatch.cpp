#include <atomic>
#include <cassert>

#include "flround/kernels.hpp"

namespace flround::kernels {
namespace {

struct Table {
  Isa isa;
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  std::size_t (*argmin_open)(const double*, const std::uint8_t*, std::size_t);
};

constexpr Table kScalar{Isa::kScalar, &scalar::axpy, &scalar::dot,
                        &scalar::argmin_open};
constexpr Table kAvx2{Isa::kAvx2, &avx2::axpy, &avx2::dot, &avx2::argmin_open};
constexpr Table kNeon{Isa::kNeon, &neon::axpy, &neon::dot, &neon::argmin_open};

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      return &kAvx2;
    case Isa::kNeon:
      return &kNeon;
    case Isa::kScalar:
      break;
  }
  return &kScalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{table_for(detect_isa())};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
    case Isa::kScalar:
      break;
  }
  return "scalar";
}

Isa detect_isa() {
  if (avx2::available()) return Isa::kAvx2;
  if (neon::available()) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return current().load()->isa; }

bool select_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2::available()) return false;
  if (isa == Isa::kNeon && !neon::available()) return false;
  current().store(table_for(isa));
  return true;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current().load(std::memory_order_relaxed)->axpy(a, x.data(), y.data(),
                                                  x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return current().load(std::memory_order_relaxed)->dot(x.data(), y.data(),
                                                        x.size());
}

std::size_t argmin_open(std::span<const double> dist,
                        std::span<const std::uint8_t> open) {
  assert(dist.size() == open.size());
  return current().load(std::memory_order_relaxed)->argmin_open(
      dist.data(), open.data(), dist.size());
}

}  // namespace flround::kernels
