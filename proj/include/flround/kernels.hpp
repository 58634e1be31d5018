#pragma once

// Data-parallel inner loops shared by the simplex and the Monte Carlo trials.
//
// Each kernel has a scalar reference implementation and SIMD variants that
// produce bit-identical results: no fused multiply-add anywhere, and `dot`
// accumulates in four interleaved lanes (element i goes to lane i % 4, the
// tail is added afterwards) so that the vector and scalar paths perform the
// same floating-point operations in the same order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace flround::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

// Best instruction set supported by the running CPU.
Isa detect_isa();

// Instruction set currently used by the dispatching entry points.
Isa active_isa();

// Switches the dispatch table. Returns false (and changes nothing) when the
// CPU cannot execute `isa`.
bool select_isa(Isa isa);

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> x, std::span<const double> y);

// Index of the smallest dist[i] with open[i] != 0; ties go to the lowest
// index. kNoIndex when nothing is open.
std::size_t argmin_open(std::span<const double> dist,
                        std::span<const std::uint8_t> open);

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
std::size_t argmin_open(const double* dist, const std::uint8_t* open,
                        std::size_t n);
}  // namespace scalar

namespace avx2 {
bool available();
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
std::size_t argmin_open(const double* dist, const std::uint8_t* open,
                        std::size_t n);
}  // namespace avx2

namespace neon {
bool available();
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
std::size_t argmin_open(const double* dist, const std::uint8_t* open,
                        std::size_t n);
}  // namespace neon

}  // namespace flround::kernels
