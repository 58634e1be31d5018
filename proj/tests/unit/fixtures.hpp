#pragma once

#include <string>
#include <vector>

#include "flround/core_model.hpp"
#include "flround/rng.hpp"

namespace flround::testing {

inline std::string data_path(const std::string& name) { return std::string(FLROUND_TEST_DATA) + "/" + name; }

// Distances 1 or 3 (metric by construction), openings in [1, 2]. The LPs
// are fractional often enough to exercise the rounding.
inline UflInstance two_distance_ufl(std::uint64_t seed, std::size_t m, std::size_t n, double near = 0.35) {
  Rng rng(derive_seed(seed, 0x7464));
  std::vector<double> open(m);
  for (double& f : open) f = 1.0 + rng.uniform();
  std::vector<std::vector<double>> d(m, std::vector<double>(n));
  for (auto& row : d)
    for (double& v : row) v = rng.bernoulli(near) ? 1.0 : 3.0;
  return UflInstance::from_matrix(open, d);
}

inline TwoStageInstance divergent_instance(double far) {
  TwoStageInstance ts;
  ts.base = UflInstance::from_matrix({2, 0.1}, {{1, 1}, {far, 1}});
  ts.scenarios = {{0.5, {0}, {4, 4}}, {0.5, {1}, {4, 4}}};
  return ts;
}

}  // namespace flround::testing
