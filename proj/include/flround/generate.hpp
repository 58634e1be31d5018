#pragma once

#include <cstdint>

#include "flround/core_model.hpp"

namespace flround {

struct EuclideanSpec {
  std::size_t facilities = 5;
  std::size_t clients = 8;
  std::uint64_t seed = 1;
  double box = 100.0;
  double open_lo = 10.0, open_hi = 60.0;
};

// Uniform points in [0, box]^2, distances rounded to 1e-6 and then closed
// under bipartite shortest paths so the rounded matrix stays metric.
// Deterministic in the seed. Throws InvalidInput on empty sizes or a bad
// cost range.
UflInstance generate_euclidean_instance(const EuclideanSpec& spec);

struct TwoStageSpec {
  EuclideanSpec base;
  std::size_t scenarios = 3;
  double client_probability = 0.5;  // each client joins each scenario independently
  double inflation_lo = 1.2, inflation_hi = 2.5;  // f^A = f^I * U(lo, hi)
};

// Scenario probabilities are drawn and normalized; every scenario has at
// least one client.
TwoStageInstance generate_two_stage_instance(const TwoStageSpec& spec);

RobustInstance generate_robust_instance(const EuclideanSpec& spec, int k);

// Enforces c(i,j) <= c(i,j') + c(i',j') + c(i',j) by repeated relaxation.
void metric_closure(UflInstance& inst);

}  // namespace flround
