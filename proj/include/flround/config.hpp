#pragma once

#include <cstdint>

namespace flround {

// Every numeric tolerance used by the library lives here.
struct Tolerances {
  double feasibility = 1e-7;     // constraint checks on fractional solutions
  double identity = 1e-9;        // exact identities (splitting, Lemma-1, masses)
  double reduced_cost = 1e-9;    // simplex optimality test
  double pivot = 1e-9;           // smallest acceptable pivot element
  double reported = 1e-7;        // primal/dual residuals of a returned LP solution
  double duality_gap = 1e-6;     // relative: |primal - dual| <= gap * (1 + |primal|)
  double comp_slack = 1e-6;
  double snap = 1e-12;           // mass fragments below this are treated as zero
};

inline constexpr Tolerances kTol{};

struct Limits {
  int bland_stall_pivots = 500;             // consecutive degenerate pivots
  std::int64_t robust_scenario_cap = 100000;
  int brute_ufl_max_facilities = 20;
  int brute_two_stage_max_facilities = 12;
  int brute_two_stage_max_scenarios = 8;
  std::int64_t brute_robust_node_budget = 50'000'000;
};

inline constexpr Limits kLimits{};

// Statistical pass criterion: empirical mean <= bound + kSigma * standard error.
inline constexpr double kSigma = 3.0;

}  // namespace flround
