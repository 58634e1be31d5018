#pragma once

#include <cstdint>
#include <vector>

#include "flround/core_model.hpp"

namespace flround {

// Exact optimum by enumerating all nonempty open sets; each client goes to
// its nearest open facility (lowest index on ties). Throws CapExceeded above
// kLimits.brute_ufl_max_facilities.
IntegralUflSolution brute_force_ufl(const UflInstance& inst);

struct TwoStageOptimum {
  double cost = 0.0;
  std::vector<std::size_t> first_stage;                // facility indices
  std::vector<std::vector<std::size_t>> second_stage;  // per scenario
};

// Exact expected optimum. For a fixed stage-I set S the best stage-II set of
// scenario A is a superset-minimum of f^A(U) + conn_A(U), shifted by f^A(S),
// so every scenario costs one O(m 2^m) transform.
TwoStageOptimum brute_force_two_stage(const TwoStageInstance& inst);

struct RobustOptimum {
  double cost = 0.0;
  std::vector<std::size_t> open;
  std::int64_t nodes = 0;
};

// Exact min over open sets of opening + worst k-closure connection. Depth
// first over facilities; a node is pruned with its committed opening cost,
// the cheapest completion to k+1 facilities, and the connection forced by
// one adversary per client on the largest reachable open set (the worst
// connection never grows when facilities are added). Throws CapExceeded
// when kLimits.brute_robust_node_budget nodes are exceeded.
RobustOptimum brute_force_robust(const RobustInstance& inst);

}  // namespace flround
