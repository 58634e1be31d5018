#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flround/core_model.hpp"
#include "flround/lp.hpp"
#include "flround/rng.hpp"
#include "flround/stats.hpp"

namespace flround {

// k + 5 + 4/k
double robust_gamma(int k);
inline double oblivious_gamma(int k) { return k + 1.5; }

// Radius of the (k+1)/gamma prefix relative to C_(j,A):
// max(gamma/3, gamma/(gamma - k - 1)).
double robust_radius_factor(double gamma, int k);

enum class RequirementCase { kDeterministic, kBlocks };

// Part of one facility's usage interval [lo, hi) placed in a block.
struct BlockPart {
  std::size_t facility = 0;
  double lo = 0.0, hi = 0.0;
};

struct Requirement {
  std::size_t client = 0;
  std::size_t scenario = 0;
  RequirementCase kind = RequirementCase::kBlocks;
  std::vector<std::size_t> prefix;  // by (distance, index), up to the threshold facility
  double prefix_mass = 0.0;         // x* over the prefix
  double radius = 0.0;              // distance of the threshold facility
  double C = 0.0;
  double radius_bound = 0.0;
  std::size_t deterministic = static_cast<std::size_t>(-1);  // Case 1: a prefix facility with ybar = 1
  std::vector<std::vector<BlockPart>> blocks;                // Case 2: k + 1 unit blocks
  std::vector<double> block_radius;
};

struct RequirementSet {
  int k = 0;
  double gamma = 0.0;
  std::vector<double> ybar;           // min(1, gamma y*)
  std::vector<char> capped;           // ybar == 1
  std::vector<Requirement> requirements;
  std::size_t deterministic_count = 0;
};

// One requirement per (client, scenario). Throws GuaranteeViolation if a
// prefix radius exceeds its bound or a Case-2 prefix has scaled mass < k+1.
RequirementSet build_requirements(const RobustInstance& inst, const RobustFractional& frac, double gamma);

// Empty when the Case-2 blocks are disjoint, unit-mass and inside the bound.
std::string check_requirements(const RobustInstance& inst, const RequirementSet& reqs);

struct RobustPiece {
  std::size_t facility = 0;
  double lo = 0.0, hi = 0.0;
  double ybar() const { return hi - lo; }
};

struct BlockCluster {
  std::size_t requirement = 0, block = 0;
  std::vector<std::size_t> pieces;
  double radius = 0.0;
};

// Block clustering of all Case-2 blocks, fixed before any trial.
struct BlockPlan {
  const RobustInstance* inst = nullptr;
  RequirementSet reqs;
  std::vector<RobustPiece> pieces;
  std::vector<std::vector<std::vector<std::size_t>>> block_pieces;  // [r][b]
  std::vector<BlockCluster> clusters;
  std::vector<long> cluster_of_piece;
  std::vector<std::size_t> unclustered;
  static constexpr std::size_t kUncovered = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> block_cluster;  // [r][b], kUncovered when the block found no cluster
  std::size_t uncovered_blocks = 0;
  std::vector<char> structural_open;  // opened with probability 1 for uncovered blocks

  static BlockPlan prepare(const RobustInstance& inst, RequirementSet reqs);
};

std::string check_block_plan(const BlockPlan& plan);

struct RoundOutcome {
  std::vector<std::uint8_t> open;  // per original facility
  std::vector<std::uint8_t> piece_open;
  std::size_t trial_fallback_opens = 0;
};

// One dependent-rounding trial. Capped facilities and structural fallbacks
// open with probability 1; each cluster opens exactly one piece; other
// pieces open independently. Requirements still short of k+1 distinct open
// facilities within 3x radius get the cheapest unopened prefix facilities.
// Throws GuaranteeViolation if the guarantee fails afterwards.
RoundOutcome dependent_round_blocks(const BlockPlan& plan, Rng& rng);
RoundOutcome dependent_round_blocks(const BlockPlan& plan, std::uint64_t seed);

struct AdversaryResult {
  std::vector<std::size_t> closed;
  double opening = 0.0;
  double connection = 0.0;
  double cost = 0.0;
};

// Exhaustive over k-subsets of the open facilities; ties keep the
// lexicographically first subset. Throws InvalidInput when clients exist
// and at most k facilities are open.
AdversaryResult adversary_worst_case(const RobustInstance& inst, const std::vector<std::uint8_t>& open);

struct RobustTrialStats {
  std::int64_t trials = 0;
  RunningMoments cost, opening, connection, ratio;
  std::int64_t ratio_violations = 0;  // cost > gamma * LP
  std::int64_t fallback_trials = 0;   // trials with a per-trial fallback
  std::int64_t fallback_opens = 0;
  std::vector<std::int64_t> facility_open;
  std::vector<std::int64_t> piece_open;
  std::vector<double> trial_cost;  // in trial order
  std::vector<std::int64_t> trial_fallback;

  void merge(const RobustTrialStats& o);
};

struct RobustRun {
  double gamma = 0.0;
  double lp = 0.0;
  BlockPlan plan;
  RobustTrialStats stats;
};

RobustRun round_robust(const RobustInstance& inst, const RobustFractional& frac, std::size_t trials,
                       std::uint64_t seed, double gamma = 0.0, unsigned threads = 0);

struct ObliviousStats {
  std::int64_t trials = 0;
  // [scenario][client]
  std::vector<std::vector<RunningMoments>> conn;
  std::int64_t backup_violations = 0;
  std::vector<std::int64_t> scenario_backup_violations;
  std::int64_t fallback_opens = 0;

  void merge(const ObliviousStats& o);
};

struct ObliviousRun {
  double gamma = 0.0;
  BlockPlan plan;
  ObliviousStats stats;
  std::vector<std::vector<double>> C;  // [scenario][client]
  // Pairs with gamma x* >= 1 somewhere but no such facility within gamma * C
  // (the averaging branch).
  std::size_t otherwise_pairs = 0;
  // (1 - e^-gamma) + e^-gamma * 3 * radius factor
  double analytic_factor = 0.0;
};

// Every scenario is treated as fixed in advance and evaluated on the same
// trials; a client connects to its nearest open facility outside the
// scenario. Throws InvalidInput unless gamma > k + 1.
ObliviousRun round_oblivious(const RobustInstance& inst, const RobustFractional& frac, double gamma,
                             std::size_t trials, std::uint64_t seed, unsigned threads = 0);

struct GapInstance {
  std::size_t n = 0;
  int k = 0;
  RobustInstance instance;
  double lp_value() const { return static_cast<double>(n) / static_cast<double>(n - k); }
  double ip_value() const { return k + 1.0; }
  double ratio() const { return ip_value() / lp_value(); }
};

// Single client, n unit-cost facilities at distance 0. Throws InvalidInput
// unless n > k >= 1.
GapInstance gap_instance(std::size_t n, int k);

}  // namespace flround
