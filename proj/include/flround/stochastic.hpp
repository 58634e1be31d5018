#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "flround/core_model.hpp"
#include "flround/lp.hpp"
#include "flround/rng.hpp"
#include "flround/stats.hpp"

namespace flround {

// Scaled two-stage solution with each pair's demand divided between the
// stage-I copy and the stage-II copy of every facility.
struct StageSplit {
  double scale = 2.0;
  std::vector<double> ybar_first;                // [i]
  std::vector<std::vector<double>> ybar_second;  // [a][i]
  std::vector<std::vector<double>> x_first;      // [a][jl * m + i], min(xbar, ybar_i)
  std::vector<std::vector<double>> x_second;     // [a][jl * m + i], the rest
  std::vector<std::vector<char>> first_served;   // [a][jl]
};

StageSplit split_stage_assignments(const TwoStageInstance& inst, const TwoStageFractional& frac, double scale);

// Empty when every pair is first-stage served or has stage-II mass > 1.
std::string check_stage_split(const TwoStageInstance& inst, const StageSplit& split);

inline constexpr double kNoRadius = std::numeric_limits<double>::infinity();

struct PairCandidate {
  std::size_t scenario = 0;
  std::size_t jl = 0;      // position in the scenario's client list
  int stage = 0;           // 0: stage-I candidate, 1: stage-II candidate
  std::vector<double> amount;  // per facility, prefix mass used by the candidate set
  double radius = 0.0;     // max distance inside the candidate set
  double d_first = kNoRadius, d_second = kNoRadius;
  double C = 0.0;          // fractional connection cost of the pair
  double v = 0.0;          // dual budget (ALG1 only)
};

// ALG1 candidates: the nearest unit of stage-I mass for first-stage served
// pairs, the nearest unit of stage-II mass otherwise.
std::vector<PairCandidate> alg1_candidates(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                           const StageSplit& split);

// Per-scenario candidates: nearest units of stage-I and stage-II mass (when
// available); the pair is first-stage clustered iff d_first <= d_second.
// Throws InvalidInput unless split.scale > 2.
std::vector<PairCandidate> cluster_candidates_per_scenario(const TwoStageInstance& inst,
                                                           const TwoStageFractional& frac, const StageSplit& split);

struct StagePiece {
  int stage = -1;         // -1 for stage I, otherwise the scenario index
  std::size_t facility = 0;
  double ybar = 0.0;
};

struct StageCluster {
  std::size_t pair = 0;   // index into the candidate list
  std::vector<std::size_t> pieces;
  double mass = 0.0;
  double radius = 0.0;
};

struct StageClustering {
  std::vector<StageCluster> clusters;
  std::vector<std::size_t> unclustered;
  std::vector<long> cluster_of_piece;
  // Per candidate: the cluster it formed or was charged to.
  std::vector<std::size_t> charged_to;
};

// Pieces of the split solution plus, per pair, its serving pieces and its
// candidate pieces.
struct StagedSolution {
  std::vector<StagePiece> pieces;
  std::vector<std::vector<std::size_t>> pair_serving;
  std::vector<std::vector<std::size_t>> pair_candidate;
  std::size_t splits = 0;
};

StagedSolution build_staged_solution(const TwoStageInstance& inst, const StageSplit& split,
                                     const std::vector<PairCandidate>& cands);

// Greedy clustering of one stage: candidates of `stage` (and, for stage II,
// of `scenario`), in non-decreasing radius, ties by (scenario, client).
// Clusters are appended to `out`, which accumulates over stages.
void build_stage_clusters(const TwoStageInstance& inst, const std::vector<PairCandidate>& cands,
                          const StagedSolution& staged, int stage, std::size_t scenario, StageClustering& out);

std::string check_stage_clustering(const StagedSolution& staged, const std::vector<PairCandidate>& cands,
                                   const StageClustering& cl);

enum class TwoStageAlgorithm { kAlg1, kPerScenario };

// One trial's realised costs; opening and connection are probability
// weighted like the aggregate.
struct TwoStageTrialRecord {
  double aggregate = 0.0, opening = 0.0, connection = 0.0;
  std::vector<double> scenario_cost;
};

struct TwoStageTrialStats {
  std::int64_t trials = 0;
  RunningMoments aggregate;  // sum_A p_A COST(A)
  RunningMoments aggregate_charge;
  std::vector<RunningMoments> scenario_cost, scenario_opening, scenario_charge, scenario_conn;
  std::vector<std::vector<RunningMoments>> pair_conn;  // [a][jl]
  std::vector<std::int64_t> piece_open;
  std::int64_t backup_violations = 0;
  std::int64_t cluster_violations = 0;

  void merge(const TwoStageTrialStats& o);
};

struct TwoStagePipeline {
  const TwoStageInstance* inst = nullptr;
  TwoStageAlgorithm algorithm = TwoStageAlgorithm::kAlg1;
  TwoStageFractional frac;
  CostDecomposition costs;
  StageSplit split;
  std::vector<PairCandidate> cands;
  StagedSolution staged;
  StageClustering clustering;
  // Scenario-visible pieces (stage I + stage II of the scenario) and the
  // client-major distance table over them.
  std::vector<std::vector<std::size_t>> visible;
  std::vector<std::vector<double>> dist;  // [a][jl * |visible| + k]
  // Cluster and unclustered-piece lists per stage (slot 0: stage I, slot
  // a + 1: stage II of scenario a).
  std::vector<std::vector<std::size_t>> stage_clusters;
  std::vector<std::vector<std::size_t>> stage_unclustered;
  std::vector<std::size_t> pair_offset;  // first candidate index of each scenario
  // Pairs whose radius exceeds its dual budget (ALG1) or the
  // gamma/(gamma-2) bound (per-scenario).
  std::vector<std::size_t> radius_violations;

  static TwoStagePipeline prepare(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                  TwoStageAlgorithm algorithm, double scale);

  TwoStageTrialStats empty_stats() const;

  // Rounds both stages and connects every scenario.
  void trial(Rng& rng, TwoStageTrialStats& acc, TwoStageTrialRecord* record = nullptr) const;

  // 3 e^-2 V_A + (1 - e^-2) C_A + 2 F_A  or  gamma * Val_A.
  double scenario_bound(std::size_t a) const;
  // Per-pair expected connection bound of the per-scenario algorithm.
  double pair_bound(std::size_t a, std::size_t jl) const;
};

// ALG1 at scale 2.
TwoStageTrialStats round_two_stage_alg1(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                        std::size_t trials, std::uint64_t seed, unsigned threads = 0);

inline constexpr double kPerScenarioGamma = 2.4957;

TwoStageTrialStats round_per_scenario(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                      double gamma, std::size_t trials, std::uint64_t seed,
                                      unsigned threads = 0);

// Root of 1 + (2g + 2)/(g - 2) e^-g = g on (2, 3).
double solve_per_scenario_gamma();

// One trial of a rounding procedure: fills per-scenario costs.
using TwoStageProcedure = std::function<void(Rng&, std::vector<double>&)>;

struct MixStats {
  std::int64_t trials = 0, heads = 0;
  RunningMoments aggregate;
  std::vector<RunningMoments> scenario;
  std::vector<double> probability;

  void merge(const MixStats& o);
};

// Per trial: heads with probability p (from its own substream) runs
// `first`, tails runs `second`; both see the trial's main stream.
MixStats combine_algorithms(const TwoStageProcedure& first, const TwoStageProcedure& second, double p,
                            const std::vector<double>& probabilities, std::size_t trials, std::uint64_t seed,
                            unsigned threads = 0);

struct MixedCoefficients {
  double opening = 0.0;
  double connection = 0.0;
  double max = 0.0;
};

MixedCoefficients two_stage_bound_calculator(double p, double first_open, double first_conn, double second_open,
                                             double second_conn);

}  // namespace flround
