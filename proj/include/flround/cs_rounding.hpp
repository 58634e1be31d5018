#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "flround/core_model.hpp"
#include "flround/rng.hpp"
#include "flround/stats.hpp"

namespace flround {

// Scaled openings gamma*y* on the same copies; x holds the nearest-first
// reassignment (ties by facility id). Openings may exceed one here.
FractionalUflSolution scale_and_reassign(const UflInstance& inst, const FractionalUflSolution& sol, double gamma);

// Split, complete solution. `bar` has one copy per piece with x-bar in
// {0, y-bar} and y-bar <= 1. `x_star` carries the unscaled input solution
// over to the pieces (client-major like bar.x), which is what defines the
// distant sets.
struct CompleteSolution {
  double gamma = 1.0;
  FractionalUflSolution bar;
  std::vector<double> x_star;
  std::size_t splits = 0;  // pieces created beyond one per positive copy

  bool close(std::size_t j, std::size_t p) const { return bar.xv(j, p) > 0.0; }
  double xs(std::size_t j, std::size_t p) const { return x_star[j * bar.width() + p]; }
};

// Pieces are cut at every x-tilde_ij, every gamma*x*_ij and every integer,
// so each client's close mass and distant mass are unions of whole pieces.
CompleteSolution complete_solution(const UflInstance& inst, const FractionalUflSolution& original,
                                   const FractionalUflSolution& reassigned, double gamma);

struct ClientStats {
  std::vector<std::size_t> close;    // piece indices
  std::vector<std::size_t> distant;  // piece indices
  double d = 0.0;
  double d_close = 0.0;
  double d_distant = 0.0;  // reported as d_max when the distant set is empty
  double d_max = 0.0;
  double rho = 0.0;
  double close_mass = 0.0;
  double distant_mass = 0.0;
  // |d_distant - d (1 + rho / (gamma - 1))|; negative when not applicable.
  double lemma1_residual = -1.0;
};

std::vector<ClientStats> client_stats(const UflInstance& inst, const CompleteSolution& cs);

// Empty when all per-client invariants hold, else the first failure.
std::string check_client_stats(const CompleteSolution& cs, const std::vector<ClientStats>& stats);

struct Cluster {
  std::size_t center = 0;
  std::vector<std::size_t> pieces;
  double mass = 0.0;
  double key = 0.0;  // d_close + d_max of the center
};

struct Clustering {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> unclustered;
  std::vector<long> cluster_of_piece;  // -1 when unclustered
  // For every client, the cluster whose center removed it (its own
  // cluster when it is a center).
  std::vector<std::size_t> owner;
  std::vector<char> is_center;
};

Clustering build_clusters(const CompleteSolution& cs, const std::vector<ClientStats>& stats);

std::string check_clustering(const CompleteSolution& cs, const std::vector<ClientStats>& stats,
                             const Clustering& cl);

// One open piece per cluster, independent coins elsewhere. Draw order:
// clusters in order, then unclustered pieces in index order.
std::vector<std::uint8_t> round_solution(const CompleteSolution& cs, const Clustering& cl, Rng& rng);

enum class ConnectEvent : std::uint8_t { kCloseOpen, kDistantOpen, kFallback };

struct Connection {
  IntegralUflSolution solution;
  std::vector<double> cost;          // per client
  std::vector<std::size_t> piece;    // chosen piece per client
  std::vector<ConnectEvent> event;   // per client
  std::size_t lemma2_violations = 0; // deterministic backup bound failures
  double opening = 0.0;              // each original once
  double opening_charge = 0.0;       // every open piece charged separately
};

// Closest open piece per client, ties by original id. `dist` is the
// client-major piece distance table from piece_distances().
Connection connect_clients(const UflInstance& inst, const CompleteSolution& cs, const std::vector<ClientStats>& stats,
                           const Clustering& cl, const std::vector<std::uint8_t>& open,
                           const std::vector<double>& dist);

std::vector<double> piece_distances(const UflInstance& inst, const CompleteSolution& cs);

// Everything up to the random part, computed once per (instance, gamma).
struct CsPipeline {
  const UflInstance* inst = nullptr;
  FractionalUflSolution original;
  CompleteSolution complete;
  std::vector<ClientStats> stats;
  Clustering clustering;
  std::vector<double> dist;
  std::vector<double> C_j;  // fractional connection cost per client
  double F_star = 0.0, C_star = 0.0;

  static CsPipeline prepare(const UflInstance& inst, const FractionalUflSolution& sol, double gamma);
};

// Root of (e^-1 + e^-g)/(1 - 1/g) = 1 + 2 e^-g on (1, 2).
double solve_gamma0();

// Root of s = 1 + 2 e^-s.
double solve_s0();

struct BoundBreakdown {
  double gamma = 0.0;
  double p_close_lower = 0.0;     // 1 - 1/e
  double p_fallback_upper = 0.0;  // e^-gamma
  double branch_uniform = 0.0;    // 1 + 2 e^-gamma
  double branch_skewed = 0.0;     // (e^-1 + e^-gamma) / (1 - 1/gamma)
  double connection = 0.0;        // max of the two branches
  double opening = 0.0;           // gamma
  double s0 = 0.0;
};

// Throws InvalidInput unless 1 < gamma < 2.
BoundBreakdown bifactor_bound(double gamma);

enum class AdversaryKind { kEquidistant, kTwoDistance };

struct AdversarialCase {
  UflInstance instance;
  FractionalUflSolution solution;
};

// One client, n facilities with opening cost `open_cost`. Equidistant: all
// at distance a with x* = 1/n. Two-distance: the first n/2 facilities at
// distance a carry mass 1/gamma_target - 1e-6, the rest at distance b.
AdversarialCase adversarial_instance(AdversaryKind kind, double gamma_target, double a, double b, std::size_t n,
                                     double open_cost = 1.0);

struct RandomGammaStats {
  std::int64_t trials = 0;
  RunningMoments ratio;  // total cost / reference value
  RunningMoments total;
  std::vector<std::int64_t> gamma_draws;  // per distribution entry

  void merge(const RandomGammaStats& o);
};

// Per trial: draw gamma from `dist` (pairs (gamma, weight)), run CS(gamma).
RandomGammaStats random_gamma_run(const UflInstance& inst, const FractionalUflSolution& sol,
                                  const std::vector<std::pair<double, double>>& dist, double reference,
                                  std::size_t trials, std::uint64_t seed);

// Monte Carlo aggregate of CS(gamma) trials.
struct CsTrialStats {
  std::int64_t trials = 0;
  RunningMoments opening, opening_charge, connection, total;
  std::vector<RunningMoments> client_conn;
  std::vector<RunningMoments> client_fallback_conn;
  std::vector<std::int64_t> piece_open;
  std::vector<std::int64_t> client_all_closed;  // no piece of close+distant open
  std::int64_t close_open = 0, distant_open = 0, fallback = 0;
  std::int64_t cluster_violations = 0;  // trials without exactly one open per cluster
  std::int64_t lemma2_violations = 0;
  // Products of opening indicators for the first `tracked` pieces.
  std::size_t tracked = 0;
  std::vector<std::int64_t> joint_open;

  static CsTrialStats empty_for(const CsPipeline& pipe, std::size_t track_pairs);
  void merge(const CsTrialStats& o);
};

// Optional per-trial log line: (trial, opening, connection, counters).
struct CsTrialRecord {
  std::size_t trial;
  double opening, connection;
  std::int64_t close_open, distant_open, fallback;
};

void cs_trial(const CsPipeline& pipe, Rng& rng, CsTrialStats& acc, CsTrialRecord* record = nullptr);

CsTrialStats run_cs(const CsPipeline& pipe, std::size_t trials, std::uint64_t seed, std::size_t track_pairs = 0,
                    unsigned threads = 0);

}  // namespace flround
