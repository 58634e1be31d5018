#include "flround/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flround/config.hpp"
#include "flround/errors.hpp"
#include "flround/kernels.hpp"
#include "flround/parallel.hpp"

namespace flround {

StageSplit split_stage_assignments(const TwoStageInstance& inst, const TwoStageFractional& frac, double scale) {
  const std::size_t m = inst.base.num_facilities();
  StageSplit out;
  out.scale = scale;
  out.ybar_first.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.ybar_first[i] = scale * frac.y[i];
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    const std::size_t na = inst.scenarios[a].clients.size();
    std::vector<double> yb(m), xf(na * m), xs(na * m);
    std::vector<char> served(na, 0);
    for (std::size_t i = 0; i < m; ++i) yb[i] = scale * frac.yA[a][i];
    for (std::size_t jl = 0; jl < na; ++jl) {
      double first = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double xbar = scale * frac.x[a][jl * m + i];
        xf[jl * m + i] = std::min(xbar, out.ybar_first[i]);
        xs[jl * m + i] = xbar - xf[jl * m + i];
        first += xf[jl * m + i];
      }
      served[jl] = first >= 1.0 - kTol.feasibility;
    }
    out.ybar_second.push_back(std::move(yb));
    out.x_first.push_back(std::move(xf));
    out.x_second.push_back(std::move(xs));
    out.first_served.push_back(std::move(served));
  }
  return out;
}

std::string check_stage_split(const TwoStageInstance& inst, const StageSplit& split) {
  const std::size_t m = inst.base.num_facilities();
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    for (std::size_t jl = 0; jl < inst.scenarios[a].clients.size(); ++jl) {
      double first = 0.0, second = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double xf = split.x_first[a][jl * m + i], xs = split.x_second[a][jl * m + i];
        if (xf < 0.0 || xs < -kTol.identity) return "negative stage assignment";
        if (xs > split.ybar_second[a][i] + kTol.identity) return "stage-II assignment exceeds its opening";
        first += xf;
        second += xs;
      }
      if (!(split.first_served[a][jl] || second > 1.0)) {
        std::ostringstream msg;
        msg << "pair (scenario " << a << ", client " << inst.scenarios[a].clients[jl]
            << ") has stage-I mass " << first << " and stage-II mass " << second;
        return msg.str();
      }
    }
  }
  return {};
}

namespace {

struct UnitPrefix {
  std::vector<double> amount;
  double radius = kNoRadius;
  bool found = false;
};

// Nearest unit of `mass` for client j; ties by facility index.
UnitPrefix unit_prefix(const UflInstance& g, std::size_t j, const double* mass) {
  const std::size_t m = g.num_facilities();
  UnitPrefix out;
  out.amount.assign(m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) total += mass[i];
  if (total < 1.0 - kTol.feasibility) return out;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g.c(a, j) < g.c(b, j); });
  double need = 1.0;
  for (std::size_t i : order) {
    if (need <= kTol.snap) break;
    if (mass[i] <= kTol.snap) continue;
    const double take = std::min(need, mass[i]);
    out.amount[i] = take;
    out.radius = g.c(i, j);
    need -= take;
  }
  out.found = true;
  return out;
}

double pair_cost(const TwoStageInstance& inst, const TwoStageFractional& frac, std::size_t a, std::size_t jl) {
  const std::size_t m = inst.base.num_facilities();
  const std::size_t j = inst.scenarios[a].clients[jl];
  double c = 0.0;
  for (std::size_t i = 0; i < m; ++i) c += inst.base.c(i, j) * frac.x[a][jl * m + i];
  return c;
}

}  // namespace

std::vector<PairCandidate> alg1_candidates(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                           const StageSplit& split) {
  const std::size_t m = inst.base.num_facilities();
  std::vector<PairCandidate> out;
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    const Scenario& sc = inst.scenarios[a];
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      PairCandidate pc;
      pc.scenario = a;
      pc.jl = jl;
      pc.stage = split.first_served[a][jl] ? 0 : 1;
      const auto& src = pc.stage == 0 ? split.x_first[a] : split.x_second[a];
      UnitPrefix up = unit_prefix(inst.base, sc.clients[jl], src.data() + jl * m);
      if (!up.found) throw GuaranteeViolation("pair without a unit of candidate mass");
      pc.amount = std::move(up.amount);
      pc.radius = up.radius;
      (pc.stage == 0 ? pc.d_first : pc.d_second) = up.radius;
      pc.C = pair_cost(inst, frac, a, jl);
      pc.v = frac.v.empty() ? kNoRadius : frac.v[a][jl];
      out.push_back(std::move(pc));
    }
  }
  return out;
}

std::vector<PairCandidate> cluster_candidates_per_scenario(const TwoStageInstance& inst,
                                                           const TwoStageFractional& frac, const StageSplit& split) {
  if (!(split.scale > 2.0)) throw InvalidInput("per-scenario rounding needs gamma > 2");
  const std::size_t m = inst.base.num_facilities();
  std::vector<PairCandidate> out;
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    const Scenario& sc = inst.scenarios[a];
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      PairCandidate pc;
      pc.scenario = a;
      pc.jl = jl;
      UnitPrefix f1 = unit_prefix(inst.base, sc.clients[jl], split.x_first[a].data() + jl * m);
      UnitPrefix f2 = unit_prefix(inst.base, sc.clients[jl], split.x_second[a].data() + jl * m);
      if (!f1.found && !f2.found) throw GuaranteeViolation("pair without a unit of candidate mass");
      pc.d_first = f1.radius;
      pc.d_second = f2.radius;
      if (f1.found && f1.radius <= f2.radius) {
        pc.stage = 0;
        pc.amount = std::move(f1.amount);
        pc.radius = f1.radius;
      } else {
        pc.stage = 1;
        pc.amount = std::move(f2.amount);
        pc.radius = f2.radius;
      }
      pc.C = pair_cost(inst, frac, a, jl);
      pc.v = frac.v.empty() ? kNoRadius : frac.v[a][jl];
      out.push_back(std::move(pc));
    }
  }
  return out;
}

StagedSolution build_staged_solution(const TwoStageInstance& inst, const StageSplit& split,
                                     const std::vector<PairCandidate>& cands) {
  const std::size_t m = inst.base.num_facilities();
  const std::size_t S = inst.scenarios.size();
  StagedSolution out;
  struct Span {
    double lo, hi;
  };
  std::vector<Span> spans;
  // piece ranges per stage object: [stage + 1][i] -> [first, last)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> range(S + 1,
                                                                      std::vector<std::pair<std::size_t, std::size_t>>(m, {0, 0}));
  std::vector<double> thr;
  std::size_t positive = 0;
  for (std::size_t slot = 0; slot <= S; ++slot) {
    for (std::size_t i = 0; i < m; ++i) {
      const double total = slot == 0 ? split.ybar_first[i] : split.ybar_second[slot - 1][i];
      if (total <= kTol.snap) continue;
      ++positive;
      thr.clear();
      for (const PairCandidate& pc : cands) {
        const std::size_t a = pc.scenario;
        if (slot == 0) {
          thr.push_back(split.x_first[a][pc.jl * m + i]);
          if (pc.stage == 0) thr.push_back(pc.amount[i]);
        } else if (a == slot - 1) {
          thr.push_back(split.x_second[a][pc.jl * m + i]);
          if (pc.stage == 1) thr.push_back(pc.amount[i]);
        }
      }
      const auto cuts = piece_boundaries(total, thr, true, kTol.snap);
      range[slot][i].first = out.pieces.size();
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        out.pieces.push_back({slot == 0 ? -1 : static_cast<int>(slot - 1), i, cuts[k + 1] - cuts[k]});
        spans.push_back({cuts[k], cuts[k + 1]});
      }
      range[slot][i].second = out.pieces.size();
    }
  }
  out.splits = out.pieces.size() - positive;
  out.pair_serving.resize(cands.size());
  out.pair_candidate.resize(cands.size());
  for (std::size_t q = 0; q < cands.size(); ++q) {
    const PairCandidate& pc = cands[q];
    const std::size_t a = pc.scenario;
    for (std::size_t slot : {std::size_t{0}, a + 1}) {
      for (std::size_t i = 0; i < m; ++i) {
        const double serve = slot == 0 ? split.x_first[a][pc.jl * m + i] : split.x_second[a][pc.jl * m + i];
        const bool cand_slot = (slot == 0) == (pc.stage == 0);
        const double cand = cand_slot ? pc.amount[i] : 0.0;
        for (std::size_t p = range[slot][i].first; p < range[slot][i].second; ++p) {
          if (spans[p].hi <= serve + kTol.snap && serve > kTol.snap) out.pair_serving[q].push_back(p);
          if (cand > kTol.snap && spans[p].hi <= cand + kTol.snap) out.pair_candidate[q].push_back(p);
        }
      }
    }
  }
  return out;
}

void build_stage_clusters(const TwoStageInstance& inst, const std::vector<PairCandidate>& cands,
                          const StagedSolution& staged, int stage, std::size_t scenario, StageClustering& out) {
  if (out.cluster_of_piece.size() != staged.pieces.size()) out.cluster_of_piece.assign(staged.pieces.size(), -1);
  if (out.charged_to.size() != cands.size()) out.charged_to.assign(cands.size(), static_cast<std::size_t>(-1));
  std::vector<std::size_t> order;
  for (std::size_t q = 0; q < cands.size(); ++q) {
    if (cands[q].stage != stage) continue;
    if (stage == 1 && cands[q].scenario != scenario) continue;
    order.push_back(q);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const PairCandidate &a = cands[l], &b = cands[r];
    if (a.radius != b.radius) return a.radius < b.radius;
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    return inst.scenarios[a.scenario].clients[a.jl] < inst.scenarios[b.scenario].clients[b.jl];
  });
  for (std::size_t q : order) {
    const auto& pieces = staged.pair_candidate[q];
    long hit = -1;
    for (std::size_t p : pieces) {
      const long c = out.cluster_of_piece[p];
      if (c < 0) continue;
      if (hit < 0 || out.clusters[c].radius < out.clusters[hit].radius ||
          (out.clusters[c].radius == out.clusters[hit].radius && c < hit))
        hit = c;
    }
    if (hit >= 0) {
      out.charged_to[q] = static_cast<std::size_t>(hit);
      continue;
    }
    StageCluster cl;
    cl.pair = q;
    cl.pieces = pieces;
    cl.radius = cands[q].radius;
    for (std::size_t p : pieces) {
      cl.mass += staged.pieces[p].ybar;
      out.cluster_of_piece[p] = static_cast<long>(out.clusters.size());
    }
    out.charged_to[q] = out.clusters.size();
    out.clusters.push_back(std::move(cl));
  }
}

std::string check_stage_clustering(const StagedSolution& staged, const std::vector<PairCandidate>& cands,
                                   const StageClustering& cl) {
  std::ostringstream msg;
  std::vector<int> seen(staged.pieces.size(), 0);
  for (std::size_t c = 0; c < cl.clusters.size(); ++c) {
    if (std::abs(cl.clusters[c].mass - 1.0) > kTol.feasibility) {
      msg << "cluster " << c << " has mass " << cl.clusters[c].mass;
      return msg.str();
    }
    for (std::size_t p : cl.clusters[c].pieces) {
      if (seen[p]++) return "a piece belongs to two clusters";
    }
  }
  for (std::size_t q = 0; q < cands.size(); ++q) {
    const std::size_t c = cl.charged_to[q];
    if (c >= cl.clusters.size()) return "a pair was never clustered or charged";
    if (cl.clusters[c].radius > cands[q].radius + kTol.identity) return "a pair was charged to a wider cluster";
    bool meets = false;
    for (std::size_t p : staged.pair_candidate[q]) meets = meets || cl.cluster_of_piece[p] == static_cast<long>(c);
    if (!meets) return "a pair was charged to a cluster it does not intersect";
  }
  return {};
}

void TwoStageTrialStats::merge(const TwoStageTrialStats& o) {
  trials += o.trials;
  aggregate.merge(o.aggregate);
  aggregate_charge.merge(o.aggregate_charge);
  for (std::size_t a = 0; a < scenario_cost.size(); ++a) {
    scenario_cost[a].merge(o.scenario_cost[a]);
    scenario_opening[a].merge(o.scenario_opening[a]);
    scenario_charge[a].merge(o.scenario_charge[a]);
    scenario_conn[a].merge(o.scenario_conn[a]);
    for (std::size_t jl = 0; jl < pair_conn[a].size(); ++jl) pair_conn[a][jl].merge(o.pair_conn[a][jl]);
  }
  for (std::size_t p = 0; p < piece_open.size(); ++p) piece_open[p] += o.piece_open[p];
  backup_violations += o.backup_violations;
  cluster_violations += o.cluster_violations;
}

TwoStagePipeline TwoStagePipeline::prepare(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                           TwoStageAlgorithm algorithm, double scale) {
  TwoStagePipeline pipe;
  pipe.inst = &inst;
  pipe.algorithm = algorithm;
  pipe.frac = frac;
  pipe.costs = decompose_two_stage(inst, frac);
  if (algorithm == TwoStageAlgorithm::kAlg1 && frac.v.empty())
    throw InvalidInput("ALG1 needs the dual budgets of an optimal LP solution");
  pipe.split = split_stage_assignments(inst, frac, scale);
  pipe.cands = algorithm == TwoStageAlgorithm::kAlg1 ? alg1_candidates(inst, frac, pipe.split)
                                                     : cluster_candidates_per_scenario(inst, frac, pipe.split);
  pipe.staged = build_staged_solution(inst, pipe.split, pipe.cands);
  const std::size_t S = inst.scenarios.size();
  build_stage_clusters(inst, pipe.cands, pipe.staged, 0, 0, pipe.clustering);
  for (std::size_t a = 0; a < S; ++a) build_stage_clusters(inst, pipe.cands, pipe.staged, 1, a, pipe.clustering);
  auto& cl = pipe.clustering;
  pipe.stage_clusters.assign(S + 1, {});
  pipe.stage_unclustered.assign(S + 1, {});
  for (std::size_t c = 0; c < cl.clusters.size(); ++c) {
    const int st = pipe.staged.pieces[cl.clusters[c].pieces.front()].stage;
    pipe.stage_clusters[static_cast<std::size_t>(st + 1)].push_back(c);
  }
  for (std::size_t p = 0; p < pipe.staged.pieces.size(); ++p) {
    if (cl.cluster_of_piece[p] >= 0) continue;
    cl.unclustered.push_back(p);
    pipe.stage_unclustered[static_cast<std::size_t>(pipe.staged.pieces[p].stage + 1)].push_back(p);
  }
  std::size_t offset = 0;
  for (std::size_t a = 0; a < S; ++a) {
    pipe.pair_offset.push_back(offset);
    offset += inst.scenarios[a].clients.size();
    std::vector<std::size_t> vis;
    for (std::size_t p = 0; p < pipe.staged.pieces.size(); ++p) {
      const int st = pipe.staged.pieces[p].stage;
      if (st == -1 || st == static_cast<int>(a)) vis.push_back(p);
    }
    std::vector<double> d(inst.scenarios[a].clients.size() * vis.size());
    for (std::size_t jl = 0; jl < inst.scenarios[a].clients.size(); ++jl) {
      for (std::size_t k = 0; k < vis.size(); ++k)
        d[jl * vis.size() + k] = inst.base.c(pipe.staged.pieces[vis[k]].facility, inst.scenarios[a].clients[jl]);
    }
    pipe.visible.push_back(std::move(vis));
    pipe.dist.push_back(std::move(d));
  }
  for (std::size_t q = 0; q < pipe.cands.size(); ++q) {
    const PairCandidate& pc = pipe.cands[q];
    if (algorithm == TwoStageAlgorithm::kAlg1) {
      if (pc.radius > pc.v + kTol.comp_slack) pipe.radius_violations.push_back(q);
    } else {
      if (pc.radius > scale / (scale - 2.0) * pc.C + kTol.identity) pipe.radius_violations.push_back(q);
    }
  }
  return pipe;
}

TwoStageTrialStats TwoStagePipeline::empty_stats() const {
  TwoStageTrialStats s;
  const std::size_t S = inst->scenarios.size();
  s.scenario_cost.resize(S);
  s.scenario_opening.resize(S);
  s.scenario_charge.resize(S);
  s.scenario_conn.resize(S);
  s.pair_conn.resize(S);
  for (std::size_t a = 0; a < S; ++a) s.pair_conn[a].resize(inst->scenarios[a].clients.size());
  s.piece_open.assign(staged.pieces.size(), 0);
  return s;
}

namespace {

void open_stage(const TwoStagePipeline& pipe, std::size_t slot, Rng& rng, std::vector<std::uint8_t>& open,
                std::vector<double>& w) {
  for (std::size_t c : pipe.stage_clusters[slot]) {
    const StageCluster& k = pipe.clustering.clusters[c];
    w.clear();
    for (std::size_t p : k.pieces) w.push_back(pipe.staged.pieces[p].ybar);
    open[k.pieces[rng.pick(w)]] = 1;
  }
  for (std::size_t p : pipe.stage_unclustered[slot]) open[p] = rng.bernoulli(pipe.staged.pieces[p].ybar) ? 1 : 0;
}

}  // namespace

void TwoStagePipeline::trial(Rng& rng, TwoStageTrialStats& acc, TwoStageTrialRecord* record) const {
  const UflInstance& g = inst->base;
  const std::size_t m = g.num_facilities();
  const std::size_t S = inst->scenarios.size();
  const std::uint64_t sub = rng.engine()();
  std::vector<std::uint8_t> open(staged.pieces.size(), 0);
  std::vector<double> w;
  open_stage(*this, 0, rng, open, w);
  for (std::size_t a = 0; a < S; ++a) {
    Rng r2(derive_seed(sub, a));
    open_stage(*this, a + 1, r2, open, w);
  }
  for (const StageCluster& k : clustering.clusters) {
    int count = 0;
    for (std::size_t p : k.pieces) count += open[p];
    if (count != 1) {
      ++acc.cluster_violations;
      break;
    }
  }
  std::vector<char> first_open(m, 0);
  double first_cost = 0.0, first_charge = 0.0;
  for (std::size_t p = 0; p < open.size(); ++p) {
    acc.piece_open[p] += open[p];
    const StagePiece& pc = staged.pieces[p];
    if (!open[p] || pc.stage != -1) continue;
    first_charge += g.open_cost[pc.facility];
    if (!first_open[pc.facility]) first_cost += g.open_cost[pc.facility];
    first_open[pc.facility] = 1;
  }
  if (record) *record = {0.0, 0.0, 0.0, std::vector<double>(S, 0.0)};
  double aggregate = 0.0, aggregate_charge = 0.0;
  std::vector<char> second_open(m, 0);
  std::vector<std::uint8_t> vis_open;
  for (std::size_t a = 0; a < S; ++a) {
    const Scenario& sc = inst->scenarios[a];
    std::fill(second_open.begin(), second_open.end(), 0);
    double second_cost = 0.0, second_charge = 0.0;
    const auto& vis = visible[a];
    vis_open.resize(vis.size());
    for (std::size_t k = 0; k < vis.size(); ++k) {
      const std::size_t p = vis[k];
      vis_open[k] = open[p];
      const StagePiece& pc = staged.pieces[p];
      if (!open[p] || pc.stage == -1) continue;
      second_charge += sc.open_cost[pc.facility];
      if (!first_open[pc.facility] && !second_open[pc.facility]) second_cost += sc.open_cost[pc.facility];
      second_open[pc.facility] = 1;
    }
    double conn = 0.0;
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      const double* row = dist[a].data() + jl * vis.size();
      const std::size_t k = kernels::argmin_open({row, vis.size()}, vis_open);
      if (k == kernels::kNoIndex) throw GuaranteeViolation("a scenario has no open facility");
      const double c = row[k];
      const PairCandidate& cand = cands[pair_offset[a] + jl];
      if (c > 3.0 * cand.radius + kTol.identity * (1.0 + c)) ++acc.backup_violations;
      acc.pair_conn[a][jl].add(c);
      conn += c;
    }
    const double opening = first_cost + second_cost;
    const double cost = opening + conn;
    acc.scenario_cost[a].add(cost);
    acc.scenario_opening[a].add(opening);
    acc.scenario_charge[a].add(first_charge + second_charge);
    acc.scenario_conn[a].add(conn);
    aggregate += sc.probability * cost;
    aggregate_charge += sc.probability * (first_charge + second_charge + conn);
    if (record) {
      record->scenario_cost[a] = cost;
      record->opening += sc.probability * opening;
      record->connection += sc.probability * conn;
    }
  }
  ++acc.trials;
  acc.aggregate.add(aggregate);
  acc.aggregate_charge.add(aggregate_charge);
  if (record) record->aggregate = aggregate;
}

double TwoStagePipeline::scenario_bound(std::size_t a) const {
  const ScenarioCosts& sc = costs.scenarios[a];
  if (algorithm == TwoStageAlgorithm::kAlg1) {
    const double e2 = std::exp(-2.0);
    return 3.0 * e2 * sc.V_A + (1.0 - e2) * sc.C_A + 2.0 * sc.F_A;
  }
  const double g = split.scale;
  const double conn = 1.0 + (2.0 * g + 2.0) / (g - 2.0) * std::exp(-g);
  return g * sc.F_A + conn * sc.C_A;
}

double TwoStagePipeline::pair_bound(std::size_t a, std::size_t jl) const {
  const double g = split.scale;
  const double C = cands[pair_offset[a] + jl].C;
  if (algorithm == TwoStageAlgorithm::kAlg1) {
    const double e2 = std::exp(-2.0);
    return (1.0 - e2) * C + 3.0 * e2 * cands[pair_offset[a] + jl].v;
  }
  return (1.0 + (2.0 * g + 2.0) / (g - 2.0) * std::exp(-g)) * C;
}

TwoStageTrialStats round_two_stage_alg1(const TwoStageInstance& inst, const TwoStageFractional& frac,
                                        std::size_t trials, std::uint64_t seed, unsigned threads) {
  const TwoStagePipeline pipe = TwoStagePipeline::prepare(inst, frac, TwoStageAlgorithm::kAlg1, 2.0);
  return run_trials(
      trials, seed, pipe.empty_stats(), [&](TwoStageTrialStats& acc, std::size_t, Rng& rng) { pipe.trial(rng, acc); },
      threads);
}

TwoStageTrialStats round_per_scenario(const TwoStageInstance& inst, const TwoStageFractional& frac, double gamma,
                                      std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (!(gamma > 2.0)) throw InvalidInput("per-scenario rounding needs gamma > 2");
  const TwoStagePipeline pipe = TwoStagePipeline::prepare(inst, frac, TwoStageAlgorithm::kPerScenario, gamma);
  return run_trials(
      trials, seed, pipe.empty_stats(), [&](TwoStageTrialStats& acc, std::size_t, Rng& rng) { pipe.trial(rng, acc); },
      threads);
}

double solve_per_scenario_gamma() {
  auto f = [](double g) { return 1.0 + (2.0 * g + 2.0) / (g - 2.0) * std::exp(-g) - g; };
  double lo = 2.0 + 1e-9, hi = 3.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

void MixStats::merge(const MixStats& o) {
  trials += o.trials;
  heads += o.heads;
  aggregate.merge(o.aggregate);
  for (std::size_t a = 0; a < scenario.size(); ++a) scenario[a].merge(o.scenario[a]);
}

MixStats combine_algorithms(const TwoStageProcedure& first, const TwoStageProcedure& second, double p,
                            const std::vector<double>& probabilities, std::size_t trials, std::uint64_t seed,
                            unsigned threads) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("mixing probability must lie in [0, 1]");
  MixStats empty;
  empty.scenario.resize(probabilities.size());
  empty.probability = probabilities;
  const std::uint64_t coin_master = derive_seed(seed, 0x636f696eULL);
  return run_trials(
      trials, seed, empty,
      [&](MixStats& acc, std::size_t t, Rng& rng) {
        Rng coin(derive_seed(coin_master, t));
        const bool heads = coin.uniform() < p;
        std::vector<double> cost;
        (heads ? first : second)(rng, cost);
        double agg = 0.0;
        for (std::size_t a = 0; a < cost.size() && a < probabilities.size(); ++a) {
          acc.scenario[a].add(cost[a]);
          agg += probabilities[a] * cost[a];
        }
        ++acc.trials;
        acc.heads += heads;
        acc.aggregate.add(agg);
      },
      threads);
}

MixedCoefficients two_stage_bound_calculator(double p, double first_open, double first_conn, double second_open,
                                             double second_conn) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("mixing probability must lie in [0, 1]");
  MixedCoefficients out;
  out.opening = p * first_open + (1.0 - p) * second_open;
  out.connection = p * first_conn + (1.0 - p) * second_conn;
  out.max = std::max(out.opening, out.connection);
  return out;
}

}  // namespace flround
