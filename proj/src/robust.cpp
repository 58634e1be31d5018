#include "flround/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flround/config.hpp"
#include "flround/errors.hpp"
#include "flround/kernels.hpp"
#include "flround/parallel.hpp"

namespace flround {

double robust_gamma(int k) {
  if (k < 1) throw InvalidInput("robust rounding needs k >= 1");
  return k + 5.0 + 4.0 / k;
}

double robust_radius_factor(double gamma, int k) {
  if (!(gamma > k + 1.0)) throw InvalidInput("scale must exceed k + 1");
  return std::max(gamma / 3.0, gamma / (gamma - k - 1.0));
}

RequirementSet build_requirements(const RobustInstance& inst, const RobustFractional& frac, double gamma) {
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities(), n = g.num_clients();
  const int k = inst.k;
  const double factor = robust_radius_factor(gamma, k);
  RequirementSet out;
  out.k = k;
  out.gamma = gamma;
  out.ybar.resize(m);
  out.capped.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = gamma * frac.y[i];
    out.capped[i] = s >= 1.0 - kTol.snap;
    out.ybar[i] = out.capped[i] ? 1.0 : s;
  }
  const double threshold = (k + 1.0) / gamma;
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < frac.scenarios.size(); ++a) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* x = frac.x[a].data() + j * m;
      Requirement r;
      r.client = j;
      r.scenario = a;
      order.clear();
      for (std::size_t i = 0; i < m; ++i) {
        r.C += g.c(i, j) * x[i];
        if (x[i] > kTol.snap) order.push_back(i);
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t q) { return g.c(l, j) < g.c(q, j); });
      for (std::size_t i : order) {
        r.prefix.push_back(i);
        r.prefix_mass += x[i];
        r.radius = g.c(i, j);
        if (r.prefix_mass >= threshold - kTol.snap) break;
      }
      r.radius_bound = factor * r.C;
      if (r.radius > r.radius_bound + kTol.identity * (1.0 + r.radius_bound)) {
        std::ostringstream msg;
        msg << "prefix radius " << r.radius << " exceeds " << r.radius_bound << " for client " << g.client_ids[j];
        throw GuaranteeViolation(msg.str());
      }
      for (std::size_t i : r.prefix) {
        if (out.capped[i]) {
          r.kind = RequirementCase::kDeterministic;
          r.deterministic = i;
          break;
        }
      }
      if (r.kind == RequirementCase::kDeterministic) {
        ++out.deterministic_count;
        out.requirements.push_back(std::move(r));
        continue;
      }
      double scaled = 0.0;
      for (std::size_t i : r.prefix) scaled += gamma * x[i];
      if (scaled < k + 1.0 - kTol.feasibility) throw GuaranteeViolation("Case-2 prefix has scaled mass below k+1");
      r.blocks.assign(static_cast<std::size_t>(k) + 1, {});
      r.block_radius.assign(static_cast<std::size_t>(k) + 1, 0.0);
      std::size_t b = 0;
      double room = 1.0;
      for (std::size_t i : r.prefix) {
        double used = 0.0;
        const double have = gamma * x[i];
        while (b <= static_cast<std::size_t>(k) && have - used > kTol.snap) {
          const double take = std::min(room, have - used);
          r.blocks[b].push_back({i, used, used + take});
          r.block_radius[b] = std::max(r.block_radius[b], g.c(i, j));
          used += take;
          room -= take;
          if (room <= kTol.snap) {
            ++b;
            room = 1.0;
          }
        }
      }
      out.requirements.push_back(std::move(r));
    }
  }
  return out;
}

std::string check_requirements(const RobustInstance& inst, const RequirementSet& reqs) {
  const UflInstance& g = inst.base;
  for (std::size_t q = 0; q < reqs.requirements.size(); ++q) {
    const Requirement& r = reqs.requirements[q];
    std::ostringstream msg;
    msg << "requirement " << q << ": ";
    if (r.kind == RequirementCase::kDeterministic) {
      if (r.deterministic >= g.num_facilities() || !reqs.capped[r.deterministic]) return msg.str() + "bad deterministic facility";
      continue;
    }
    if (r.blocks.size() != static_cast<std::size_t>(reqs.k) + 1) return msg.str() + "wrong block count";
    std::vector<std::pair<double, double>> seen;
    for (const auto& block : r.blocks) {
      double mass = 0.0;
      for (const BlockPart& p : block) {
        mass += p.hi - p.lo;
        if (reqs.capped[p.facility]) return msg.str() + "capped facility inside a block";
        if (g.c(p.facility, r.client) > r.radius_bound + kTol.identity * (1.0 + r.radius_bound))
          return msg.str() + "block facility outside the radius bound";
        if (p.hi > reqs.ybar[p.facility] + kTol.identity) return msg.str() + "block part exceeds the opening";
      }
      if (std::abs(mass - 1.0) > kTol.feasibility) {
        msg << "block mass " << mass;
        return msg.str();
      }
    }
    // parts of one facility must not overlap across blocks
    for (std::size_t b1 = 0; b1 < r.blocks.size(); ++b1)
      for (std::size_t b2 = b1 + 1; b2 < r.blocks.size(); ++b2)
        for (const BlockPart& p : r.blocks[b1])
          for (const BlockPart& q2 : r.blocks[b2])
            if (p.facility == q2.facility && std::min(p.hi, q2.hi) - std::max(p.lo, q2.lo) > kTol.identity)
              return msg.str() + "blocks overlap";
  }
  return {};
}

BlockPlan BlockPlan::prepare(const RobustInstance& inst, RequirementSet reqs) {
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities();
  BlockPlan plan;
  plan.inst = &inst;
  plan.reqs = std::move(reqs);
  const auto& R = plan.reqs.requirements;

  std::vector<std::vector<double>> cuts(m);
  for (const Requirement& r : R)
    for (const auto& block : r.blocks)
      for (const BlockPart& p : block) {
        cuts[p.facility].push_back(p.lo);
        cuts[p.facility].push_back(p.hi);
      }
  std::vector<std::size_t> first(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    first[i] = plan.pieces.size();
    if (plan.reqs.capped[i] || plan.reqs.ybar[i] <= kTol.snap) continue;
    const auto b = piece_boundaries(plan.reqs.ybar[i], cuts[i], false, kTol.snap);
    for (std::size_t q = 0; q + 1 < b.size(); ++q) plan.pieces.push_back({i, b[q], b[q + 1]});
  }
  first[m] = plan.pieces.size();

  plan.block_pieces.resize(R.size());
  plan.block_cluster.resize(R.size());
  struct BlockRef {
    double radius;
    std::size_t r, b;
  };
  std::vector<BlockRef> blocks;
  for (std::size_t q = 0; q < R.size(); ++q) {
    plan.block_pieces[q].resize(R[q].blocks.size());
    plan.block_cluster[q].assign(R[q].blocks.size(), kUncovered);
    for (std::size_t b = 0; b < R[q].blocks.size(); ++b) {
      for (const BlockPart& p : R[q].blocks[b]) {
        for (std::size_t s = first[p.facility]; s < first[p.facility + 1]; ++s) {
          const double mid = 0.5 * (plan.pieces[s].lo + plan.pieces[s].hi);
          if (mid > p.lo && mid < p.hi) plan.block_pieces[q][b].push_back(s);
        }
      }
      blocks.push_back({R[q].block_radius[b], q, b});
    }
  }
  std::stable_sort(blocks.begin(), blocks.end(), [](const BlockRef& a, const BlockRef& b) {
    if (a.radius != b.radius) return a.radius < b.radius;
    if (a.r != b.r) return a.r < b.r;
    return a.b < b.b;
  });

  plan.cluster_of_piece.assign(plan.pieces.size(), -1);
  plan.structural_open.assign(m, 0);
  for (const BlockRef& ref : blocks) {
    const auto& pieces = plan.block_pieces[ref.r][ref.b];
    const auto& used = plan.block_cluster[ref.r];
    bool meets = false;
    long best = -1;
    for (std::size_t s : pieces) {
      const long c = plan.cluster_of_piece[s];
      if (c < 0) continue;
      meets = true;
      if (std::find(used.begin(), used.end(), static_cast<std::size_t>(c)) != used.end()) continue;
      if (best < 0 || plan.clusters[c].radius < plan.clusters[best].radius ||
          (plan.clusters[c].radius == plan.clusters[best].radius && c < best))
        best = c;
    }
    if (!meets) {
      BlockCluster cl{ref.r, ref.b, pieces, ref.radius};
      for (std::size_t s : pieces) plan.cluster_of_piece[s] = static_cast<long>(plan.clusters.size());
      plan.block_cluster[ref.r][ref.b] = plan.clusters.size();
      plan.clusters.push_back(std::move(cl));
    } else if (best >= 0) {
      plan.block_cluster[ref.r][ref.b] = static_cast<std::size_t>(best);
    } else {
      ++plan.uncovered_blocks;
      std::size_t cheapest = m;
      for (const BlockPart& p : R[ref.r].blocks[ref.b])
        if (cheapest == m || g.open_cost[p.facility] < g.open_cost[cheapest] ||
            (g.open_cost[p.facility] == g.open_cost[cheapest] && p.facility < cheapest))
          cheapest = p.facility;
      plan.structural_open[cheapest] = 1;
    }
  }
  for (std::size_t s = 0; s < plan.pieces.size(); ++s)
    if (plan.cluster_of_piece[s] < 0) plan.unclustered.push_back(s);
  return plan;
}

std::string check_block_plan(const BlockPlan& plan) {
  std::vector<int> seen(plan.pieces.size(), 0);
  for (std::size_t c = 0; c < plan.clusters.size(); ++c) {
    double mass = 0.0;
    for (std::size_t s : plan.clusters[c].pieces) {
      if (seen[s]++) return "a piece belongs to two clusters";
      mass += plan.pieces[s].ybar();
    }
    if (std::abs(mass - 1.0) > kTol.feasibility) {
      std::ostringstream msg;
      msg << "cluster " << c << " has mass " << mass;
      return msg.str();
    }
  }
  const auto& R = plan.reqs.requirements;
  for (std::size_t q = 0; q < R.size(); ++q) {
    std::vector<std::size_t> got;
    for (std::size_t b = 0; b < plan.block_cluster[q].size(); ++b) {
      const std::size_t c = plan.block_cluster[q][b];
      if (c == BlockPlan::kUncovered) continue;
      if (std::find(got.begin(), got.end(), c) != got.end()) return "two blocks of one requirement share a cluster";
      got.push_back(c);
      if (plan.clusters[c].radius > R[q].block_radius[b] + kTol.identity) return "block charged to a wider cluster";
    }
  }
  return {};
}

namespace {

std::size_t open_within(const UflInstance& g, std::size_t j, double limit, const std::vector<std::uint8_t>& open) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.num_facilities(); ++i)
    if (open[i] && g.c(i, j) <= limit) ++count;
  return count;
}

}  // namespace

RoundOutcome dependent_round_blocks(const BlockPlan& plan, Rng& rng) {
  const UflInstance& g = plan.inst->base;
  const std::size_t m = g.num_facilities();
  const int k = plan.reqs.k;
  RoundOutcome out;
  out.open.assign(m, 0);
  out.piece_open.assign(plan.pieces.size(), 0);
  for (std::size_t i = 0; i < m; ++i)
    if (plan.reqs.capped[i] || plan.structural_open[i]) out.open[i] = 1;
  std::vector<double> w;
  for (const BlockCluster& cl : plan.clusters) {
    w.clear();
    for (std::size_t s : cl.pieces) w.push_back(plan.pieces[s].ybar());
    out.piece_open[cl.pieces[rng.pick(w)]] = 1;
  }
  for (std::size_t s : plan.unclustered) out.piece_open[s] = rng.bernoulli(plan.pieces[s].ybar()) ? 1 : 0;
  for (std::size_t s = 0; s < plan.pieces.size(); ++s)
    if (out.piece_open[s]) out.open[plan.pieces[s].facility] = 1;

  std::vector<std::size_t> order;
  for (const Requirement& r : plan.reqs.requirements) {
    if (r.kind != RequirementCase::kBlocks) continue;
    const double limit = 3.0 * r.radius + kTol.identity * (1.0 + r.radius);
    std::size_t have = open_within(g, r.client, limit, out.open);
    if (have >= static_cast<std::size_t>(k) + 1) continue;
    order = r.prefix;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g.open_cost[a] < g.open_cost[b]; });
    for (std::size_t i : order) {
      if (have >= static_cast<std::size_t>(k) + 1) break;
      if (out.open[i]) continue;
      out.open[i] = 1;
      ++out.trial_fallback_opens;
      ++have;
    }
  }
  for (const Requirement& r : plan.reqs.requirements) {
    if (r.kind == RequirementCase::kDeterministic) {
      if (!out.open[r.deterministic]) throw GuaranteeViolation("deterministic facility closed");
      continue;
    }
    const double limit = 3.0 * r.radius_bound + kTol.identity * (1.0 + r.radius_bound);
    if (open_within(g, r.client, limit, out.open) < static_cast<std::size_t>(k) + 1) {
      std::ostringstream msg;
      msg << "client " << g.client_ids[r.client] << " has fewer than k+1 open facilities within 3x its radius bound";
      throw GuaranteeViolation(msg.str());
    }
  }
  return out;
}

RoundOutcome dependent_round_blocks(const BlockPlan& plan, std::uint64_t seed) {
  Rng rng(seed);
  return dependent_round_blocks(plan, rng);
}

AdversaryResult adversary_worst_case(const RobustInstance& inst, const std::vector<std::uint8_t>& open) {
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities(), n = g.num_clients();
  const std::size_t k = static_cast<std::size_t>(inst.k);
  std::vector<std::size_t> ids;
  AdversaryResult best;
  for (std::size_t i = 0; i < m; ++i)
    if (open[i]) {
      ids.push_back(i);
      best.opening += g.open_cost[i];
    }
  if (n > 0 && ids.size() <= k) throw InvalidInput("infeasible: at most k facilities are open");
  const std::size_t close = std::min(k, ids.size());
  // per client: the k+1 nearest open facilities, by (distance, index)
  const std::size_t keep = std::min(ids.size(), close + 1);
  std::vector<std::size_t> near(n * keep);
  std::vector<std::size_t> tmp;
  for (std::size_t j = 0; j < n; ++j) {
    tmp = ids;
    std::stable_sort(tmp.begin(), tmp.end(), [&](std::size_t a, std::size_t b) { return g.c(a, j) < g.c(b, j); });
    std::copy(tmp.begin(), tmp.begin() + static_cast<long>(keep), near.begin() + static_cast<long>(j * keep));
  }
  const auto subsets = enumerate_scenarios(ids.size(), close, kLimits.robust_scenario_cap);
  std::vector<char> closed(m, 0);
  double worst = -1.0;
  for (const auto& sub : subsets) {
    for (std::size_t s : sub) closed[ids[s]] = 1;
    double conn = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < keep; ++q) {
        const std::size_t i = near[j * keep + q];
        if (!closed[i]) {
          conn += g.c(i, j);
          break;
        }
      }
    }
    if (conn > worst) {
      worst = conn;
      best.closed.clear();
      for (std::size_t s : sub) best.closed.push_back(ids[s]);
    }
    for (std::size_t s : sub) closed[ids[s]] = 0;
  }
  best.connection = std::max(worst, 0.0);
  best.cost = best.opening + best.connection;
  return best;
}

void RobustTrialStats::merge(const RobustTrialStats& o) {
  trials += o.trials;
  cost.merge(o.cost);
  opening.merge(o.opening);
  connection.merge(o.connection);
  ratio.merge(o.ratio);
  ratio_violations += o.ratio_violations;
  fallback_trials += o.fallback_trials;
  fallback_opens += o.fallback_opens;
  for (std::size_t i = 0; i < facility_open.size(); ++i) facility_open[i] += o.facility_open[i];
  for (std::size_t s = 0; s < piece_open.size(); ++s) piece_open[s] += o.piece_open[s];
  trial_cost.insert(trial_cost.end(), o.trial_cost.begin(), o.trial_cost.end());
  trial_fallback.insert(trial_fallback.end(), o.trial_fallback.begin(), o.trial_fallback.end());
}

RobustRun round_robust(const RobustInstance& inst, const RobustFractional& frac, std::size_t trials,
                       std::uint64_t seed, double gamma, unsigned threads) {
  RobustRun run;
  run.gamma = gamma > 0.0 ? gamma : robust_gamma(inst.k);
  run.lp = frac.objective;
  run.plan = BlockPlan::prepare(inst, build_requirements(inst, frac, run.gamma));
  RobustTrialStats empty;
  empty.facility_open.assign(inst.base.num_facilities(), 0);
  empty.piece_open.assign(run.plan.pieces.size(), 0);
  const BlockPlan& plan = run.plan;
  const double cap = run.gamma * run.lp;
  const double lp = run.lp;
  run.stats = run_trials(
      trials, seed, empty,
      [&](RobustTrialStats& acc, std::size_t, Rng& rng) {
        const RoundOutcome rounded = dependent_round_blocks(plan, rng);
        const AdversaryResult adv = adversary_worst_case(inst, rounded.open);
        ++acc.trials;
        acc.cost.add(adv.cost);
        acc.opening.add(adv.opening);
        acc.connection.add(adv.connection);
        acc.ratio.add(lp > 0.0 ? adv.cost / lp : 1.0);
        if (adv.cost > cap + kTol.reported * (1.0 + cap)) ++acc.ratio_violations;
        if (rounded.trial_fallback_opens > 0) ++acc.fallback_trials;
        acc.fallback_opens += static_cast<std::int64_t>(rounded.trial_fallback_opens);
        for (std::size_t i = 0; i < rounded.open.size(); ++i) acc.facility_open[i] += rounded.open[i];
        for (std::size_t s = 0; s < rounded.piece_open.size(); ++s) acc.piece_open[s] += rounded.piece_open[s];
        acc.trial_cost.push_back(adv.cost);
        acc.trial_fallback.push_back(static_cast<std::int64_t>(rounded.trial_fallback_opens));
      },
      threads);
  return run;
}

void ObliviousStats::merge(const ObliviousStats& o) {
  trials += o.trials;
  for (std::size_t a = 0; a < conn.size(); ++a)
    for (std::size_t j = 0; j < conn[a].size(); ++j) conn[a][j].merge(o.conn[a][j]);
  backup_violations += o.backup_violations;
  for (std::size_t a = 0; a < scenario_backup_violations.size(); ++a)
    scenario_backup_violations[a] += o.scenario_backup_violations[a];
  fallback_opens += o.fallback_opens;
}

ObliviousRun round_oblivious(const RobustInstance& inst, const RobustFractional& frac, double gamma,
                             std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (!(gamma > 0.0)) throw InvalidInput("scale must be positive");
  if (!(gamma > inst.k + 1.0)) throw InvalidInput("oblivious rounding needs gamma > k + 1");
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities(), n = g.num_clients();
  const std::size_t S = frac.scenarios.size();
  ObliviousRun run;
  run.gamma = gamma;
  run.plan = BlockPlan::prepare(inst, build_requirements(inst, frac, gamma));
  run.analytic_factor = (1.0 - std::exp(-gamma)) + std::exp(-gamma) * 3.0 * robust_radius_factor(gamma, inst.k);
  run.C.assign(S, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < S; ++a) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* x = frac.x[a].data() + j * m;
      bool any = false, near = false;
      double C = 0.0;
      for (std::size_t i = 0; i < m; ++i) C += g.c(i, j) * x[i];
      for (std::size_t i = 0; i < m; ++i) {
        if (gamma * x[i] < 1.0 - kTol.snap) continue;
        any = true;
        near = near || g.c(i, j) <= gamma * C + kTol.identity;
      }
      run.C[a][j] = C;
      if (any && !near) ++run.otherwise_pairs;
    }
  }
  // client-major distances for the masked argmin
  std::vector<double> dist(n * m);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) dist[j * m + i] = g.c(i, j);
  ObliviousStats empty;
  empty.conn.assign(S, std::vector<RunningMoments>(n));
  empty.scenario_backup_violations.assign(S, 0);
  const BlockPlan& plan = run.plan;
  run.stats = run_trials(
      trials, seed, empty,
      [&](ObliviousStats& acc, std::size_t, Rng& rng) {
        const RoundOutcome rounded = dependent_round_blocks(plan, rng);
        acc.fallback_opens += static_cast<std::int64_t>(rounded.trial_fallback_opens);
        std::vector<std::uint8_t> mask(m);
        for (std::size_t a = 0; a < S; ++a) {
          mask = rounded.open;
          for (std::size_t i : frac.scenarios[a]) mask[i] = 0;
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = kernels::argmin_open({dist.data() + j * m, m}, mask);
            if (i == kernels::kNoIndex) throw GuaranteeViolation("no open facility survives a fixed scenario");
            const double c = dist[j * m + i];
            acc.conn[a][j].add(c);
            const Requirement& r = plan.reqs.requirements[a * n + j];
            const double limit = r.kind == RequirementCase::kBlocks ? 3.0 * r.radius_bound : r.radius;
            if (c > limit + kTol.identity * (1.0 + limit)) {
              ++acc.backup_violations;
              ++acc.scenario_backup_violations[a];
            }
          }
        }
        ++acc.trials;
      },
      threads);
  return run;
}

GapInstance gap_instance(std::size_t n, int k) {
  if (k < 1 || n <= static_cast<std::size_t>(k)) throw InvalidInput("gap instance needs n > k >= 1");
  GapInstance out;
  out.n = n;
  out.k = k;
  out.instance.k = k;
  out.instance.base = UflInstance::from_matrix(std::vector<double>(n, 1.0),
                                               std::vector<std::vector<double>>(n, std::vector<double>(1, 0.0)));
  return out;
}

}  // namespace flround
