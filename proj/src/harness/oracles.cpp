#include "flround/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flround/config.hpp"
#include "flround/errors.hpp"
#include "flround/robust.hpp"

namespace flround {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> members(std::uint32_t mask, std::size_t m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m; ++i)
    if (mask >> i & 1u) out.push_back(i);
  return out;
}

}  // namespace

IntegralUflSolution brute_force_ufl(const UflInstance& inst) {
  inst.validate();
  const std::size_t m = inst.num_facilities(), n = inst.num_clients();
  if (m > static_cast<std::size_t>(kLimits.brute_ufl_max_facilities)) {
    std::ostringstream msg;
    msg << "brute force UFL is capped at " << kLimits.brute_ufl_max_facilities << " facilities, got " << m;
    throw CapExceeded(msg.str());
  }
  double best = kInf;
  std::uint32_t best_mask = 0;
  const std::uint32_t full = m == 32 ? ~0u : (1u << m) - 1u;
  std::vector<double> near(n);
  for (std::uint32_t mask = 1; mask <= full && mask != 0; ++mask) {
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1u) cost += inst.open_cost[i];
    if (cost >= best) continue;
    for (std::size_t j = 0; j < n && cost < best; ++j) {
      double d = kInf;
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1u) d = std::min(d, inst.c(i, j));
      cost += d;
    }
    if (cost < best) {
      best = cost;
      best_mask = mask;
    }
  }
  IntegralUflSolution sol;
  sol.open = members(best_mask, m);
  sol.assign.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t arg = sol.open.front();
    for (std::size_t i : sol.open)
      if (inst.c(i, j) < inst.c(arg, j)) arg = i;
    sol.assign[j] = arg;
  }
  return sol;
}

TwoStageOptimum brute_force_two_stage(const TwoStageInstance& inst) {
  inst.validate();
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities();
  const std::size_t S = inst.scenarios.size();
  if (m > static_cast<std::size_t>(kLimits.brute_two_stage_max_facilities) ||
      S > static_cast<std::size_t>(kLimits.brute_two_stage_max_scenarios)) {
    std::ostringstream msg;
    msg << "brute force two-stage is capped at " << kLimits.brute_two_stage_max_facilities << " facilities and "
        << kLimits.brute_two_stage_max_scenarios << " scenarios, got " << m << " and " << S;
    throw CapExceeded(msg.str());
  }
  const std::size_t subsets = std::size_t{1} << m;
  auto mask_cost = [&](const std::vector<double>& f, std::size_t mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1u) s += f[i];
    return s;
  };
  // best[a][S1] = min over U >= S1 of H_a(U), with the minimizing U
  std::vector<std::vector<double>> best(S, std::vector<double>(subsets));
  std::vector<std::vector<std::uint32_t>> arg(S, std::vector<std::uint32_t>(subsets));
  for (std::size_t a = 0; a < S; ++a) {
    const Scenario& sc = inst.scenarios[a];
    for (std::size_t U = 0; U < subsets; ++U) {
      double h = mask_cost(sc.open_cost, U);
      for (std::size_t j : sc.clients) {
        double d = kInf;
        for (std::size_t i = 0; i < m; ++i)
          if (U >> i & 1u) d = std::min(d, g.c(i, j));
        h += d;
      }
      best[a][U] = h;
      arg[a][U] = static_cast<std::uint32_t>(U);
    }
    for (std::size_t bit = 0; bit < m; ++bit) {
      for (std::size_t U = 0; U < subsets; ++U) {
        if (U >> bit & 1u) continue;
        const std::size_t V = U | (std::size_t{1} << bit);
        if (best[a][V] < best[a][U]) {
          best[a][U] = best[a][V];
          arg[a][U] = arg[a][V];
        }
      }
    }
  }
  TwoStageOptimum out;
  out.cost = kInf;
  std::size_t winner = 0;
  for (std::size_t S1 = 0; S1 < subsets; ++S1) {
    double cost = mask_cost(g.open_cost, S1);
    for (std::size_t a = 0; a < S; ++a)
      cost += inst.scenarios[a].probability * (best[a][S1] - mask_cost(inst.scenarios[a].open_cost, S1));
    if (cost < out.cost) {
      out.cost = cost;
      winner = S1;
    }
  }
  out.first_stage = members(static_cast<std::uint32_t>(winner), m);
  for (std::size_t a = 0; a < S; ++a)
    out.second_stage.push_back(members(arg[a][winner] & ~static_cast<std::uint32_t>(winner), m));
  return out;
}

namespace {

struct RobustSearch {
  explicit RobustSearch(const RobustInstance& r)
      : inst(r), m(r.base.num_facilities()), n(r.base.num_clients()), k(static_cast<std::size_t>(r.k)) {}

  const RobustInstance& inst;
  std::size_t m, n, k;
  std::vector<std::size_t> by_cost;  // facilities by opening cost
  std::vector<std::uint8_t> state;   // 0 excluded, 1 included, 2 undecided
  double best = kInf;
  std::vector<std::size_t> best_open;
  std::int64_t nodes = 0;
  std::vector<std::size_t> reach;
  std::vector<std::uint8_t> closed;

  // Connection after closing the k nearest reachable facilities of one
  // client, maximized over clients.
  double connection_bound() {
    reach.clear();
    for (std::size_t i = 0; i < m; ++i)
      if (state[i] != 0) reach.push_back(i);
    if (reach.size() <= k) return kInf;
    if (n == 0) return 0.0;
    double worst = 0.0;
    std::vector<std::size_t> order;
    for (std::size_t t = 0; t < n; ++t) {
      order = reach;
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                        [&](std::size_t a, std::size_t b) { return inst.base.c(a, t) < inst.base.c(b, t); });
      for (std::size_t q = 0; q < k; ++q) closed[order[q]] = 1;
      double conn = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double d = kInf;
        for (std::size_t i : reach)
          if (!closed[i]) d = std::min(d, inst.base.c(i, j));
        conn += d;
      }
      for (std::size_t q = 0; q < k; ++q) closed[order[q]] = 0;
      worst = std::max(worst, conn);
    }
    return worst;
  }

  double lower_bound(std::size_t depth, double committed) {
    std::size_t have = 0;
    for (std::size_t i = 0; i < depth; ++i) have += state[i] == 1;
    double lb = committed;
    if (n > 0 && have < k + 1) {
      std::size_t need = k + 1 - have;
      for (std::size_t i : by_cost) {
        if (need == 0) break;
        if (i >= depth) {
          lb += inst.base.open_cost[i];
          --need;
        }
      }
      if (need > 0) return kInf;
    }
    return lb + connection_bound();
  }

  void dfs(std::size_t depth, double committed) {
    if (++nodes > kLimits.brute_robust_node_budget)
      throw CapExceeded("brute force robust exceeded its node budget");
    if (lower_bound(depth, committed) >= best) return;
    if (depth == m) {
      std::vector<std::uint8_t> open(m);
      for (std::size_t i = 0; i < m; ++i) open[i] = state[i] == 1;
      const AdversaryResult adv = adversary_worst_case(inst, open);
      if (adv.cost < best) {
        best = adv.cost;
        best_open.clear();
        for (std::size_t i = 0; i < m; ++i)
          if (open[i]) best_open.push_back(i);
      }
      return;
    }
    state[depth] = 0;
    dfs(depth + 1, committed);
    state[depth] = 1;
    dfs(depth + 1, committed + inst.base.open_cost[depth]);
    state[depth] = 2;
  }
};

}  // namespace

RobustOptimum brute_force_robust(const RobustInstance& inst) {
  inst.validate();
  RobustSearch s(inst);
  s.by_cost.resize(s.m);
  for (std::size_t i = 0; i < s.m; ++i) s.by_cost[i] = i;
  std::stable_sort(s.by_cost.begin(), s.by_cost.end(),
                   [&](std::size_t a, std::size_t b) { return inst.base.open_cost[a] < inst.base.open_cost[b]; });
  s.state.assign(s.m, 2);
  s.closed.assign(s.m, 0);
  s.dfs(0, 0.0);
  RobustOptimum out;
  out.cost = s.best;
  out.open = s.best_open;
  out.nodes = s.nodes;
  return out;
}

}  // namespace flround
