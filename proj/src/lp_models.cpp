#include <algorithm>
#include <cmath>
#include <numeric>

#include "flround/config.hpp"
#include "flround/errors.hpp"
#include "flround/lp.hpp"

namespace flround {

namespace {

std::string idx(const UflInstance& inst, std::size_t i) { return std::to_string(inst.facility_ids[i]); }
std::string cdx(const UflInstance& inst, std::size_t j) { return std::to_string(inst.client_ids[j]); }

double clip01(double v) { return v < 0.0 ? 0.0 : v; }

void require_optimal(const LpSolution& sol) {
  if (sol.status != LpStatus::kOptimal) throw InvalidInput("LP solution is not optimal");
}

}  // namespace

LpProblem build_ufl_lp(const UflInstance& inst, UflLpIndex* index) {
  inst.validate();
  const std::size_t m = inst.num_facilities(), n = inst.num_clients();
  UflLpIndex ix{m, n};
  LpProblem p;
  for (std::size_t i = 0; i < m; ++i) p.add_var("y[" + idx(inst, i) + "]", inst.open_cost[i]);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) p.add_var("x[" + idx(inst, i) + "," + cdx(inst, j) + "]", inst.c(i, j));
  }
  for (std::size_t j = 0; j < n; ++j) {
    LpRow row{{}, Sense::kEq, 1.0, "assign[" + cdx(inst, j) + "]"};
    for (std::size_t i = 0; i < m; ++i) row.coef.push_back({ix.x(i, j), 1.0});
    p.add_row(std::move(row));
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      p.add_row({{{ix.x(i, j), 1.0}, {ix.y(i), -1.0}}, Sense::kLe, 0.0,
                 "link[" + idx(inst, i) + "," + cdx(inst, j) + "]"});
    }
  }
  if (index) *index = ix;
  return p;
}

FractionalUflSolution ufl_solution_from_lp(const UflInstance& inst, const LpSolution& sol) {
  require_optimal(sol);
  const std::size_t m = inst.num_facilities(), n = inst.num_clients();
  UflLpIndex ix{m, n};
  FractionalUflSolution out = FractionalUflSolution::over_originals(m, n);
  for (std::size_t i = 0; i < m; ++i) out.y[i] = clip01(sol.primal[ix.y(i)]);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) out.xv(j, i) = std::min(clip01(sol.primal[ix.x(i, j)]), out.y[i]);
  }
  return out;
}

LpProblem build_two_stage_lp(const TwoStageInstance& inst, TwoStageLpIndex* index) {
  inst.validate();
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities();
  const std::size_t s = inst.scenarios.size();
  for (const Scenario& sc : inst.scenarios) {
    if (sc.probability <= 0.0)
      throw InvalidInput("two-stage LP: scenario with zero probability (its dual budget cannot be recovered)");
  }
  TwoStageLpIndex ix;
  ix.m = m;
  ix.num_scenarios = s;
  LpProblem p;
  for (std::size_t i = 0; i < m; ++i) p.add_var("y[" + idx(g, i) + "]", g.open_cost[i]);
  for (std::size_t a = 0; a < s; ++a) {
    const Scenario& sc = inst.scenarios[a];
    for (std::size_t i = 0; i < m; ++i)
      p.add_var("y[A" + std::to_string(a) + "," + idx(g, i) + "]", sc.probability * sc.open_cost[i]);
  }
  for (std::size_t a = 0; a < s; ++a) {
    const Scenario& sc = inst.scenarios[a];
    ix.x_offset.push_back(p.num_vars());
    for (std::size_t j : sc.clients) {
      for (std::size_t i = 0; i < m; ++i)
        p.add_var("x[A" + std::to_string(a) + "," + idx(g, i) + "," + cdx(g, j) + "]", sc.probability * g.c(i, j));
    }
  }
  for (std::size_t a = 0; a < s; ++a) {
    const Scenario& sc = inst.scenarios[a];
    ix.assign_row.push_back(p.rows.size());
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      LpRow row{{}, Sense::kGe, 1.0, "assign[A" + std::to_string(a) + "," + cdx(g, sc.clients[jl]) + "]"};
      for (std::size_t i = 0; i < m; ++i) row.coef.push_back({ix.x(a, jl, i), 1.0});
      p.add_row(std::move(row));
    }
  }
  for (std::size_t a = 0; a < s; ++a) {
    const Scenario& sc = inst.scenarios[a];
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      for (std::size_t i = 0; i < m; ++i) {
        p.add_row({{{ix.x(a, jl, i), 1.0}, {ix.y(i), -1.0}, {ix.yA(a, i), -1.0}},
                   Sense::kLe,
                   0.0,
                   "link[A" + std::to_string(a) + "," + idx(g, i) + "," + cdx(g, sc.clients[jl]) + "]"});
      }
    }
  }
  if (index) *index = ix;
  return p;
}

TwoStageFractional two_stage_solution_from_lp(const TwoStageInstance& inst, const LpSolution& sol) {
  require_optimal(sol);
  TwoStageLpIndex ix;
  build_two_stage_lp(inst, &ix);
  const std::size_t m = inst.base.num_facilities();
  TwoStageFractional out;
  out.objective = sol.objective;
  out.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.y[i] = clip01(sol.primal[ix.y(i)]);
  const bool has_duals = sol.dual.size() >= ix.assign_row.back() + inst.scenarios.back().clients.size();
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    const Scenario& sc = inst.scenarios[a];
    std::vector<double> ya(m);
    for (std::size_t i = 0; i < m; ++i) ya[i] = clip01(sol.primal[ix.yA(a, i)]);
    std::vector<double> xa(sc.clients.size() * m);
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      for (std::size_t i = 0; i < m; ++i)
        xa[jl * m + i] = std::min(clip01(sol.primal[ix.x(a, jl, i)]), out.y[i] + ya[i]);
    }
    out.yA.push_back(std::move(ya));
    out.x.push_back(std::move(xa));
    if (has_duals) {
      std::vector<double> va(sc.clients.size());
      for (std::size_t jl = 0; jl < sc.clients.size(); ++jl)
        va[jl] = sol.dual[ix.assign_row[a] + jl] / sc.probability;
      out.v.push_back(std::move(va));
    }
  }
  return out;
}

DualBudgets extract_dual_budgets(const TwoStageInstance& inst, const LpSolution& sol) {
  require_optimal(sol);
  TwoStageLpIndex ix;
  build_two_stage_lp(inst, &ix);
  DualBudgets out;
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    const Scenario& sc = inst.scenarios[a];
    std::vector<double> va(sc.clients.size());
    double V = 0.0;
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      va[jl] = sol.dual.at(ix.assign_row[a] + jl) / sc.probability;
      V += va[jl];
    }
    out.v.push_back(std::move(va));
    out.V.push_back(V);
    out.weighted_total += sc.probability * V;
  }
  return out;
}

CostDecomposition decompose_two_stage(const TwoStageInstance& inst, const TwoStageFractional& frac) {
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities();
  CostDecomposition out;
  double first = 0.0;
  for (std::size_t i = 0; i < m; ++i) first += g.open_cost[i] * frac.y[i];
  out.F_star = first;
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    const Scenario& sc = inst.scenarios[a];
    ScenarioCosts s;
    s.F_A = first;
    for (std::size_t i = 0; i < m; ++i) s.F_A += sc.open_cost[i] * frac.yA[a][i];
    for (std::size_t jl = 0; jl < sc.clients.size(); ++jl) {
      for (std::size_t i = 0; i < m; ++i) s.C_A += g.c(i, sc.clients[jl]) * frac.x[a][jl * m + i];
    }
    if (!frac.v.empty()) {
      for (double v : frac.v[a]) s.V_A += v;
    }
    s.Val_A = s.F_A + s.C_A;
    out.F_star += sc.probability * (s.F_A - first);
    out.C_star += sc.probability * s.C_A;
    out.scenarios.push_back(s);
  }
  return out;
}

std::vector<std::vector<std::size_t>> enumerate_scenarios(std::size_t n, std::size_t k, std::int64_t cap) {
  if (k > n) throw InvalidInput("cannot choose more facilities than exist");
  // C(n, k) with an early exit once the cap is passed.
  double count = 1.0;
  for (std::size_t t = 0; t < k; ++t) {
    count = count * static_cast<double>(n - t) / static_cast<double>(t + 1);
    if (count > static_cast<double>(cap) + 0.5) break;
  }
  if (count > static_cast<double>(cap) + 0.5)
    throw CapExceeded("C(" + std::to_string(n) + "," + std::to_string(k) + ") scenarios exceed the cap of " +
                      std::to_string(cap));
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    out.push_back(cur);
    if (k == 0) break;
    std::size_t t = k;
    while (t > 0 && cur[t - 1] == n - k + t - 1) --t;
    if (t == 0) break;
    ++cur[t - 1];
    for (std::size_t u = t; u < k; ++u) cur[u] = cur[u - 1] + 1;
  }
  return out;
}

LpProblem build_robust_lp(const RobustInstance& inst, RobustLpIndex* index) {
  inst.validate();
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities(), n = g.num_clients();
  RobustLpIndex ix;
  ix.m = m;
  ix.n = n;
  ix.scenarios = enumerate_scenarios(m, static_cast<std::size_t>(inst.k), kLimits.robust_scenario_cap);
  LpProblem p;
  for (std::size_t i = 0; i < m; ++i) p.add_var("y[" + idx(g, i) + "]", g.open_cost[i]);
  p.add_var("t", 1.0);
  for (std::size_t a = 0; a < ix.scenarios.size(); ++a) {
    std::vector<char> closed(m, 0);
    for (std::size_t i : ix.scenarios[a]) closed[i] = 1;
    std::vector<std::size_t> xi(n * m, RobustLpIndex::kAbsent);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (closed[i]) continue;
        xi[j * m + i] = p.add_var("x[A" + std::to_string(a) + "," + idx(g, i) + "," + cdx(g, j) + "]", 0.0);
      }
    }
    ix.x_index.push_back(std::move(xi));
  }
  for (std::size_t a = 0; a < ix.scenarios.size(); ++a) {
    const auto& xi = ix.x_index[a];
    const std::string tag = "A" + std::to_string(a);
    for (std::size_t j = 0; j < n; ++j) {
      LpRow row{{}, Sense::kGe, 1.0, "assign[" + tag + "," + cdx(g, j) + "]"};
      for (std::size_t i = 0; i < m; ++i) {
        if (xi[j * m + i] != RobustLpIndex::kAbsent) row.coef.push_back({xi[j * m + i], 1.0});
      }
      p.add_row(std::move(row));
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (xi[j * m + i] == RobustLpIndex::kAbsent) continue;
        p.add_row({{{xi[j * m + i], 1.0}, {ix.y(i), -1.0}}, Sense::kLe, 0.0,
                   "link[" + tag + "," + idx(g, i) + "," + cdx(g, j) + "]"});
      }
    }
    LpRow trow{{{ix.t(), -1.0}}, Sense::kLe, 0.0, "worst[" + tag + "]"};
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (xi[j * m + i] != RobustLpIndex::kAbsent && g.c(i, j) != 0.0) trow.coef.push_back({xi[j * m + i], g.c(i, j)});
      }
    }
    p.add_row(std::move(trow));
  }
  if (index) *index = std::move(ix);
  return p;
}

RobustFractional robust_solution_from_lp(const RobustInstance& inst, const LpSolution& sol,
                                         const RobustLpIndex& index) {
  require_optimal(sol);
  const std::size_t m = index.m, n = index.n;
  RobustFractional out;
  out.objective = sol.objective;
  out.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.y[i] = clip01(sol.primal[index.y(i)]);
  out.t = clip01(sol.primal[index.t()]);
  out.scenarios = index.scenarios;
  for (std::size_t a = 0; a < index.scenarios.size(); ++a) {
    std::vector<double> xa(n * m, 0.0);
    for (std::size_t e = 0; e < n * m; ++e) {
      const std::size_t v = index.x_index[a][e];
      if (v != RobustLpIndex::kAbsent) xa[e] = std::min(clip01(sol.primal[v]), out.y[e % m]);
    }
    out.x.push_back(std::move(xa));
  }
  (void)inst;
  return out;
}

namespace {

// Nearest-first fractional assignment of client j under openings y with the
// facilities in `closed` removed. Returns the cost and the threshold
// distance u at which the unit demand is met; x_out (if given) receives the
// assignment. Infinite cost when the surviving mass is below one.
struct Fill {
  double cost = 0.0;
  double threshold = 0.0;
  bool feasible = true;
};

Fill nearest_fill(const UflInstance& g, const std::vector<double>& y, const std::vector<std::size_t>& order_j,
                  std::size_t j, const std::vector<char>& closed, double* x_out) {
  Fill f;
  double need = 1.0;
  const std::size_t m = g.num_facilities();
  for (std::size_t i : order_j) {
    if (closed[i] || y[i] <= 0.0) continue;
    const double take = std::min(need, y[i]);
    f.cost += take * g.c(i, j);
    f.threshold = g.c(i, j);
    if (x_out) x_out[j * m + i] = take;
    need -= take;
    if (need <= 1e-12) {
      need = 0.0;
      break;
    }
  }
  if (need > kTol.feasibility) f.feasible = false;
  return f;
}

}  // namespace

RobustFractional solve_robust_lp_cuts(const RobustInstance& inst) {
  inst.validate();
  const UflInstance& g = inst.base;
  const std::size_t m = g.num_facilities(), n = g.num_clients();
  RobustFractional out;
  out.via_cuts = true;
  out.scenarios = enumerate_scenarios(m, static_cast<std::size_t>(inst.k), kLimits.robust_scenario_cap);
  std::vector<std::vector<std::size_t>> order(n);
  for (std::size_t j = 0; j < n; ++j) {
    order[j].resize(m);
    std::iota(order[j].begin(), order[j].end(), 0);
    std::stable_sort(order[j].begin(), order[j].end(),
                     [&](std::size_t a, std::size_t b) { return g.c(a, j) < g.c(b, j); });
  }
  // Cuts are rows  sum_i a_i y_i + a_t t >= rhs  of the master problem.
  struct Cut {
    std::vector<double> a;  // m + 1 coefficients
    double rhs;
  };
  std::vector<Cut> cuts;
  std::vector<double> y(m, 0.0);
  double t = 0.0;
  const double scale = 1.0 + std::accumulate(g.open_cost.begin(), g.open_cost.end(), 0.0) +
                       std::accumulate(g.conn.begin(), g.conn.end(), 0.0);
  std::vector<char> closed(m, 0);
  for (int round = 0;; ++round) {
    if (round > 10000) throw NumericalError("robust cut loop did not converge");
    struct Candidate {
      double violation;
      std::size_t scenario;
      bool feasibility;
    };
    std::vector<Candidate> found;
    double worst = 0.0;
    for (std::size_t a = 0; a < out.scenarios.size(); ++a) {
      std::fill(closed.begin(), closed.end(), 0);
      for (std::size_t i : out.scenarios[a]) closed[i] = 1;
      if (n > 0) {
        double mass = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (!closed[i]) mass += y[i];
        }
        if (mass < 1.0 - 1e-9) {
          found.push_back({1.0 - mass, a, true});
          continue;
        }
      }
      double q = 0.0;
      for (std::size_t j = 0; j < n; ++j) q += nearest_fill(g, y, order[j], j, closed, nullptr).cost;
      worst = std::max(worst, q);
      if (q > t + 1e-10 * scale) found.push_back({q - t, a, false});
    }
    if (found.empty()) {
      out.t = worst;
      out.cut_rounds = round;
      break;
    }
    std::stable_sort(found.begin(), found.end(), [](const Candidate& l, const Candidate& r) {
      if (l.feasibility != r.feasibility) return l.feasibility;
      return l.violation > r.violation;
    });
    if (found.size() > 64) found.resize(64);
    for (const Candidate& cand : found) {
      std::fill(closed.begin(), closed.end(), 0);
      for (std::size_t i : out.scenarios[cand.scenario]) closed[i] = 1;
      Cut cut{std::vector<double>(m + 1, 0.0), 0.0};
      if (cand.feasibility) {
        for (std::size_t i = 0; i < m; ++i) cut.a[i] = closed[i] ? 0.0 : 1.0;
        cut.rhs = 1.0;
      } else {
        // t >= sum_j [u_j - sum_{i notin A} y_i (u_j - c_ij)^+]
        cut.a[m] = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double u = nearest_fill(g, y, order[j], j, closed, nullptr).threshold;
          cut.rhs += u;
          for (std::size_t i = 0; i < m; ++i) {
            if (!closed[i] && u > g.c(i, j)) cut.a[i] += u - g.c(i, j);
          }
        }
      }
      cuts.push_back(std::move(cut));
    }
    // Master  min f.y + t  s.t. cuts, y, t >= 0  solved through its dual:
    //   min -rhs.lambda  s.t.  sum_c a_c lambda_c <= (f, 1),  lambda >= 0.
    LpProblem dual;
    for (std::size_t c = 0; c < cuts.size(); ++c) dual.add_var("cut" + std::to_string(c), -cuts[c].rhs);
    for (std::size_t r = 0; r <= m; ++r) {
      LpRow row{{}, Sense::kLe, r < m ? g.open_cost[r] : 1.0, r < m ? "y" + std::to_string(r) : "t"};
      for (std::size_t c = 0; c < cuts.size(); ++c) {
        if (cuts[c].a[r] != 0.0) row.coef.push_back({c, cuts[c].a[r]});
      }
      dual.add_row(std::move(row));
    }
    const LpSolution ms = solve_lp(dual);
    if (ms.status != LpStatus::kOptimal) throw NumericalError("robust master problem has no optimal solution");
    for (std::size_t i = 0; i < m; ++i) y[i] = std::max(0.0, -ms.dual[i]);
    t = std::max(0.0, -ms.dual[m]);
  }
  out.y = y;
  out.x.reserve(out.scenarios.size());
  for (const auto& sc : out.scenarios) {
    std::fill(closed.begin(), closed.end(), 0);
    for (std::size_t i : sc) closed[i] = 1;
    std::vector<double> xa(n * m, 0.0);
    for (std::size_t j = 0; j < n; ++j) nearest_fill(g, y, order[j], j, closed, xa.data());
    out.x.push_back(std::move(xa));
  }
  out.objective = out.t;
  for (std::size_t i = 0; i < m; ++i) out.objective += g.open_cost[i] * y[i];
  return out;
}

RobustFractional solve_robust_lp(const RobustInstance& inst) {
  inst.validate();
  const std::size_t m = inst.base.num_facilities(), n = inst.base.num_clients();
  const auto scen = enumerate_scenarios(m, static_cast<std::size_t>(inst.k), kLimits.robust_scenario_cap);
  const std::size_t rows = scen.size() * (n + n * m + 1);
  if (rows <= 2500) {
    RobustLpIndex ix;
    const LpProblem p = build_robust_lp(inst, &ix);
    return robust_solution_from_lp(inst, solve_lp(p), ix);
  }
  return solve_robust_lp_cuts(inst);
}

}  // namespace flround
