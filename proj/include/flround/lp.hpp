#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flround/core_model.hpp"

namespace flround {

enum class Sense { kLe, kEq, kGe };

struct LpRow {
  std::vector<std::pair<std::size_t, double>> coef;
  Sense sense = Sense::kGe;
  double rhs = 0.0;
  std::string name;
};

// min c^T x subject to rows, x >= 0.
struct LpProblem {
  std::vector<double> objective;
  std::vector<std::string> var_names;
  std::vector<LpRow> rows;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t add_var(std::string name, double cost);
  std::size_t add_row(LpRow row);
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResiduals {
  double primal = 0.0;       // max constraint / bound violation
  double dual = 0.0;         // max reduced-cost or dual-sign violation
  double gap = 0.0;          // |c^T x - b^T y|
  double comp_slack = 0.0;   // max |y_r * slack_r| and |x_j * d_j|
};

// Duals follow the minimisation convention: >= rows carry y >= 0, <= rows
// y <= 0, equality rows are free, and c - A^T y >= 0 at optimality.
struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;
  // Unbounded: a primal ray. Infeasible: the phase-one row multipliers.
  std::vector<double> certificate;
  LpResiduals residuals;
  std::int64_t iterations = 0;
};

// Dense two-phase revised simplex. Throws NumericalError when the iteration
// guard trips or an optimal answer fails its residual checks.
LpSolution solve_lp(const LpProblem& p);

// Fixed-column MPS.
void write_mps(const LpProblem& p, std::ostream& out, const std::string& name = "FLROUND");

// ---- UFL ----

struct UflLpIndex {
  std::size_t m = 0, n = 0;
  std::size_t y(std::size_t i) const { return i; }
  std::size_t x(std::size_t i, std::size_t j) const { return m + j * m + i; }
};

LpProblem build_ufl_lp(const UflInstance& inst, UflLpIndex* index = nullptr);

// Reads y*, x* back; tiny negative noise is clipped to zero.
FractionalUflSolution ufl_solution_from_lp(const UflInstance& inst, const LpSolution& sol);

// ---- two-stage ----

struct TwoStageLpIndex {
  std::size_t m = 0;
  std::size_t num_scenarios = 0;
  std::vector<std::size_t> x_offset;       // per scenario
  std::vector<std::size_t> assign_row;     // per scenario, first assignment row
  std::size_t y(std::size_t i) const { return i; }
  std::size_t yA(std::size_t a, std::size_t i) const { return m + a * m + i; }
  // jl is the position of the client inside the scenario's client list.
  std::size_t x(std::size_t a, std::size_t jl, std::size_t i) const { return x_offset[a] + jl * m + i; }
};

LpProblem build_two_stage_lp(const TwoStageInstance& inst, TwoStageLpIndex* index = nullptr);

struct TwoStageFractional {
  std::vector<double> y;                 // first stage
  std::vector<std::vector<double>> yA;   // [scenario][facility]
  std::vector<std::vector<double>> x;    // [scenario][jl * m + i]
  std::vector<std::vector<double>> v;    // [scenario][jl]; empty without duals
  double objective = 0.0;
};

TwoStageFractional two_stage_solution_from_lp(const TwoStageInstance& inst, const LpSolution& sol);

struct DualBudgets {
  std::vector<std::vector<double>> v;  // [scenario][jl]
  std::vector<double> V;               // per scenario
  double weighted_total = 0.0;         // sum_A p_A V_A
};

// v_jA = dual of the assignment row / p_A. Throws InvalidInput for a
// non-optimal solution.
DualBudgets extract_dual_budgets(const TwoStageInstance& inst, const LpSolution& sol);

// F*, C* and the per-scenario F_A, C_A, Val_A (and V_A when duals exist).
CostDecomposition decompose_two_stage(const TwoStageInstance& inst, const TwoStageFractional& frac);

// ---- robust ----

// All k-subsets of {0..n-1} in lexicographic order. Throws CapExceeded when
// there are more than `cap`.
std::vector<std::vector<std::size_t>> enumerate_scenarios(std::size_t n, std::size_t k,
                                                          std::int64_t cap);

struct RobustLpIndex {
  std::size_t m = 0, n = 0;
  std::vector<std::vector<std::size_t>> scenarios;
  // x_index[a][j * m + i], or kAbsent for i in the scenario.
  std::vector<std::vector<std::size_t>> x_index;
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::size_t y(std::size_t i) const { return i; }
  std::size_t t() const { return m; }
};

LpProblem build_robust_lp(const RobustInstance& inst, RobustLpIndex* index = nullptr);

struct RobustFractional {
  std::vector<double> y;
  double t = 0.0;
  std::vector<std::vector<std::size_t>> scenarios;
  std::vector<std::vector<double>> x;  // [scenario][j * m + i]
  double objective = 0.0;
  bool via_cuts = false;
  std::int64_t cut_rounds = 0;
};

RobustFractional robust_solution_from_lp(const RobustInstance& inst, const LpSolution& sol,
                                         const RobustLpIndex& index);

// Exact scenario separation: a master over (y, t) receives feasibility cuts
// sum_{i notin A} y_i >= 1 and optimality cuts derived from the closed-form
// dual of each scenario's assignment problem. Every scenario is examined in
// every round; x* is filled in by nearest-first assignment under y.
RobustFractional solve_robust_lp_cuts(const RobustInstance& inst);

// Explicit model when it is small enough for the dense solver, cut route
// otherwise.
RobustFractional solve_robust_lp(const RobustInstance& inst);

}  // namespace flround
