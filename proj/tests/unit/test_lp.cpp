#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "flround/errors.hpp"
#include "flround/generate.hpp"
#include "flround/lp.hpp"
#include "flround/oracles.hpp"
#include "flround/robust.hpp"

using namespace flround;
using flround::testing::divergent_instance;
using flround::testing::two_distance_ufl;

namespace {

LpRow row(std::vector<std::pair<std::size_t, double>> coef, Sense s, double rhs) {
  return {std::move(coef), s, rhs, {}};
}

// c - A^T y >= 0 with the sign convention of the solver, and b^T y = c^T x.
void check_duals(const LpProblem& p, const LpSolution& s) {
  std::vector<double> reduced = p.objective;
  double by = 0.0;
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const double y = s.dual[r];
    if (p.rows[r].sense == Sense::kGe) CHECK(y >= -1e-9);
    if (p.rows[r].sense == Sense::kLe) CHECK(y <= 1e-9);
    for (const auto& [v, a] : p.rows[r].coef) reduced[v] -= a * y;
    by += p.rows[r].rhs * y;
  }
  for (double d : reduced) CHECK(d >= -1e-9);
  CHECK(by == doctest::Approx(s.objective).epsilon(1e-9));
}

}  // namespace

TEST_CASE("simplex: small optimal problem with duals") {
  LpProblem p;
  const auto x = p.add_var("x", -1), y = p.add_var("y", -2);
  p.add_row(row({{x, 1}, {y, 1}}, Sense::kLe, 4));
  p.add_row(row({{x, 1}, {y, 3}}, Sense::kLe, 6));
  p.add_row(row({{x, 1}}, Sense::kGe, 1));
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(-5.0));
  CHECK(s.primal[x] == doctest::Approx(3.0));
  CHECK(s.primal[y] == doctest::Approx(1.0));
  check_duals(p, s);
  CHECK(s.residuals.primal <= 1e-9);
}

TEST_CASE("simplex: infeasible and unbounded") {
  LpProblem inf;
  const auto a = inf.add_var("a", 1);
  inf.add_row(row({{a, 1}}, Sense::kGe, 2));
  inf.add_row(row({{a, 1}}, Sense::kLe, 1));
  const LpSolution si = solve_lp(inf);
  CHECK(si.status == LpStatus::kInfeasible);
  CHECK_FALSE(si.certificate.empty());

  LpProblem unb;
  const auto u = unb.add_var("u", -1), v = unb.add_var("v", 0);
  unb.add_row(row({{u, 1}, {v, -1}}, Sense::kLe, 1));
  const LpSolution su = solve_lp(unb);
  REQUIRE(su.status == LpStatus::kUnbounded);
  REQUIRE(su.certificate.size() == 2);
  // A ray: stays feasible and decreases the objective.
  CHECK(su.certificate[u] - su.certificate[v] <= 1e-9);
  CHECK(-su.certificate[u] < 0.0);
}

TEST_CASE("simplex: degenerate cycling example terminates") {
  // Beale's example cycles under the textbook rule.
  LpProblem p;
  const auto x4 = p.add_var("x4", -0.75), x5 = p.add_var("x5", 20), x6 = p.add_var("x6", -0.5),
             x7 = p.add_var("x7", 6);
  p.add_row(row({{x4, 0.25}, {x5, -8}, {x6, -1}, {x7, 9}}, Sense::kLe, 0));
  p.add_row(row({{x4, 0.5}, {x5, -12}, {x6, -0.5}, {x7, 3}}, Sense::kLe, 0));
  p.add_row(row({{x6, 1}}, Sense::kLe, 1));
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(-1.25));
  check_duals(p, s);
}

TEST_CASE("simplex: equality rows and redundant constraints") {
  LpProblem p;
  const auto a = p.add_var("a", 1), b = p.add_var("b", 2);
  p.add_row(row({{a, 1}, {b, 1}}, Sense::kEq, 2));
  p.add_row(row({{a, 2}, {b, 2}}, Sense::kEq, 4));
  p.add_row(row({{a, 1}}, Sense::kLe, 1.5));
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(2.5));
}

TEST_CASE("UFL LP: three facilities, one client") {
  const UflInstance t3 = UflInstance::from_matrix({1, 1, 1}, {{1}, {2}, {3}});
  UflLpIndex ix;
  const LpProblem p = build_ufl_lp(t3, &ix);
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.primal[ix.y(0)] == doctest::Approx(1.0));
  check_duals(p, s);
  const FractionalUflSolution f = ufl_solution_from_lp(t3, s);
  CHECK(check_fractional(t3, f).empty());
}

TEST_CASE("UFL LP never exceeds the brute-force optimum") {
  int fractional = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const UflInstance inst = seed % 2 ? two_distance_ufl(seed, 6, 8)
                                      : generate_euclidean_instance({6, 8, seed, 100.0, 10.0, 60.0});
    const LpSolution s = solve_lp(build_ufl_lp(inst));
    REQUIRE(s.status == LpStatus::kOptimal);
    const double ip = solution_cost(inst, brute_force_ufl(inst)).total;
    CHECK(s.objective <= ip + 1e-7);
    fractional += s.objective < ip - 1e-7;
  }
  CHECK(fractional > 0);
}

TEST_CASE("two-stage LP and dual budgets") {
  SUBCASE("c(c1, f2) = 3") {
    const TwoStageInstance ts = divergent_instance(3);
    const LpSolution s = solve_lp(build_two_stage_lp(ts));
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(2.1).epsilon(1e-9));
    const CostDecomposition cd = decompose_two_stage(ts, two_stage_solution_from_lp(ts, s));
    CHECK(cd.scenarios[0].Val_A == doctest::Approx(3.1));
    CHECK(cd.scenarios[1].Val_A == doctest::Approx(1.1));
  }
  SUBCASE("c(c1, f2) = 5") {
    const TwoStageInstance ts = divergent_instance(5);
    const LpSolution s = solve_lp(build_two_stage_lp(ts));
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-9));
    const DualBudgets b = extract_dual_budgets(ts, s);
    CHECK(b.V[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(b.V[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(b.weighted_total == doctest::Approx(3.0).epsilon(1e-9));
    const CostDecomposition cd = decompose_two_stage(ts, two_stage_solution_from_lp(ts, s));
    CHECK(cd.scenarios[0].Val_A == doctest::Approx(3.0));
    CHECK(cd.scenarios[1].Val_A == doctest::Approx(3.0));
    CHECK(cd.scenarios[0].V_A > cd.scenarios[0].Val_A);
    CHECK(cd.F_star + cd.C_star == doctest::Approx(3.0));
  }
}

TEST_CASE("two-stage LP: sum_A p_A V_A equals the optimum on random instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TwoStageSpec spec;
    spec.base = {5, 6, seed, 100.0, 10.0, 60.0};
    const TwoStageInstance ts = generate_two_stage_instance(spec);
    const LpSolution s = solve_lp(build_two_stage_lp(ts));
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(extract_dual_budgets(ts, s).weighted_total == doctest::Approx(s.objective).epsilon(1e-7));
    CHECK(s.objective <= brute_force_two_stage(ts).cost + 1e-7);
  }
}

TEST_CASE("scenario enumeration") {
  CHECK(enumerate_scenarios(4, 2, 100).size() == 6);
  CHECK(enumerate_scenarios(5, 0, 100).size() == 1);
  const auto s = enumerate_scenarios(6, 1, 100);
  REQUIRE(s.size() == 6);
  CHECK(s.front() == std::vector<std::size_t>{0});
  CHECK(enumerate_scenarios(4, 2, 100)[1] == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(enumerate_scenarios(30, 10, 1000), CapExceeded);
}

TEST_CASE("robust LP: explicit model and scenario cuts agree") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const RobustInstance r = generate_robust_instance({5, 4, seed, 100.0, 10.0, 60.0}, 1 + seed % 2);
    RobustLpIndex ix;
    const LpProblem p = build_robust_lp(r, &ix);
    const LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::kOptimal);
    const RobustFractional cuts = solve_robust_lp_cuts(r);
    CHECK(cuts.via_cuts);
    CHECK(cuts.objective == doctest::Approx(s.objective).epsilon(1e-7));
    CHECK(s.objective <= brute_force_robust(r).cost + 1e-7);
  }
  for (std::size_t n : {4u, 10u}) {
    const GapInstance gi = gap_instance(n, 1);
    CHECK(solve_lp(build_robust_lp(gi.instance)).objective == doctest::Approx(gi.lp_value()).epsilon(1e-12));
    CHECK(solve_robust_lp_cuts(gi.instance).objective == doctest::Approx(gi.lp_value()).epsilon(1e-12));
  }
}

TEST_CASE("MPS output lists every row and column") {
  const UflInstance t3 = UflInstance::from_matrix({1, 1, 1}, {{1}, {2}, {3}});
  const LpProblem p = build_ufl_lp(t3);
  std::ostringstream out;
  write_mps(p, out, "T3");
  const std::string mps = out.str();
  CHECK(mps.rfind("NAME          T3\n", 0) == 0);
  CHECK(mps.find("ROWS\n N  COST\n") != std::string::npos);
  CHECK(mps.find(" E  R0\n L  R1\n") != std::string::npos);
  CHECK(mps.find("    RHS       R0        1\n") != std::string::npos);
  CHECK(mps.find("RHS\n") != std::string::npos);
  CHECK(mps.substr(mps.size() - 7) == "ENDATA\n");
  for (std::size_t c = 0; c < p.num_vars(); ++c) CHECK(mps.find("    C" + std::to_string(c) + " ") != std::string::npos);
}

TEST_CASE("LP validation rejects bad variable indices") {
  LpProblem p;
  p.add_var("a", 1);
  p.rows.push_back(row({{3, 1.0}}, Sense::kGe, 1));
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}
