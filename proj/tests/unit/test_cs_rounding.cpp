#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "flround/cs_rounding.hpp"
#include "flround/errors.hpp"
#include "flround/lp.hpp"

using namespace flround;
using flround::testing::two_distance_ufl;

namespace {

struct Solved {
  UflInstance inst;
  FractionalUflSolution sol;
  double lp = 0.0;
};

Solved solve(UflInstance inst) {
  Solved s{std::move(inst), {}, 0.0};
  const LpSolution lp = solve_lp(build_ufl_lp(s.inst));
  s.sol = ufl_solution_from_lp(s.inst, lp);
  s.lp = lp.objective;
  return s;
}

bool fractional(const FractionalUflSolution& s) {
  for (double y : s.y)
    if (y > 1e-7 && y < 1 - 1e-7) return true;
  return false;
}

}  // namespace

TEST_CASE("threshold constants") {
  const double g = solve_gamma0();
  CHECK(g == doctest::Approx(1.677356493).epsilon(1e-9));
  CHECK((std::exp(-1.0) + std::exp(-g)) / (1.0 - 1.0 / g) == doctest::Approx(1.0 + 2.0 * std::exp(-g)).epsilon(1e-12));
  const double s = solve_s0();
  CHECK(s == doctest::Approx(1.463055513).epsilon(1e-9));
  CHECK(s == doctest::Approx(1.0 + 2.0 * std::exp(-s)).epsilon(1e-12));
}

TEST_CASE("bifactor bound") {
  const BoundBreakdown a = bifactor_bound(1.575);
  CHECK(a.connection == doctest::Approx(1.574690461).epsilon(1e-9));
  CHECK(a.connection == a.branch_skewed);
  const BoundBreakdown b = bifactor_bound(1.678);
  CHECK(b.opening == 1.678);
  CHECK(b.connection == 1.0 + 2.0 * std::exp(-1.678));
  CHECK(b.p_close_lower == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(b.p_fallback_upper == std::exp(-1.678));
  CHECK_THROWS_AS(bifactor_bound(1.0), InvalidInput);
  CHECK_THROWS_AS(bifactor_bound(2.0), InvalidInput);
}

TEST_CASE("three facilities, one client") {
  const Solved t3 = solve(UflInstance::from_matrix({1, 1, 1}, {{1}, {2}, {3}}));
  const CsPipeline pipe = CsPipeline::prepare(t3.inst, t3.sol, 1.575);
  CHECK(pipe.F_star == doctest::Approx(1.0));
  CHECK(pipe.C_star == doctest::Approx(1.0));
  // gamma y* = 1.575 on facility 1: a unit close piece and a 0.575 distant one.
  REQUIRE(pipe.complete.bar.width() == 2);
  CHECK(pipe.complete.bar.y[0] == doctest::Approx(1.0));
  CHECK(pipe.complete.bar.y[1] == doctest::Approx(0.575));
  CHECK(pipe.stats[0].close.size() == 1);
  CHECK(pipe.stats[0].distant.size() == 1);
  REQUIRE(pipe.clustering.clusters.size() == 1);
  const CsTrialStats st = run_cs(pipe, 2000, 1);
  CHECK(st.total.mean == doctest::Approx(2.0));
  CHECK(st.total.variance() == doctest::Approx(0.0));
  CHECK(st.opening_charge.mean == doctest::Approx(1.575).epsilon(0.05));
  CHECK(st.close_open == 2000);
}

TEST_CASE("distant-average identity and client invariants") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Solved s = solve(two_distance_ufl(seed, 6, 9));
    for (double gamma : {1.2, 1.575, 1.9}) {
      const CsPipeline pipe = CsPipeline::prepare(s.inst, s.sol, gamma);
      CHECK(check_client_stats(pipe.complete, pipe.stats).empty());
      CHECK(check_clustering(pipe.complete, pipe.stats, pipe.clustering).empty());
      for (const ClientStats& c : pipe.stats) {
        if (c.distant.empty()) continue;
        CHECK(c.lemma1_residual <= 1e-9);
        CHECK(c.close_mass == doctest::Approx(1.0));
        // More than gamma - 1 only when the reassignment breaks a distance
        // tie toward a facility outside the support of x*.
        CHECK(c.distant_mass >= gamma - 1.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("complete solution: x-bar is 0 or y-bar and costs are preserved") {
  const Solved s = solve(two_distance_ufl(4, 6, 9));
  const CsPipeline pipe = CsPipeline::prepare(s.inst, s.sol, 1.575);
  const FractionalUflSolution& bar = pipe.complete.bar;
  double opening = 0.0;
  for (std::size_t p = 0; p < bar.width(); ++p) {
    CHECK(bar.y[p] <= 1.0 + 1e-12);
    opening += bar.y[p] * s.inst.open_cost[bar.origin(p)];
    for (std::size_t j = 0; j < bar.num_clients; ++j) {
      const double x = bar.xv(j, p);
      CHECK((x == 0.0 || x == doctest::Approx(bar.y[p])));
    }
  }
  CHECK(opening == doctest::Approx(1.575 * pipe.F_star).epsilon(1e-12));
}

TEST_CASE("clustering: centers are disjoint and everyone has an owner") {
  const Solved s = solve(two_distance_ufl(9, 8, 12));
  const CsPipeline pipe = CsPipeline::prepare(s.inst, s.sol, 1.575);
  const Clustering& cl = pipe.clustering;
  std::vector<int> seen(pipe.complete.bar.width(), 0);
  for (const Cluster& c : cl.clusters) {
    CHECK(c.mass == doctest::Approx(1.0));
    for (std::size_t p : c.pieces) ++seen[p];
  }
  for (int v : seen) CHECK(v <= 1);
  for (std::size_t j = 0; j < pipe.stats.size(); ++j) CHECK(cl.owner[j] < cl.clusters.size());
}

TEST_CASE("rounding: one piece per cluster and marginals") {
  int tested = 0;
  for (std::uint64_t seed = 1; seed <= 12 && tested < 4; ++seed) {
    const Solved s = solve(two_distance_ufl(seed, 8, 12));
    if (!fractional(s.sol)) continue;
    ++tested;
    const CsPipeline pipe = CsPipeline::prepare(s.inst, s.sol, 1.575);
    const std::size_t N = 20000;
    const CsTrialStats st = run_cs(pipe, N, seed, 4);
    CHECK(st.cluster_violations == 0);
    CHECK(st.lemma2_violations == 0);
    for (std::size_t p = 0; p < pipe.complete.bar.width(); ++p) {
      const double y = pipe.complete.bar.y[p];
      CHECK(std::abs(st.piece_open[p] / double(N) - y) <= 4.0 * std::sqrt(y * (1 - y) / N) + 1e-12);
    }
    const BoundBreakdown bb = bifactor_bound(1.575);
    for (std::size_t j = 0; j < pipe.C_j.size(); ++j)
      CHECK(st.client_conn[j].mean <= bb.connection * pipe.C_j[j] + 3.0 * st.client_conn[j].std_error() + 1e-9);
    CHECK(st.total.mean <= 1.575 * s.lp + 3.0 * st.total.std_error());
  }
  CHECK(tested == 4);
}

TEST_CASE("run_cs is reproducible and thread-independent") {
  std::uint64_t seed = 1;
  while (!fractional(solve(two_distance_ufl(seed, 6, 8)).sol)) ++seed;
  const Solved s = solve(two_distance_ufl(seed, 6, 8));
  const CsPipeline pipe = CsPipeline::prepare(s.inst, s.sol, 1.575);
  const CsTrialStats a = run_cs(pipe, 5000, 77, 0, 1);
  const CsTrialStats b = run_cs(pipe, 5000, 77, 0, 3);
  CHECK(a.total.mean == b.total.mean);
  CHECK(a.piece_open == b.piece_open);
  const CsTrialStats c = run_cs(pipe, 5000, 78, 0, 1);
  CHECK(a.total.mean != c.total.mean);
}

TEST_CASE("trial record matches the accumulated trial") {
  const Solved s = solve(two_distance_ufl(5, 6, 8));
  const CsPipeline pipe = CsPipeline::prepare(s.inst, s.sol, 1.575);
  CsTrialStats acc = CsTrialStats::empty_for(pipe, 0);
  Rng rng(12);
  CsTrialRecord rec{};
  cs_trial(pipe, rng, acc, &rec);
  CHECK(acc.trials == 1);
  CHECK(acc.total.mean == doctest::Approx(rec.opening + rec.connection));
  CHECK(rec.close_open + rec.distant_open + rec.fallback == static_cast<std::int64_t>(s.inst.num_clients()));
}

TEST_CASE("adversarial single-client instances") {
  SUBCASE("equidistant") {
    const AdversarialCase c = adversarial_instance(AdversaryKind::kEquidistant, 1.575, 2.0, 0.0, 6);
    const CsPipeline pipe = CsPipeline::prepare(c.instance, c.solution, 1.575);
    const CsTrialStats st = run_cs(pipe, 3000, 2);
    CHECK(st.client_conn[0].mean == doctest::Approx(2.0));
  }
  SUBCASE("two distances") {
    const AdversarialCase c = adversarial_instance(AdversaryKind::kTwoDistance, 1.575, 1.0, 10.0, 6);
    CHECK(check_fractional(c.instance, c.solution).empty());
    const CsPipeline pipe = CsPipeline::prepare(c.instance, c.solution, 1.575);
    const CsTrialStats st = run_cs(pipe, 20000, 3);
    const double bound = bifactor_bound(1.575).connection * pipe.C_j[0];
    CHECK(st.client_conn[0].mean <= bound + 3.0 * st.client_conn[0].std_error());
  }
  CHECK_THROWS_AS(adversarial_instance(AdversaryKind::kTwoDistance, 1.5, 2.0, 1.0, 4), InvalidInput);
  CHECK_THROWS_AS(adversarial_instance(AdversaryKind::kEquidistant, 1.5, 1.0, 1.0, 0), InvalidInput);
}

TEST_CASE("random gamma draws follow the distribution") {
  const Solved s = solve(two_distance_ufl(2, 5, 6));
  const RandomGammaStats st = random_gamma_run(s.inst, s.sol, {{1.2, 0.25}, {1.8, 0.75}}, s.lp, 8000, 4);
  CHECK(st.trials == 8000);
  REQUIRE(st.gamma_draws.size() == 2);
  CHECK(st.gamma_draws[0] + st.gamma_draws[1] == 8000);
  CHECK(st.gamma_draws[1] / 8000.0 == doctest::Approx(0.75).epsilon(0.05));
  CHECK(st.ratio.mean >= 1.0 - 1e-9);
}

TEST_CASE("hand-evaluated thirds instance at gamma 1.5") {
  const UflInstance inst = UflInstance::from_matrix({1, 1, 1}, {{1}, {2}, {3}});
  FractionalUflSolution sol = FractionalUflSolution::over_originals(3, 1);
  sol.y = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  sol.x = sol.y;
  const FractionalUflSolution re = scale_and_reassign(inst, sol, 1.5);
  CHECK(re.y[0] == doctest::Approx(0.5));
  CHECK(re.y[2] == doctest::Approx(0.5));
  CHECK(re.xv(0, 0) == doctest::Approx(0.5));
  CHECK(re.xv(0, 1) == doctest::Approx(0.5));
  CHECK(re.xv(0, 2) == 0.0);
  const CompleteSolution cs = complete_solution(inst, sol, re, 1.5);
  CHECK(cs.splits == 0);
  const ClientStats st = client_stats(inst, cs)[0];
  CHECK(st.d == doctest::Approx(2.0));
  CHECK(st.d_close == doctest::Approx(1.5));
  CHECK(st.d_distant == doctest::Approx(3.0));
  CHECK(st.d_max == doctest::Approx(2.0));
  CHECK(st.rho == doctest::Approx(0.25));
  CHECK(st.lemma1_residual <= 1e-12);
}

TEST_CASE("completion splits partially used copies") {
  const UflInstance inst = UflInstance::from_matrix({1, 1}, {{1, 1}, {2, 5}});
  FractionalUflSolution sol = FractionalUflSolution::over_originals(2, 2);
  sol.y = {0.8, 0.8};
  sol.x = {0.2, 0.8, 0.8, 0.2};
  REQUIRE(check_fractional(inst, sol).empty());
  const FractionalUflSolution re = scale_and_reassign(inst, sol, 1.5);
  // y~ = (1.2, 1.2); both clients take a full unit of facility 0.
  CHECK(re.xv(0, 0) == doctest::Approx(1.0));
  CHECK(re.xv(1, 0) == doctest::Approx(1.0));
  const CompleteSolution cs = complete_solution(inst, sol, re, 1.5);
  for (std::size_t p = 0; p < cs.bar.width(); ++p) {
    CHECK(cs.bar.y[p] <= 1.0 + 1e-12);
    for (std::size_t j = 0; j < 2; ++j) CHECK((cs.bar.xv(j, p) == 0.0 || cs.bar.xv(j, p) == cs.bar.y[p]));
  }
  double f0 = 0.0;
  for (std::size_t p = 0; p < cs.bar.width(); ++p)
    if (cs.bar.origin(p) == 0) f0 += cs.bar.y[p];
  CHECK(f0 == doctest::Approx(1.2));
  CHECK(cs.splits > 0);
}
