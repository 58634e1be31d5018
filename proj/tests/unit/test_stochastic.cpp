#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "flround/errors.hpp"
#include "flround/generate.hpp"
#include "flround/lp.hpp"
#include "flround/parallel.hpp"
#include "flround/stochastic.hpp"

using namespace flround;
using flround::testing::divergent_instance;

namespace {

struct Solved {
  TwoStageInstance inst;
  TwoStageFractional frac;
  double lp = 0.0;
};

Solved solve(TwoStageInstance inst) {
  Solved s{std::move(inst), {}, 0.0};
  const LpSolution lp = solve_lp(build_two_stage_lp(s.inst));
  s.frac = two_stage_solution_from_lp(s.inst, lp);
  s.lp = lp.objective;
  return s;
}

// Two-distance base, dense scenarios; fractional more often than Euclidean.
TwoStageInstance small_instance(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x7473));
  TwoStageInstance inst;
  std::vector<double> open(5);
  for (double& f : open) f = 1.0 + rng.uniform();
  std::vector<std::vector<double>> d(5, std::vector<double>(6));
  for (auto& row : d)
    for (double& v : row) v = rng.bernoulli(0.5) ? 1.0 : 3.0;
  inst.base = UflInstance::from_matrix(open, d);
  for (int a = 0; a < 3; ++a) {
    Scenario sc;
    sc.probability = 1.0 / 3;
    for (std::size_t j = 0; j < 6; ++j)
      if (rng.bernoulli(0.8)) sc.clients.push_back(j);
    if (sc.clients.empty()) sc.clients.push_back(a);
    for (double f : open) sc.open_cost.push_back(f * (1.0 + 0.3 * rng.uniform()));
    inst.scenarios.push_back(std::move(sc));
  }
  return inst;
}

bool fractional(const TwoStageFractional& f) {
  auto frac = [](double y) { return y > 1e-7 && y < 1 - 1e-7; };
  for (double y : f.y)
    if (frac(y)) return true;
  for (const auto& ya : f.yA)
    for (double y : ya)
      if (frac(y)) return true;
  return false;
}

TwoStageTrialStats run(const TwoStagePipeline& pipe, std::size_t trials, std::uint64_t seed, unsigned threads = 0) {
  return run_trials(
      trials, seed, pipe.empty_stats(), [&](TwoStageTrialStats& acc, std::size_t, Rng& rng) { pipe.trial(rng, acc); },
      threads);
}

}  // namespace

TEST_CASE("equalizing scale of the per-scenario algorithm") {
  const double g = solve_per_scenario_gamma();
  CHECK(g == doctest::Approx(2.425197).epsilon(1e-6));
  CHECK(1.0 + (2 * g + 2) / (g - 2) * std::exp(-g) == doctest::Approx(g).epsilon(1e-10));
}

TEST_CASE("mixing arithmetic") {
  const MixedCoefficients m = two_stage_bound_calculator(0.3396, 2.4061, 1.2707, 2.24152, 2.8254);
  CHECK(m.max <= 2.2975);
  CHECK(m.opening == doctest::Approx(0.3396 * 2.4061 + 0.6604 * 2.24152));
  const MixedCoefficients second = two_stage_bound_calculator(0.0, 2.4061, 1.2707, 2.24152, 2.8254);
  CHECK(second.opening == 2.24152);
  CHECK(second.connection == 2.8254);
  CHECK(second.max == 2.8254);
  CHECK_THROWS_AS(two_stage_bound_calculator(1.5, 1, 1, 1, 1), InvalidInput);
}

TEST_CASE("divergent instance under ALG1") {
  const Solved s = solve(divergent_instance(5));
  CHECK(s.lp == doctest::Approx(3.0));
  const TwoStagePipeline pipe = TwoStagePipeline::prepare(s.inst, s.frac, TwoStageAlgorithm::kAlg1, 2.0);
  CHECK(check_stage_split(s.inst, pipe.split).empty());
  CHECK(check_stage_clustering(pipe.staged, pipe.cands, pipe.clustering).empty());
  CHECK(pipe.radius_violations.empty());
  // Both pairs are served by the stage-I copy of facility 1.
  for (const auto& served : pipe.split.first_served) CHECK(served[0]);
  const TwoStageTrialStats st = run(pipe, 4000, 5);
  CHECK(st.backup_violations == 0);
  CHECK(st.aggregate.mean <= 3.0 + 1e-9);
  for (std::size_t a = 0; a < 2; ++a) CHECK(st.scenario_cost[a].mean <= pipe.scenario_bound(a) + 1e-9);
}

TEST_CASE("ALG1 and per-scenario bounds on fractional instances") {
  int tested = 0;
  for (std::uint64_t seed = 1; seed <= 60 && tested < 3; ++seed) {
    const Solved s = solve(small_instance(seed));
    if (!fractional(s.frac)) continue;
    ++tested;
    CAPTURE(seed);
    const TwoStagePipeline a1 = TwoStagePipeline::prepare(s.inst, s.frac, TwoStageAlgorithm::kAlg1, 2.0);
    const TwoStagePipeline ps =
        TwoStagePipeline::prepare(s.inst, s.frac, TwoStageAlgorithm::kPerScenario, kPerScenarioGamma);
    for (const TwoStagePipeline* pipe : {&a1, &ps}) {
      CHECK(check_stage_split(s.inst, pipe->split).empty());
      CHECK(check_stage_clustering(pipe->staged, pipe->cands, pipe->clustering).empty());
      CHECK(pipe->radius_violations.empty());
      const TwoStageTrialStats st = run(*pipe, 20000, seed);
      CHECK(st.backup_violations == 0);
      CHECK(st.cluster_violations == 0);
      for (std::size_t a = 0; a < s.inst.scenarios.size(); ++a)
        CHECK(st.scenario_cost[a].mean <= pipe->scenario_bound(a) + 3.0 * st.scenario_cost[a].std_error() + 1e-9);
      // Each piece opens with its own probability.
      const double N = static_cast<double>(st.trials);
      for (std::size_t p = 0; p < pipe->staged.pieces.size(); ++p) {
        const double y = pipe->staged.pieces[p].ybar;
        CHECK(std::abs(st.piece_open[p] / N - y) <= 4.0 * std::sqrt(y * (1 - y) / N) + 1e-12);
      }
    }
    const double e2 = std::exp(-2.0);
    const TwoStageTrialStats st = run(a1, 20000, seed + 100);
    CHECK(st.aggregate.mean <= (2 + 3 * e2) * a1.costs.F_star + (1 + 2 * e2) * a1.costs.C_star +
                                   3.0 * st.aggregate.std_error());
  }
  CHECK(tested == 3);
}

TEST_CASE("per-scenario candidates respect the radius lemma") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Solved s = solve(small_instance(seed));
    const double g = kPerScenarioGamma;
    const StageSplit split = split_stage_assignments(s.inst, s.frac, g);
    for (const PairCandidate& c : cluster_candidates_per_scenario(s.inst, s.frac, split)) {
      CHECK(c.radius <= g / (g - 2) * c.C + 1e-9);
      CHECK(c.stage == (c.d_first <= c.d_second ? 0 : 1));
    }
  }
  const Solved s = solve(small_instance(1));
  CHECK_THROWS_AS(cluster_candidates_per_scenario(s.inst, s.frac, split_stage_assignments(s.inst, s.frac, 2.0)),
                  InvalidInput);
}

TEST_CASE("two-stage trials are thread-independent") {
  const Solved s = solve(small_instance(2));
  const TwoStagePipeline pipe = TwoStagePipeline::prepare(s.inst, s.frac, TwoStageAlgorithm::kAlg1, 2.0);
  const TwoStageTrialStats a = run(pipe, 5000, 9, 1), b = run(pipe, 5000, 9, 4);
  CHECK(a.aggregate.mean == b.aggregate.mean);
  CHECK(a.piece_open == b.piece_open);
}

TEST_CASE("mixing picks each procedure with the right probability") {
  const std::vector<double> probs{0.5, 0.5};
  const TwoStageProcedure one = [](Rng&, std::vector<double>& c) { c = {1.0, 1.0}; };
  const TwoStageProcedure two = [](Rng&, std::vector<double>& c) { c = {2.0, 4.0}; };
  const MixStats all = combine_algorithms(one, two, 1.0, probs, 1000, 3);
  CHECK(all.heads == 1000);
  CHECK(all.aggregate.mean == 1.0);
  const MixStats none = combine_algorithms(one, two, 0.0, probs, 1000, 3);
  CHECK(none.heads == 0);
  CHECK(none.aggregate.mean == 3.0);
  const MixStats mix = combine_algorithms(one, two, 0.3, probs, 20000, 3);
  CHECK(mix.heads / 20000.0 == doctest::Approx(0.3).epsilon(0.05));
  CHECK(mix.scenario[1].mean == doctest::Approx(0.3 * 1 + 0.7 * 4).epsilon(0.02));
  CHECK_THROWS_AS(combine_algorithms(one, two, -0.1, probs, 10, 3), InvalidInput);
}

TEST_CASE("mixing with p = 1 reproduces ALG1") {
  const Solved s = solve(small_instance(3));
  const TwoStagePipeline pipe = TwoStagePipeline::prepare(s.inst, s.frac, TwoStageAlgorithm::kAlg1, 2.0);
  const TwoStageProcedure alg1 = [&](Rng& rng, std::vector<double>& cost) {
    TwoStageTrialStats local = pipe.empty_stats();
    TwoStageTrialRecord rec;
    pipe.trial(rng, local, &rec);
    cost = rec.scenario_cost;
  };
  std::vector<double> probs;
  for (const Scenario& sc : s.inst.scenarios) probs.push_back(sc.probability);
  const MixStats m = combine_algorithms(alg1, alg1, 1.0, probs, 3000, 21);
  const TwoStageTrialStats direct = run(pipe, 3000, 21);
  CHECK(m.aggregate.mean == doctest::Approx(direct.aggregate.mean).epsilon(1e-12));
}

TEST_CASE("generated two-stage instances are valid and deterministic") {
  TwoStageSpec spec;
  spec.base.seed = 4;
  const TwoStageInstance a = generate_two_stage_instance(spec), b = generate_two_stage_instance(spec);
  CHECK_NOTHROW(a.validate());
  CHECK(a.base.conn == b.base.conn);
  REQUIRE(a.scenarios.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.scenarios[k].clients == b.scenarios[k].clients);
    CHECK_FALSE(a.scenarios[k].clients.empty());
    for (std::size_t i = 0; i < a.base.num_facilities(); ++i) {
      CHECK(a.scenarios[k].open_cost[i] >= 1.2 * a.base.open_cost[i] - 1e-9);
      CHECK(a.scenarios[k].open_cost[i] <= 2.5 * a.base.open_cost[i] + 1e-9);
    }
  }
}
