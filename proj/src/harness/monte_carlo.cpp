#include "flround/monte_carlo.hpp"

#include <filesystem>
#include <fstream>
#include <limits>

#include "flround/cs_rounding.hpp"
#include "flround/errors.hpp"
#include "flround/lp.hpp"
#include "flround/parallel.hpp"
#include "flround/robust.hpp"
#include "flround/stochastic.hpp"

namespace flround {

void TrialStats::merge(const TrialStats& o) {
  trials += o.trials;
  opening.merge(o.opening);
  connection.merge(o.connection);
  total.merge(o.total);
  if (scenario.size() < o.scenario.size()) scenario.resize(o.scenario.size());
  for (std::size_t a = 0; a < o.scenario.size(); ++a) scenario[a].merge(o.scenario[a]);
  for (const auto& [key, v] : o.events) events[key] += v;
}

namespace {

const std::pair<Algorithm, const char*> kNames[] = {
    {Algorithm::kCs, "cs"},         {Algorithm::kAlg1, "alg1"},     {Algorithm::kPerScenario, "per-scenario"},
    {Algorithm::kMix, "mix"},       {Algorithm::kRobust, "robust"}, {Algorithm::kOblivious, "oblivious"},
};

}  // namespace

const char* algorithm_name(Algorithm a) {
  for (const auto& [k, name] : kNames)
    if (k == a) return name;
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (name == n) return k;
  throw InvalidInput("unknown algorithm '" + name + "'");
}

std::vector<ExperimentDescriptor> parse_experiment(const nlohmann::json& doc, const std::string& base_dir) {
  std::vector<ExperimentDescriptor> out;
  if (doc.is_object() && doc.contains("runs")) {
    if (doc.size() != 1 || !doc["runs"].is_array()) throw InvalidInput("experiment: 'runs' must be the only key and an array");
    for (const auto& run : doc["runs"]) {
      auto one = parse_experiment(run, base_dir);
      out.insert(out.end(), one.begin(), one.end());
    }
    return out;
  }
  if (!doc.is_object()) throw InvalidInput("experiment descriptor must be a JSON object");
  ExperimentDescriptor d;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "name") d.name = v.get<std::string>();
      else if (key == "algorithm") d.algorithm = parse_algorithm(v.get<std::string>());
      else if (key == "instance") d.instance = v.get<std::string>();
      else if (key == "gamma") d.gamma = v.get<double>();
      else if (key == "p") d.p = v.get<double>();
      else if (key == "k") d.k = v.get<int>();
      else if (key == "trials") d.trials = v.get<std::size_t>();
      else if (key == "seed") d.seed = v.get<std::uint64_t>();
      else if (key == "first_trial") d.first_trial = v.get<std::size_t>();
      else if (key == "threads") d.threads = v.get<unsigned>();
      else throw InvalidInput("experiment: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("experiment: ") + e.what());
  }
  if (d.instance.empty()) throw InvalidInput("experiment: 'instance' is required");
  std::filesystem::path path(d.instance);
  if (path.is_relative() && !base_dir.empty()) d.instance = (std::filesystem::path(base_dir) / path).string();
  out.push_back(d);
  return out;
}

std::vector<ExperimentDescriptor> load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return parse_experiment(doc, std::filesystem::path(path).parent_path().string());
}

namespace {

nlohmann::json moments(const RunningMoments& m) {
  return {{"count", m.count}, {"mean", m.mean}, {"variance", m.variance()}, {"std_error", m.std_error()},
          {"min", m.min}, {"max", m.max}};
}

}  // namespace

nlohmann::json to_json(const ExperimentDescriptor& d) {
  return {{"name", d.name},   {"algorithm", algorithm_name(d.algorithm)},
          {"instance", d.instance}, {"gamma", d.gamma}, {"p", d.p}, {"k", d.k}, {"trials", d.trials},
          {"seed", d.seed},   {"first_trial", d.first_trial}, {"threads", d.threads}};
}

nlohmann::json to_json(const TrialStats& s) {
  nlohmann::json out = {{"seed", s.seed},
                        {"trials", s.trials},
                        {"opening", moments(s.opening)},
                        {"connection", moments(s.connection)},
                        {"total", moments(s.total)},
                        {"events", s.events}};
  out["scenario"] = nlohmann::json::array();
  for (const auto& m : s.scenario) out["scenario"].push_back(moments(m));
  return out;
}

namespace {

const TwoStageInstance& need_two_stage(const InstanceFile& f) {
  if (f.kind != InstanceKind::kTwoStage) throw InvalidInput("this algorithm needs a two-stage instance");
  return f.two_stage;
}

RobustInstance robust_of(const InstanceFile& f, int k) {
  if (f.kind != InstanceKind::kRobust && k < 0) throw InvalidInput("this algorithm needs a robust instance or k");
  RobustInstance r;
  r.base = f.base();
  r.k = k >= 0 ? k : f.robust.k;
  r.validate();
  return r;
}

}  // namespace

TrialStats monte_carlo(const ExperimentDescriptor& d, const InstanceFile& file) {
  TrialStats empty;
  empty.seed = d.seed;
  auto go = [&](auto&& body) { return run_trial_range(d.first_trial, d.trials, d.seed, empty, body, d.threads); };

  switch (d.algorithm) {
    case Algorithm::kCs: {
      const UflInstance& g = file.base();
      const LpSolution lp = solve_lp(build_ufl_lp(g));
      if (lp.status != LpStatus::kOptimal) throw NumericalError("UFL LP did not solve to optimality");
      const FractionalUflSolution sol = ufl_solution_from_lp(g, lp);
      const CsPipeline pipe = CsPipeline::prepare(g, sol, d.gamma > 0.0 ? d.gamma : 1.575);
      const CsTrialStats scratch = CsTrialStats::empty_for(pipe, 0);
      return go([&](TrialStats& acc, std::size_t, Rng& rng) {
        CsTrialStats local = scratch;
        CsTrialRecord rec{};
        cs_trial(pipe, rng, local, &rec);
        ++acc.trials;
        acc.opening.add(rec.opening);
        acc.connection.add(rec.connection);
        acc.total.add(rec.opening + rec.connection);
        acc.events["close_open"] += rec.close_open;
        acc.events["distant_open"] += rec.distant_open;
        acc.events["fallback"] += rec.fallback;
        acc.events["cluster_violations"] += local.cluster_violations;
        acc.events["lemma2_violations"] += local.lemma2_violations;
      });
    }
    case Algorithm::kAlg1:
    case Algorithm::kPerScenario:
    case Algorithm::kMix: {
      const TwoStageInstance& inst = need_two_stage(file);
      const LpSolution lp = solve_lp(build_two_stage_lp(inst));
      if (lp.status != LpStatus::kOptimal) throw NumericalError("two-stage LP did not solve to optimality");
      const TwoStageFractional frac = two_stage_solution_from_lp(inst, lp);
      const double g2 = d.gamma > 0.0 ? d.gamma : kPerScenarioGamma;
      std::vector<TwoStagePipeline> pipes;
      if (d.algorithm != Algorithm::kPerScenario)
        pipes.push_back(TwoStagePipeline::prepare(inst, frac, TwoStageAlgorithm::kAlg1, 2.0));
      if (d.algorithm != Algorithm::kAlg1)
        pipes.push_back(TwoStagePipeline::prepare(inst, frac, TwoStageAlgorithm::kPerScenario, g2));
      if (d.algorithm == Algorithm::kMix && !(d.p >= 0.0 && d.p <= 1.0))
        throw InvalidInput("mixing probability must lie in [0, 1]");
      const std::uint64_t coin_master = derive_seed(d.seed, 0x636f696eULL);
      empty.scenario.resize(inst.scenarios.size());
      std::vector<TwoStageTrialStats> scratch;
      for (const auto& p : pipes) scratch.push_back(p.empty_stats());
      return go([&](TrialStats& acc, std::size_t t, Rng& rng) {
        std::size_t which = 0;
        if (d.algorithm == Algorithm::kMix) {
          Rng coin(derive_seed(coin_master, t));
          which = coin.uniform() < d.p ? 0 : 1;
          acc.events["heads"] += which == 0;
        }
        TwoStageTrialStats local = scratch[which];
        TwoStageTrialRecord rec;
        pipes[which].trial(rng, local, &rec);
        ++acc.trials;
        acc.opening.add(rec.opening);
        acc.connection.add(rec.connection);
        acc.total.add(rec.aggregate);
        for (std::size_t a = 0; a < rec.scenario_cost.size(); ++a) acc.scenario[a].add(rec.scenario_cost[a]);
        acc.events["backup_violations"] += local.backup_violations;
        acc.events["cluster_violations"] += local.cluster_violations;
      });
    }
    case Algorithm::kRobust:
    case Algorithm::kOblivious: {
      const RobustInstance inst = robust_of(file, d.k);
      const RobustFractional frac = solve_robust_lp(inst);
      const bool oblivious = d.algorithm == Algorithm::kOblivious;
      const double gamma = d.gamma > 0.0 ? d.gamma : oblivious ? oblivious_gamma(inst.k) : robust_gamma(inst.k);
      const BlockPlan plan = BlockPlan::prepare(inst, build_requirements(inst, frac, gamma));
      const UflInstance& g = inst.base;
      const std::size_t m = g.num_facilities(), n = g.num_clients();
      if (oblivious) empty.scenario.resize(frac.scenarios.size());
      return go([&](TrialStats& acc, std::size_t, Rng& rng) {
        const RoundOutcome rounded = dependent_round_blocks(plan, rng);
        ++acc.trials;
        acc.events["fallback"] += static_cast<std::int64_t>(rounded.trial_fallback_opens);
        if (!oblivious) {
          const AdversaryResult adv = adversary_worst_case(inst, rounded.open);
          acc.opening.add(adv.opening);
          acc.connection.add(adv.connection);
          acc.total.add(adv.cost);
          return;
        }
        double opening = 0.0;
        for (std::size_t i = 0; i < m; ++i)
          if (rounded.open[i]) opening += g.open_cost[i];
        double conn_sum = 0.0;
        std::vector<std::uint8_t> alive(m);
        for (std::size_t a = 0; a < frac.scenarios.size(); ++a) {
          alive = rounded.open;
          for (std::size_t i : frac.scenarios[a]) alive[i] = 0;
          double conn = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i)
              if (alive[i]) best = std::min(best, g.c(i, j));
            conn += best;
          }
          acc.scenario[a].add(opening + conn);
          conn_sum += conn;
        }
        const double mean_conn = frac.scenarios.empty() ? 0.0 : conn_sum / static_cast<double>(frac.scenarios.size());
        acc.opening.add(opening);
        acc.connection.add(mean_conn);
        acc.total.add(opening + mean_conn);
      });
    }
  }
  throw InvalidInput("unhandled algorithm");
}

TrialStats monte_carlo(const ExperimentDescriptor& d) { return monte_carlo(d, read_instance_file(d.instance)); }

}  // namespace flround
