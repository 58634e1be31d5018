#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "flround/config.hpp"
#include "flround/cs_rounding.hpp"
#include "flround/errors.hpp"
#include "flround/instance_io.hpp"
#include "flround/lp.hpp"
#include "flround/monte_carlo.hpp"
#include "flround/oracles.hpp"
#include "flround/parallel.hpp"
#include "flround/report.hpp"
#include "flround/robust.hpp"
#include "flround/stochastic.hpp"

namespace flround::cli {

namespace {

// mean <= bound + kSigma * se, with a little room for exact ties
bool within(const RunningMoments& m, double bound) {
  return m.mean <= bound + kSigma * m.std_error() + kTol.identity * (1.0 + std::abs(bound));
}

class Checks {
 public:
  explicit Checks(std::ostream& out) : out_(out) {}

  void add(const std::string& name, bool pass, const std::string& detail = {}) {
    list_.push_back({name, pass, detail});
    out_ << "check " << name << ": " << fmt_bool(pass);
    if (!detail.empty()) out_ << "  (" << detail << ")";
    out_ << '\n';
  }

  int exit_code() const { return all_pass(list_) ? 0 : 1; }

 private:
  std::ostream& out_;
  std::vector<Check> list_;
};

void finish(const RunOptions& opt, const Table& table, std::ostream& out) {
  if (opt.csv_path.empty()) return;
  write_text_file(opt.csv_path, table.csv());
  out << "wrote " << opt.csv_path << '\n';
}

std::string num(double v) { return fmt(v, 10); }

}  // namespace

int solve_lp_cmd(const std::string& file, const std::string& mps_path, const RunOptions& opt, std::ostream& out) {
  const InstanceFile f = read_instance_file(file);
  Checks checks(out);
  Table table{{"quantity", "value"}, {}};
  out << "instance " << file << " (" << kind_name(f.kind) << ", " << f.base().num_facilities() << " facilities, "
      << f.base().num_clients() << " clients)\n";

  auto report_lp = [&](const LpProblem& p, const LpSolution& s) {
    if (!mps_path.empty()) {
      std::ofstream mps(mps_path);
      if (!mps) throw InvalidInput("cannot write " + mps_path);
      write_mps(p, mps);
      out << "wrote " << mps_path << '\n';
    }
    out << "rows " << p.rows.size() << ", columns " << p.objective.size() << ", iterations " << s.iterations << '\n';
    out << "objective " << num(s.objective) << '\n';
    out << "residuals primal " << fmt(s.residuals.primal) << " dual " << fmt(s.residuals.dual) << " gap "
        << fmt(s.residuals.gap) << '\n';
    table.add({"objective", num(s.objective)});
    table.add({"iterations", std::to_string(s.iterations)});
    checks.add("optimal", s.status == LpStatus::kOptimal);
    checks.add("primal residual", s.residuals.primal <= kTol.reported, fmt(s.residuals.primal));
    checks.add("duality gap", s.residuals.gap <= kTol.duality_gap, fmt(s.residuals.gap));
  };

  if (f.kind == InstanceKind::kUfl) {
    const LpProblem p = build_ufl_lp(f.ufl);
    const LpSolution s = solve_lp(p);
    report_lp(p, s);
    if (s.status == LpStatus::kOptimal) {
      const CostSplit cs = fractional_cost(f.ufl, ufl_solution_from_lp(f.ufl, s));
      out << "F* " << num(cs.opening) << "  C* " << num(cs.connection) << '\n';
      table.add({"F*", num(cs.opening)});
      table.add({"C*", num(cs.connection)});
    }
  } else if (f.kind == InstanceKind::kTwoStage) {
    const LpProblem p = build_two_stage_lp(f.two_stage);
    const LpSolution s = solve_lp(p);
    report_lp(p, s);
    if (s.status == LpStatus::kOptimal) {
      const TwoStageFractional frac = two_stage_solution_from_lp(f.two_stage, s);
      const CostDecomposition cd = decompose_two_stage(f.two_stage, frac);
      Table sc{{"scenario", "p_A", "F_A", "C_A", "V_A", "Val_A"}, {}};
      double pv = 0.0;
      for (std::size_t a = 0; a < cd.scenarios.size(); ++a) {
        const ScenarioCosts& c = cd.scenarios[a];
        const double pa = f.two_stage.scenarios[a].probability;
        pv += pa * c.V_A;
        sc.add({std::to_string(a), num(pa), num(c.F_A), num(c.C_A), num(c.V_A), num(c.Val_A)});
        table.add({"V_A[" + std::to_string(a) + "]", num(c.V_A)});
        table.add({"Val_A[" + std::to_string(a) + "]", num(c.Val_A)});
      }
      out << sc.text();
      out << "F* " << num(cd.F_star) << "  C* " << num(cd.C_star) << "  sum p_A V_A " << num(pv) << '\n';
      checks.add("F*+C* = sum p_A V_A", std::abs(cd.F_star + cd.C_star - pv) <= kTol.duality_gap * (1.0 + pv),
                 fmt(cd.F_star + cd.C_star - pv));
    }
  } else {
    const RobustFractional r = solve_robust_lp(f.robust);
    out << "k " << f.robust.k << ", scenarios " << r.scenarios.size() << ", route "
        << (r.via_cuts ? "scenario cuts (" + std::to_string(r.cut_rounds) + " rounds)" : std::string("explicit"))
        << '\n';
    out << "objective " << num(r.objective) << "  t " << num(r.t) << '\n';
    table.add({"objective", num(r.objective)});
    checks.add("solved", std::isfinite(r.objective));
  }
  finish(opt, table, out);
  return checks.exit_code();
}

int round_ufl_cmd(const std::string& file, double gamma, const RunOptions& opt, std::ostream& out) {
  const InstanceFile f = read_instance_file(file);
  const UflInstance& g = f.base();
  const LpSolution lp = solve_lp(build_ufl_lp(g));
  if (lp.status != LpStatus::kOptimal) throw NumericalError("UFL LP did not solve to optimality");
  const FractionalUflSolution sol = ufl_solution_from_lp(g, lp);
  const CsPipeline pipe = CsPipeline::prepare(g, sol, gamma);
  const BoundBreakdown bb = bifactor_bound(gamma);
  const CsTrialStats st = run_cs(pipe, opt.trials, opt.seed, 0, opt.threads);
  Checks checks(out);

  out << "LP " << num(lp.objective) << "  F* " << num(pipe.F_star) << "  C* " << num(pipe.C_star) << '\n';
  out << "gamma " << gamma << "  opening factor " << num(bb.opening) << "  connection factor " << num(bb.connection)
      << '\n';
  out << "pieces " << pipe.complete.bar.width() << ", clusters " << pipe.clustering.clusters.size() << ", trials "
      << st.trials << '\n';
  out << "mean opening " << num(st.opening.mean) << " (charge " << num(st.opening_charge.mean) << " +- "
      << fmt(st.opening_charge.std_error()) << ")  connection " << num(st.connection.mean) << "  total "
      << num(st.total.mean) << " +- " << fmt(st.total.std_error()) << '\n';
  out << "events close " << st.close_open << " distant " << st.distant_open << " fallback " << st.fallback << '\n';

  const std::string structure = check_clustering(pipe.complete, pipe.stats, pipe.clustering);
  checks.add("clustering", structure.empty(), structure);
  checks.add("one open per cluster", st.cluster_violations == 0, std::to_string(st.cluster_violations) + " trials");
  checks.add("fallback distance", st.lemma2_violations == 0, std::to_string(st.lemma2_violations) + " violations");
  const double target = gamma * pipe.F_star;
  checks.add("opening charge ~ gamma F*",
             std::abs(st.opening_charge.mean - target) <= kSigma * st.opening_charge.std_error() + kTol.identity,
             num(st.opening_charge.mean) + " vs " + num(target));
  Table table{{"client", "C_j", "mean_conn", "std_error", "bound", "pass"}, {}};
  std::size_t bad = 0;
  for (std::size_t j = 0; j < g.num_clients(); ++j) {
    const double bound = bb.connection * pipe.C_j[j];
    const bool ok = within(st.client_conn[j], bound);
    bad += !ok;
    table.add({std::to_string(g.client_ids[j]), num(pipe.C_j[j]), num(st.client_conn[j].mean),
               num(st.client_conn[j].std_error()), num(bound), fmt_bool(ok)});
  }
  checks.add("per-client connection", bad == 0, std::to_string(bad) + " clients over");
  const double total_bound = bb.opening * pipe.F_star + bb.connection * pipe.C_star;
  checks.add("total", within(st.total, total_bound), num(st.total.mean) + " vs " + num(total_bound));
  finish(opt, table, out);
  return checks.exit_code();
}

int round_stoch_cmd(const std::string& file, const std::string& alg, double p, double gamma, const RunOptions& opt,
                    std::ostream& out) {
  const InstanceFile f = read_instance_file(file);
  if (f.kind != InstanceKind::kTwoStage) throw InvalidInput(file + " is not a two-stage instance");
  if (alg != "alg1" && alg != "per-scenario" && alg != "mix") throw InvalidInput("unknown algorithm '" + alg + "'");
  const TwoStageInstance& inst = f.two_stage;
  const LpSolution lp = solve_lp(build_two_stage_lp(inst));
  if (lp.status != LpStatus::kOptimal) throw NumericalError("two-stage LP did not solve to optimality");
  const TwoStageFractional frac = two_stage_solution_from_lp(inst, lp);
  Checks checks(out);
  out << "LP " << num(lp.objective) << '\n';

  std::vector<TwoStagePipeline> pipes;
  if (alg != "per-scenario") pipes.push_back(TwoStagePipeline::prepare(inst, frac, TwoStageAlgorithm::kAlg1, 2.0));
  if (alg != "alg1") pipes.push_back(TwoStagePipeline::prepare(inst, frac, TwoStageAlgorithm::kPerScenario, gamma));
  for (const TwoStagePipeline& pipe : pipes) {
    const std::string tag = pipe.algorithm == TwoStageAlgorithm::kAlg1 ? "alg1" : "per-scenario";
    const std::string split = check_stage_split(inst, pipe.split);
    const std::string clus = check_stage_clustering(pipe.staged, pipe.cands, pipe.clustering);
    checks.add(tag + " stage split", split.empty(), split);
    checks.add(tag + " clustering", clus.empty(), clus);
    checks.add(tag + (pipe.algorithm == TwoStageAlgorithm::kAlg1 ? " radius <= dual budget" : " radius lemma"),
               pipe.radius_violations.empty(), std::to_string(pipe.radius_violations.size()) + " pairs");
  }
  if (alg == "per-scenario") {
    const double root = solve_per_scenario_gamma();
    out << "equalizing root " << std::setprecision(7) << root << " (default scale " << kPerScenarioGamma << ")\n";
  }

  const CostDecomposition& cd = pipes.front().costs;
  std::vector<double> probs;
  for (const Scenario& s : inst.scenarios) probs.push_back(s.probability);
  std::vector<RunningMoments> scen;
  RunningMoments aggregate;
  std::int64_t backup = 0, cluster = 0;
  if (alg == "mix") {
    auto procedure = [&](const TwoStagePipeline& pipe) -> TwoStageProcedure {
      return [&pipe](Rng& rng, std::vector<double>& cost) {
        TwoStageTrialStats local = pipe.empty_stats();
        TwoStageTrialRecord rec;
        pipe.trial(rng, local, &rec);
        cost = rec.scenario_cost;
        if (local.backup_violations || local.cluster_violations) throw GuaranteeViolation("two-stage backup failed");
      };
    };
    const MixStats ms = combine_algorithms(procedure(pipes[0]), procedure(pipes[1]), p, probs, opt.trials, opt.seed,
                                           opt.threads);
    scen = ms.scenario;
    aggregate = ms.aggregate;
    out << "heads " << ms.heads << " of " << ms.trials << '\n';
  } else {
    const TwoStagePipeline& pipe = pipes.front();
    const TwoStageTrialStats st = run_trials(
        opt.trials, opt.seed, pipe.empty_stats(),
        [&](TwoStageTrialStats& acc, std::size_t, Rng& rng) { pipe.trial(rng, acc); }, opt.threads);
    scen = st.scenario_cost;
    aggregate = st.aggregate;
    backup = st.backup_violations;
    cluster = st.cluster_violations;
    std::size_t bad_pairs = 0;
    for (std::size_t a = 0; a < inst.scenarios.size(); ++a)
      for (std::size_t jl = 0; jl < inst.scenarios[a].clients.size(); ++jl)
        bad_pairs += !within(st.pair_conn[a][jl], pipe.pair_bound(a, jl));
    checks.add("per-pair connection", bad_pairs == 0, std::to_string(bad_pairs) + " pairs over");
    checks.add("backup within 3x radius", backup == 0, std::to_string(backup));
    checks.add("one open per cluster", cluster == 0, std::to_string(cluster));
  }

  Table table{{"scenario", "p_A", "F_A", "C_A", "V_A", "Val_A", "mean", "std_error", "bound", "pass"}, {}};
  std::size_t bad = 0;
  double agg_bound = 0.0;
  for (std::size_t a = 0; a < inst.scenarios.size(); ++a) {
    double bound = 0.0;
    if (alg == "mix") bound = p * pipes[0].scenario_bound(a) + (1.0 - p) * pipes[1].scenario_bound(a);
    else bound = pipes.front().scenario_bound(a);
    agg_bound += probs[a] * bound;
    const bool ok = within(scen[a], bound);
    bad += !ok;
    const ScenarioCosts& c = cd.scenarios[a];
    table.add({std::to_string(a), num(probs[a]), num(c.F_A), num(c.C_A), num(c.V_A), num(c.Val_A), num(scen[a].mean),
               num(scen[a].std_error()), num(bound), fmt_bool(ok)});
  }
  out << table.text();
  checks.add("per-scenario bound", bad == 0, std::to_string(bad) + " scenarios over");
  if (alg == "alg1") {
    const double e2 = std::exp(-2.0);
    agg_bound = (2.0 + 3.0 * e2) * cd.F_star + (1.0 + 2.0 * e2) * cd.C_star;
  }
  out << "aggregate " << num(aggregate.mean) << " +- " << fmt(aggregate.std_error()) << "  bound " << num(agg_bound)
      << '\n';
  checks.add("aggregate bound", within(aggregate, agg_bound));
  finish(opt, table, out);
  return checks.exit_code();
}

int round_robust_cmd(const std::string& file, int k, bool oblivious, double gamma, const RunOptions& opt,
                     std::ostream& out) {
  const InstanceFile f = read_instance_file(file);
  RobustInstance inst;
  inst.base = f.base();
  inst.k = k >= 0 ? k : f.kind == InstanceKind::kRobust ? f.robust.k : -1;
  if (inst.k < 0) throw InvalidInput("--k is required for a non-robust instance");
  inst.validate();
  const RobustFractional frac = solve_robust_lp(inst);
  Checks checks(out);
  out << "k " << inst.k << "  LP " << num(frac.objective) << "  scenarios " << frac.scenarios.size() << '\n';

  if (oblivious) {
    const double g = gamma > 0.0 ? gamma : oblivious_gamma(inst.k);
    const ObliviousRun run = round_oblivious(inst, frac, g, opt.trials, opt.seed, opt.threads);
    out << "gamma " << g << "  analytic factor (1-e^-g) + e^-g * 3 * radius factor = " << num(run.analytic_factor)
        << '\n';
    out << "averaging-branch pairs " << run.otherwise_pairs << ", fallback opens " << run.stats.fallback_opens << '\n';
    Table table{{"scenario", "client", "C", "mean_conn", "std_error", "bound", "pass"}, {}};
    std::size_t bad = 0;
    for (std::size_t a = 0; a < run.C.size(); ++a)
      for (std::size_t j = 0; j < run.C[a].size(); ++j) {
        const double bound = g * run.C[a][j];
        const bool ok = within(run.stats.conn[a][j], bound);
        bad += !ok;
        table.add({std::to_string(a), std::to_string(inst.base.client_ids[j]), num(run.C[a][j]),
                   num(run.stats.conn[a][j].mean), num(run.stats.conn[a][j].std_error()), num(bound), fmt_bool(ok)});
      }
    checks.add("backup within 3x radius bound", run.stats.backup_violations == 0,
               std::to_string(run.stats.backup_violations));
    if (inst.k >= 2) {
      checks.add("per-client connection", bad == 0, std::to_string(bad) + " pairs over");
      checks.add("analytic factor <= gamma", run.analytic_factor <= g, num(run.analytic_factor));
    } else {
      out << "k = 1: " << bad << " pairs over gamma * C, analytic factor " << num(run.analytic_factor)
          << " (reported only)\n";
    }
    finish(opt, table, out);
    return checks.exit_code();
  }

  const double g = gamma > 0.0 ? gamma : robust_gamma(inst.k);
  RobustRun run;
  try {
    run = round_robust(inst, frac, opt.trials, opt.seed, g, opt.threads);
  } catch (const GuaranteeViolation& e) {
    checks.add("k+1 open within 3x radius", false, e.what());
    return checks.exit_code();
  }
  const auto& st = run.stats;
  out << "gamma " << g << "  requirements " << run.plan.reqs.requirements.size() << " (deterministic "
      << run.plan.reqs.deterministic_count << ")  clusters " << run.plan.clusters.size() << "  uncovered blocks "
      << run.plan.uncovered_blocks << '\n';
  out << "mean cost " << num(st.cost.mean) << "  max ratio " << num(st.ratio.max) << "  fallback trials "
      << st.fallback_trials << " of " << st.trials << '\n';
  if (inst.k == 1) out << "earlier bound for k = 1: 6.5\n";
  checks.add("k+1 open within 3x radius", true, "asserted in every trial");
  checks.add("cost <= gamma * LP every trial", st.ratio_violations == 0,
             std::to_string(st.ratio_violations) + " trials over");
  const std::string plan = check_block_plan(run.plan);
  checks.add("block plan", plan.empty(), plan);
  Table table{{"trial", "k", "gamma", "lp", "cost", "ratio", "fallback_opens", "guarantee"}, {}};
  for (std::size_t t = 0; t < st.trial_cost.size(); ++t)
    table.add({std::to_string(t), std::to_string(inst.k), num(g), num(run.lp), num(st.trial_cost[t]),
               num(run.lp > 0 ? st.trial_cost[t] / run.lp : 1.0), std::to_string(st.trial_fallback[t]), "PASS"});
  finish(opt, table, out);
  return checks.exit_code();
}

int oracle_cmd(const std::string& file, const RunOptions& opt, std::ostream& out) {
  const InstanceFile f = read_instance_file(file);
  Checks checks(out);
  double lp = 0.0, ip = 0.0;
  std::ostringstream open;
  if (f.kind == InstanceKind::kUfl) {
    lp = solve_lp(build_ufl_lp(f.ufl)).objective;
    const IntegralUflSolution s = brute_force_ufl(f.ufl);
    ip = solution_cost(f.ufl, s).total;
    for (std::size_t i : s.open) open << ' ' << f.ufl.facility_ids[i];
  } else if (f.kind == InstanceKind::kTwoStage) {
    lp = solve_lp(build_two_stage_lp(f.two_stage)).objective;
    const TwoStageOptimum s = brute_force_two_stage(f.two_stage);
    ip = s.cost;
    open << " stage I:";
    for (std::size_t i : s.first_stage) open << ' ' << f.two_stage.base.facility_ids[i];
  } else {
    lp = solve_robust_lp(f.robust).objective;
    const RobustOptimum s = brute_force_robust(f.robust);
    ip = s.cost;
    for (std::size_t i : s.open) open << ' ' << f.robust.base.facility_ids[i];
  }
  out << "LP " << num(lp) << "  optimum " << num(ip) << "  open" << open.str() << '\n';
  checks.add("optimum >= LP", ip >= lp - kTol.reported * (1.0 + std::abs(lp)));
  Table table{{"kind", "lp", "optimum", "ratio"}, {}};
  table.add({kind_name(f.kind), num(lp), num(ip), num(lp > 0 ? ip / lp : 1.0)});
  finish(opt, table, out);
  return checks.exit_code();
}

int gap_cmd(std::size_t n, int k, const RunOptions& opt, std::ostream& out) {
  const GapInstance gi = gap_instance(n, k);
  const RobustFractional lp = solve_robust_lp(gi.instance);
  const RobustOptimum ip = brute_force_robust(gi.instance);
  Checks checks(out);
  const double ratio = ip.cost / lp.objective;
  out << "n " << n << "  k " << k << "  LP " << num(lp.objective) << " (n/(n-k) = " << num(gi.lp_value())
      << ")  IP " << num(ip.cost) << "  ratio " << num(ratio) << '\n';
  checks.add("LP = n/(n-k)", std::abs(lp.objective - gi.lp_value()) <= kTol.identity);
  checks.add("IP = k+1", std::abs(ip.cost - gi.ip_value()) <= kTol.identity);
  checks.add("ratio = (k+1)(n-k)/n", std::abs(ratio - gi.ratio()) <= 1e-6);
  Table table{{"n", "k", "lp", "ip", "ratio"}, {}};
  table.add({std::to_string(n), std::to_string(k), num(lp.objective), num(ip.cost), num(ratio)});
  finish(opt, table, out);
  return checks.exit_code();
}

int experiment_cmd(const std::string& descriptor, const RunOptions& opt, std::ostream& out) {
  const auto runs = load_experiment(descriptor);
  Table table{{"name", "algorithm", "trials", "seed", "mean_opening", "mean_connection", "mean_total", "std_error"},
              {}};
  for (const ExperimentDescriptor& d : runs) {
    const TrialStats s = monte_carlo(d);
    table.add({d.name, algorithm_name(d.algorithm), std::to_string(s.trials), std::to_string(d.seed),
               num(s.opening.mean), num(s.connection.mean), num(s.total.mean), num(s.total.std_error())});
  }
  out << table.text();
  finish(opt, table, out);
  return 0;
}

int gamma0_cmd(const RunOptions& opt, std::ostream& out) {
  const double g = solve_gamma0();
  const double s = solve_s0();
  const double lhs = (std::exp(-1.0) + std::exp(-g)) / (1.0 - 1.0 / g), rhs = 1.0 + 2.0 * std::exp(-g);
  out << std::setprecision(10) << "gamma0 " << g << "\ns0 " << s << '\n';
  Checks checks(out);
  checks.add("gamma0 residual", std::abs(lhs - rhs) <= 1e-12, fmt(lhs - rhs));
  checks.add("s0 residual", std::abs(s - 1.0 - 2.0 * std::exp(-s)) <= 1e-12);
  Table table{{"quantity", "value"}, {}};
  table.add({"gamma0", num(g)});
  table.add({"s0", num(s)});
  finish(opt, table, out);
  return checks.exit_code();
}

int bound_cmd(double gamma, const RunOptions& opt, std::ostream& out) {
  const BoundBreakdown b = bifactor_bound(gamma);
  out << std::setprecision(12) << "gamma " << b.gamma << "\nopening " << b.opening << "\nconnection " << b.connection
      << "\nbranch 1+2e^-g " << b.branch_uniform << "\nbranch (1/e+e^-g)/(1-1/g) " << b.branch_skewed
      << "\nP(close open) >= " << b.p_close_lower << "\nP(fallback) <= " << b.p_fallback_upper << '\n';
  Table table{{"gamma", "opening", "connection", "branch_uniform", "branch_skewed"}, {}};
  table.add({num(b.gamma), num(b.opening), num(b.connection), num(b.branch_uniform), num(b.branch_skewed)});
  finish(opt, table, out);
  return 0;
}

}  // namespace flround::cli
