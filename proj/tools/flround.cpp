#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "flround/cs_rounding.hpp"
#include "flround/errors.hpp"
#include "flround/stochastic.hpp"

int main(int argc, char** argv) {
  using namespace flround::cli;
  CLI::App app{"flround: LP rounding for facility location variants"};
  app.require_subcommand(1);
  app.fallthrough();
  RunOptions opt;
  app.add_option("--out", opt.csv_path, "write the report as CSV");
  app.add_option("--threads", opt.threads, "worker threads (0: all cores)");

  std::string file, mps, alg = "alg1", descriptor;
  double gamma = 1.575, p = 0.3396, stoch_gamma = flround::kPerScenarioGamma, robust_scale = 0.0;
  int k = -1;
  bool oblivious = false;
  std::size_t n = 0;

  auto add_run = [&](CLI::App* sub) {
    sub->add_option("--trials", opt.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "master seed");
  };

  auto* solve = app.add_subcommand("solve-lp", "solve the LP relaxation of an instance");
  solve->add_option("file", file)->required()->check(CLI::ExistingFile);
  solve->add_option("--mps", mps, "also write the LP in MPS format");

  auto* ufl = app.add_subcommand("round-ufl", "scale, cluster and round a UFL instance");
  ufl->add_option("file", file)->required()->check(CLI::ExistingFile);
  ufl->add_option("--gamma", gamma, "scale in (1, 2)");
  add_run(ufl);

  auto* stoch = app.add_subcommand("round-stoch", "round a two-stage stochastic instance");
  stoch->add_option("file", file)->required()->check(CLI::ExistingFile);
  stoch->add_option("--alg", alg)->check(CLI::IsMember({"alg1", "per-scenario", "mix"}));
  stoch->add_option("--p", p, "mix: probability of running alg1")->check(CLI::Range(0.0, 1.0));
  stoch->add_option("--gamma", stoch_gamma, "per-scenario scale (> 2)");
  add_run(stoch);

  auto* robust = app.add_subcommand("round-robust", "round a k-robust instance and evaluate the adversary");
  robust->add_option("file", file)->required()->check(CLI::ExistingFile);
  robust->add_option("--k", k, "failure budget (defaults to the file's)");
  robust->add_flag("--oblivious", oblivious, "fix each scenario before rounding");
  robust->add_option("--gamma", robust_scale, "override the scale");
  add_run(robust);

  auto* oracle = app.add_subcommand("oracle", "exact optimum by enumeration, compared to the LP");
  oracle->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* gap = app.add_subcommand("gap", "integrality gap family: one client, n unit-cost facilities");
  gap->add_option("--n", n)->required();
  gap->add_option("--k", k)->required();

  auto* exp = app.add_subcommand("experiment", "run the Monte Carlo experiments of a JSON descriptor");
  exp->add_option("descriptor", descriptor)->required()->check(CLI::ExistingFile);

  auto* g0 = app.add_subcommand("gamma0", "scale at which both connection branches agree");
  auto* bound = app.add_subcommand("bound", "bifactor guarantee for one scale");
  bound->add_option("--gamma", gamma)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return solve_lp_cmd(file, mps, opt, std::cout);
    if (*ufl) return round_ufl_cmd(file, gamma, opt, std::cout);
    if (*stoch) return round_stoch_cmd(file, alg, p, stoch_gamma, opt, std::cout);
    if (*robust) return round_robust_cmd(file, k, oblivious, robust_scale, opt, std::cout);
    if (*oracle) return oracle_cmd(file, opt, std::cout);
    if (*gap) return gap_cmd(n, k, opt, std::cout);
    if (*exp) return experiment_cmd(descriptor, opt, std::cout);
    if (*g0) return gamma0_cmd(opt, std::cout);
    if (*bound) return bound_cmd(gamma, opt, std::cout);
  } catch (const flround::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const flround::CapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
