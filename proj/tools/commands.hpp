#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

// Subcommand bodies of the flround CLI. Each prints a summary to `out`,
// writes a CSV report to `csv_path` when it is nonempty and returns the exit
// code (0 iff every asserted check passed).
namespace flround::cli {

struct RunOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string csv_path;
};

int solve_lp_cmd(const std::string& file, const std::string& mps_path, const RunOptions& opt, std::ostream& out);
int round_ufl_cmd(const std::string& file, double gamma, const RunOptions& opt, std::ostream& out);
// alg: alg1, per-scenario or mix
int round_stoch_cmd(const std::string& file, const std::string& alg, double p, double gamma, const RunOptions& opt,
                    std::ostream& out);
int round_robust_cmd(const std::string& file, int k, bool oblivious, double gamma, const RunOptions& opt,
                     std::ostream& out);
int oracle_cmd(const std::string& file, const RunOptions& opt, std::ostream& out);
int gap_cmd(std::size_t n, int k, const RunOptions& opt, std::ostream& out);
int experiment_cmd(const std::string& descriptor, const RunOptions& opt, std::ostream& out);
int gamma0_cmd(const RunOptions& opt, std::ostream& out);
int bound_cmd(double gamma, const RunOptions& opt, std::ostream& out);

}  // namespace flround::cli
