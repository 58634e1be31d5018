#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flround/instance_io.hpp"
#include "flround/stats.hpp"

namespace flround {

struct TrialStats {
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  RunningMoments opening, connection, total;
  std::vector<RunningMoments> scenario;  // two-stage: COST(A); oblivious: opening + connection under A
  std::map<std::string, std::int64_t> events;

  void merge(const TrialStats& o);
};

enum class Algorithm { kCs, kAlg1, kPerScenario, kMix, kRobust, kOblivious };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentDescriptor {
  std::string name;
  Algorithm algorithm = Algorithm::kCs;
  std::string instance;  // path; relative paths resolve against the descriptor's directory
  double gamma = 0.0;    // 0 picks the algorithm's default
  double p = 0.3396;     // mix: probability of ALG1
  int k = -1;            // robust: overrides the file's k when >= 0
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t first_trial = 0;
  unsigned threads = 0;
};

// Accepts one descriptor object or {"runs": [...]}. Unknown keys are
// rejected so typos do not silently fall back to defaults.
std::vector<ExperimentDescriptor> parse_experiment(const nlohmann::json& doc, const std::string& base_dir);
std::vector<ExperimentDescriptor> load_experiment(const std::string& path);

nlohmann::json to_json(const ExperimentDescriptor& d);
nlohmann::json to_json(const TrialStats& s);

// Solves the LP of the instance, prepares the pipeline and runs trials
// [first_trial, first_trial + trials); trial t draws from
// derive_seed(seed, t).
TrialStats monte_carlo(const ExperimentDescriptor& d, const InstanceFile& file);
TrialStats monte_carlo(const ExperimentDescriptor& d);

}  // namespace flround
