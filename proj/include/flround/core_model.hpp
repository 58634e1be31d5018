#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flround {

// Facilities and clients are addressed by dense indices 0..m-1 / 0..n-1.
// The external labels are only carried for file I/O and reports.
struct UflInstance {
  std::vector<std::int64_t> facility_ids;
  std::vector<std::int64_t> client_ids;
  std::vector<double> open_cost;
  std::vector<double> conn;  // conn[i * num_clients() + j]

  std::size_t num_facilities() const { return open_cost.size(); }
  std::size_t num_clients() const { return client_ids.size(); }
  double c(std::size_t i, std::size_t j) const {
    return conn[i * num_clients() + j];
  }

  // dist[i][j]; labels default to 1..m and 1..n.
  static UflInstance from_matrix(std::vector<double> open_cost,
                                 const std::vector<std::vector<double>>& dist);

  // Throws InvalidInput on shape errors, zero facilities, or costs that are
  // negative or not finite.
  void validate() const;
};

struct MetricViolation {
  std::size_t i, j;        // the violated pair
  std::size_t via_i, via_j;  // tightest witness path i - via_j - via_i - j
  double lhs, rhs;
};

// Checks c_ij <= c_ij' + c_i'j' + c_i'j for every quadruple. Reports the
// tightest witness per violated (i, j). O(m^2 n).
std::vector<MetricViolation> validate_metric(const UflInstance& inst,
                                             double tol = 1e-9);

// Copy ids 0..m-1 are the original facilities; add_copy() hands out fresh
// ids and records which original they stand for.
class FacilityLineage {
 public:
  FacilityLineage() = default;
  explicit FacilityLineage(std::size_t originals);

  std::size_t add_copy(std::size_t of);
  std::size_t resolve(std::size_t id) const { return origin_.at(id); }
  std::size_t size() const { return origin_.size(); }
  std::size_t originals() const { return originals_; }

 private:
  std::size_t originals_ = 0;
  std::vector<std::size_t> origin_;
};

// Fractional UFL solution over a list of facility copies. x is stored
// client-major: x[j * facilities.size() + a].
struct FractionalUflSolution {
  FacilityLineage lineage;
  std::vector<std::size_t> facilities;  // copy ids
  std::vector<double> y;
  std::vector<double> x;
  std::size_t num_clients = 0;

  std::size_t width() const { return facilities.size(); }
  double xv(std::size_t j, std::size_t a) const { return x[j * width() + a]; }
  double& xv(std::size_t j, std::size_t a) { return x[j * width() + a]; }
  std::size_t origin(std::size_t a) const {
    return lineage.resolve(facilities[a]);
  }

  // One copy per original facility.
  static FractionalUflSolution over_originals(std::size_t num_facilities,
                                              std::size_t num_clients);
};

struct CostSplit {
  double opening = 0.0;
  double connection = 0.0;
  double total = 0.0;
};

CostSplit fractional_cost(const UflInstance& inst,
                          const FractionalUflSolution& sol);

// Empty string when sum_a x_ja = 1 +- 1e-7 and x <= y + 1e-9 everywhere;
// otherwise a description of the first violation.
std::string check_fractional(const UflInstance& inst,
                             const FractionalUflSolution& sol);

// Replaces copy `a` by two copies with openings `amount` and y_a - amount.
// Each client's x_ja is laid out as the prefix [0, x_ja] of the copy's mass,
// so the first copy gets min(x_ja, amount) and the second the rest. The new
// copies sit at positions a and a + 1.
FractionalUflSolution split_facility(const FractionalUflSolution& sol,
                                     std::size_t a, double amount);

// Sorted cut points 0 = b_0 < b_1 < ... < b_r = total of the mass line
// [0, total]: every threshold strictly inside, plus every integer when
// `unit_pieces` is set. Points closer than `snap` are merged.
std::vector<double> piece_boundaries(double total,
                                     std::span<const double> thresholds,
                                     bool unit_pieces, double snap);

struct IntegralUflSolution {
  std::vector<std::size_t> open;    // original indices, sorted, unique
  std::vector<std::size_t> assign;  // original index per client
};

// Opening counts each original once. Throws InvalidInput when a client is
// assigned to a facility that is not open.
CostSplit solution_cost(const UflInstance& inst,
                        const IntegralUflSolution& sol);

struct Scenario {
  double probability = 0.0;
  std::vector<std::size_t> clients;  // sorted client indices
  std::vector<double> open_cost;     // second-stage cost per facility
};

// base.open_cost holds the first-stage costs.
struct TwoStageInstance {
  UflInstance base;
  std::vector<Scenario> scenarios;

  void validate() const;
};

struct RobustInstance {
  UflInstance base;
  int k = 0;

  void validate() const;
};

// Fractional and dual accounting of one scenario of the two-stage LP.
struct ScenarioCosts {
  double F_A = 0.0;    // sum_i f^I y_i + f^A y_Ai
  double C_A = 0.0;    // sum_{j in A} sum_i c_ij x_Aij
  double V_A = 0.0;    // sum_{j in A} v_jA
  double Val_A = 0.0;  // F_A + C_A
};

struct CostDecomposition {
  double F_star = 0.0;
  double C_star = 0.0;
  std::vector<ScenarioCosts> scenarios;
};

}  // namespace flround
