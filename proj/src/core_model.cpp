#include "flround/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flround/config.hpp"
#include "flround/errors.hpp"

namespace flround {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

UflInstance UflInstance::from_matrix(
    std::vector<double> open_cost,
    const std::vector<std::vector<double>>& dist) {
  UflInstance inst;
  const std::size_t m = open_cost.size();
  if (dist.size() != m) throw InvalidInput("distance matrix needs one row per facility");
  const std::size_t n = m == 0 ? 0 : dist[0].size();
  inst.open_cost = std::move(open_cost);
  for (std::size_t i = 0; i < m; ++i) inst.facility_ids.push_back(static_cast<std::int64_t>(i + 1));
  for (std::size_t j = 0; j < n; ++j) inst.client_ids.push_back(static_cast<std::int64_t>(j + 1));
  inst.conn.reserve(m * n);
  for (const auto& row : dist) {
    if (row.size() != n) throw InvalidInput("ragged distance matrix");
    inst.conn.insert(inst.conn.end(), row.begin(), row.end());
  }
  inst.validate();
  return inst;
}

void UflInstance::validate() const {
  if (open_cost.empty()) throw InvalidInput("instance has no facilities");
  if (facility_ids.size() != open_cost.size())
    throw InvalidInput("facility id list does not match cost list");
  if (conn.size() != num_facilities() * num_clients())
    throw InvalidInput("connection matrix has the wrong size");
  for (std::size_t i = 0; i < open_cost.size(); ++i) {
    if (!finite_nonneg(open_cost[i]))
      throw InvalidInput("opening cost of facility " + std::to_string(facility_ids[i]) +
                         " is negative or not finite");
  }
  for (double c : conn) {
    if (!finite_nonneg(c)) throw InvalidInput("connection cost is negative or not finite");
  }
}

std::vector<MetricViolation> validate_metric(const UflInstance& inst, double tol) {
  const std::size_t m = inst.num_facilities();
  const std::size_t n = inst.num_clients();
  std::vector<MetricViolation> out;
  if (n == 0) return out;
  // best[i][i'] = min_j' c_ij' + c_i'j', with its argmin.
  std::vector<double> best(m * m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> arg(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t i2 = 0; i2 < m; ++i2) {
      for (std::size_t j2 = 0; j2 < n; ++j2) {
        const double v = inst.c(i, j2) + inst.c(i2, j2);
        if (v < best[i * m + i2]) {
          best[i * m + i2] = v;
          arg[i * m + i2] = j2;
        }
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double rhs = std::numeric_limits<double>::infinity();
      std::size_t via = i;
      for (std::size_t i2 = 0; i2 < m; ++i2) {
        const double v = best[i * m + i2] + inst.c(i2, j);
        if (v < rhs) {
          rhs = v;
          via = i2;
        }
      }
      const double lhs = inst.c(i, j);
      if (lhs > rhs + tol) out.push_back({i, j, via, arg[i * m + via], lhs, rhs});
    }
  }
  return out;
}

FacilityLineage::FacilityLineage(std::size_t originals) : originals_(originals) {
  origin_.resize(originals);
  for (std::size_t i = 0; i < originals; ++i) origin_[i] = i;
}

std::size_t FacilityLineage::add_copy(std::size_t of) {
  const std::size_t root = resolve(of);
  origin_.push_back(root);
  return origin_.size() - 1;
}

FractionalUflSolution FractionalUflSolution::over_originals(std::size_t num_facilities,
                                                            std::size_t num_clients) {
  FractionalUflSolution sol;
  sol.lineage = FacilityLineage(num_facilities);
  sol.facilities.resize(num_facilities);
  for (std::size_t i = 0; i < num_facilities; ++i) sol.facilities[i] = i;
  sol.y.assign(num_facilities, 0.0);
  sol.x.assign(num_facilities * num_clients, 0.0);
  sol.num_clients = num_clients;
  return sol;
}

CostSplit fractional_cost(const UflInstance& inst, const FractionalUflSolution& sol) {
  CostSplit cost;
  for (std::size_t a = 0; a < sol.width(); ++a) cost.opening += inst.open_cost[sol.origin(a)] * sol.y[a];
  for (std::size_t j = 0; j < sol.num_clients; ++j) {
    for (std::size_t a = 0; a < sol.width(); ++a) cost.connection += inst.c(sol.origin(a), j) * sol.xv(j, a);
  }
  cost.total = cost.opening + cost.connection;
  return cost;
}

std::string check_fractional(const UflInstance& inst, const FractionalUflSolution& sol) {
  std::ostringstream msg;
  if (sol.num_clients != inst.num_clients()) return "client count mismatch";
  if (sol.y.size() != sol.width() || sol.x.size() != sol.width() * sol.num_clients)
    return "solution arrays have the wrong size";
  for (std::size_t a = 0; a < sol.width(); ++a) {
    if (sol.y[a] < -kTol.feasibility) {
      msg << "negative opening on copy " << sol.facilities[a];
      return msg.str();
    }
  }
  for (std::size_t j = 0; j < sol.num_clients; ++j) {
    double sum = 0.0;
    for (std::size_t a = 0; a < sol.width(); ++a) {
      const double v = sol.xv(j, a);
      if (v < -kTol.feasibility || v > sol.y[a] + kTol.identity) {
        msg << "x[" << j << "," << sol.facilities[a] << "] = " << v << " outside [0, y = " << sol.y[a] << "]";
        return msg.str();
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kTol.feasibility) {
      msg << "client " << j << " is served " << sum << " times";
      return msg.str();
    }
  }
  return {};
}

FractionalUflSolution split_facility(const FractionalUflSolution& sol, std::size_t a, double amount) {
  if (a >= sol.width()) throw InvalidInput("split_facility: no such copy");
  if (!(amount > 0.0 && amount < sol.y[a]))
    throw InvalidInput("split_facility: amount must lie strictly between 0 and the opening");
  FractionalUflSolution out;
  out.lineage = sol.lineage;
  out.num_clients = sol.num_clients;
  const std::size_t w = sol.width() + 1;
  const std::size_t lo_id = out.lineage.add_copy(sol.facilities[a]);
  const std::size_t hi_id = out.lineage.add_copy(sol.facilities[a]);
  out.facilities.reserve(w);
  out.y.reserve(w);
  for (std::size_t b = 0; b < sol.width(); ++b) {
    if (b == a) {
      out.facilities.push_back(lo_id);
      out.y.push_back(amount);
      out.facilities.push_back(hi_id);
      out.y.push_back(sol.y[a] - amount);
    } else {
      out.facilities.push_back(sol.facilities[b]);
      out.y.push_back(sol.y[b]);
    }
  }
  out.x.assign(w * sol.num_clients, 0.0);
  for (std::size_t j = 0; j < sol.num_clients; ++j) {
    for (std::size_t b = 0, o = 0; b < sol.width(); ++b, ++o) {
      const double v = sol.xv(j, b);
      if (b == a) {
        const double first = std::min(v, amount);
        out.xv(j, o) = first;
        out.xv(j, o + 1) = v - first;
        ++o;
      } else {
        out.xv(j, o) = v;
      }
    }
  }
  return out;
}

std::vector<double> piece_boundaries(double total, std::span<const double> thresholds, bool unit_pieces,
                                     double snap) {
  std::vector<double> cuts;
  cuts.reserve(thresholds.size() + 2);
  cuts.push_back(0.0);
  for (double t : thresholds) {
    if (t > snap && t < total - snap) cuts.push_back(t);
  }
  if (unit_pieces) {
    for (double u = 1.0; u < total - snap; u += 1.0) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  out.reserve(cuts.size() + 1);
  for (double c : cuts) {
    if (out.empty() || c - out.back() > snap) out.push_back(c);
  }
  if (total - out.back() > snap) {
    out.push_back(total);
  } else if (out.size() > 1) {
    out.back() = total;
  } else {
    out.push_back(total);
  }
  return out;
}

CostSplit solution_cost(const UflInstance& inst, const IntegralUflSolution& sol) {
  const std::size_t m = inst.num_facilities();
  std::vector<char> is_open(m, 0);
  CostSplit cost;
  for (std::size_t i : sol.open) {
    if (i >= m) throw InvalidInput("open facility index out of range");
    if (!is_open[i]) cost.opening += inst.open_cost[i];
    is_open[i] = 1;
  }
  if (sol.assign.size() != inst.num_clients()) throw InvalidInput("assignment does not cover every client");
  for (std::size_t j = 0; j < sol.assign.size(); ++j) {
    const std::size_t i = sol.assign[j];
    if (i >= m || !is_open[i])
      throw InvalidInput("client " + std::to_string(inst.client_ids[j]) + " is assigned to a closed facility");
    cost.connection += inst.c(i, j);
  }
  cost.total = cost.opening + cost.connection;
  return cost;
}

void TwoStageInstance::validate() const {
  base.validate();
  if (scenarios.empty()) throw InvalidInput("two-stage instance has no scenarios");
  double total = 0.0;
  for (const Scenario& s : scenarios) {
    if (!(s.probability >= 0.0) || !std::isfinite(s.probability))
      throw InvalidInput("scenario probability is negative or not finite");
    total += s.probability;
    if (s.clients.empty()) throw InvalidInput("scenario has an empty client set");
    if (!std::is_sorted(s.clients.begin(), s.clients.end()) ||
        std::adjacent_find(s.clients.begin(), s.clients.end()) != s.clients.end())
      throw InvalidInput("scenario client list must be sorted and free of duplicates");
    if (s.clients.back() >= base.num_clients()) throw InvalidInput("scenario names an unknown client");
    if (s.open_cost.size() != base.num_facilities())
      throw InvalidInput("scenario needs one second-stage cost per facility");
    for (double f : s.open_cost) {
      if (!finite_nonneg(f)) throw InvalidInput("second-stage cost is negative or not finite");
    }
  }
  if (std::abs(total - 1.0) > kTol.identity) throw InvalidInput("scenario probabilities do not sum to 1");
}

void RobustInstance::validate() const {
  base.validate();
  if (k < 0) throw InvalidInput("failure budget k must be nonnegative");
  if (static_cast<std::size_t>(k) >= base.num_facilities())
    throw InvalidInput("failure budget k must be smaller than the number of facilities");
}

}  // namespace flround
