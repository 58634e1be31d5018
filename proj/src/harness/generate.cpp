#include "flround/generate.hpp"

#include <cmath>
#include <numeric>

#include "flround/errors.hpp"
#include "flround/rng.hpp"

namespace flround {

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

void metric_closure(UflInstance& inst) {
  const std::size_t m = inst.num_facilities(), n = inst.num_clients();
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i2 = 0; i2 < m; ++i2)
          for (std::size_t j2 = 0; j2 < n; ++j2) {
            const double via = inst.c(i, j2) + inst.c(i2, j2) + inst.c(i2, j);
            if (via < inst.conn[i * n + j]) {
              inst.conn[i * n + j] = via;
              changed = true;
            }
          }
  }
}

UflInstance generate_euclidean_instance(const EuclideanSpec& spec) {
  if (spec.facilities == 0 || spec.clients == 0) throw InvalidInput("instance sizes must be positive");
  if (!(spec.box > 0.0) || !(spec.open_lo >= 0.0) || !(spec.open_hi >= spec.open_lo))
    throw InvalidInput("bad box size or opening cost range");
  Rng rng(spec.seed);
  auto point = [&] { return std::pair{spec.box * rng.uniform(), spec.box * rng.uniform()}; };
  std::vector<std::pair<double, double>> fac(spec.facilities), cli(spec.clients);
  for (auto& p : fac) p = point();
  for (auto& p : cli) p = point();
  std::vector<double> open(spec.facilities);
  for (double& f : open) f = round6(spec.open_lo + (spec.open_hi - spec.open_lo) * rng.uniform());
  std::vector<std::vector<double>> dist(spec.facilities, std::vector<double>(spec.clients));
  for (std::size_t i = 0; i < spec.facilities; ++i)
    for (std::size_t j = 0; j < spec.clients; ++j)
      dist[i][j] = round6(std::hypot(fac[i].first - cli[j].first, fac[i].second - cli[j].second));
  UflInstance inst = UflInstance::from_matrix(open, dist);
  metric_closure(inst);
  return inst;
}

TwoStageInstance generate_two_stage_instance(const TwoStageSpec& spec) {
  if (spec.scenarios == 0) throw InvalidInput("need at least one scenario");
  if (!(spec.inflation_lo > 0.0) || spec.inflation_hi < spec.inflation_lo)
    throw InvalidInput("bad stage-II inflation range");
  TwoStageInstance out;
  out.base = generate_euclidean_instance(spec.base);
  Rng rng(derive_seed(spec.base.seed, 0x5ce0));
  const std::size_t m = out.base.num_facilities(), n = out.base.num_clients();
  std::vector<double> weight(spec.scenarios);
  for (double& w : weight) w = 0.2 + rng.uniform();
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  for (std::size_t a = 0; a < spec.scenarios; ++a) {
    Scenario sc;
    sc.probability = weight[a] / total;
    for (std::size_t j = 0; j < n; ++j)
      if (rng.bernoulli(spec.client_probability)) sc.clients.push_back(j);
    if (sc.clients.empty()) sc.clients.push_back(static_cast<std::size_t>(rng.uniform() * n) % n);
    for (std::size_t i = 0; i < m; ++i)
      sc.open_cost.push_back(
          round6(out.base.open_cost[i] * (spec.inflation_lo + (spec.inflation_hi - spec.inflation_lo) * rng.uniform())));
    out.scenarios.push_back(std::move(sc));
  }
  out.validate();
  return out;
}

RobustInstance generate_robust_instance(const EuclideanSpec& spec, int k) {
  RobustInstance out;
  out.base = generate_euclidean_instance(spec);
  out.k = k;
  out.validate();
  return out;
}

}  // namespace flround
