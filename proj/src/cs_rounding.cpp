#include "flround/cs_rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flround/config.hpp"
#include "flround/errors.hpp"
#include "flround/kernels.hpp"
#include "flround/parallel.hpp"

namespace flround {

namespace {

void require_gamma_for_pipeline(double gamma) {
  if (!(gamma >= 1.0 && gamma < 2.0)) throw InvalidInput("gamma must lie in [1, 2)");
}

}  // namespace

FractionalUflSolution scale_and_reassign(const UflInstance& inst, const FractionalUflSolution& sol, double gamma) {
  require_gamma_for_pipeline(gamma);
  FractionalUflSolution out = sol;
  const std::size_t w = sol.width();
  for (double& v : out.y) v *= gamma;
  std::fill(out.x.begin(), out.x.end(), 0.0);
  std::vector<std::size_t> order(w);
  for (std::size_t j = 0; j < sol.num_clients; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ca = inst.c(sol.origin(a), j), cb = inst.c(sol.origin(b), j);
      if (ca != cb) return ca < cb;
      if (sol.origin(a) != sol.origin(b)) return sol.origin(a) < sol.origin(b);
      return a < b;
    });
    double need = 1.0;
    for (std::size_t a : order) {
      if (need <= kTol.snap) break;
      const double take = std::min(need, out.y[a]);
      if (take <= 0.0) continue;
      out.xv(j, a) = take;
      need -= take;
    }
  }
  return out;
}

CompleteSolution complete_solution(const UflInstance& inst, const FractionalUflSolution& original,
                                   const FractionalUflSolution& reassigned, double gamma) {
  (void)inst;
  CompleteSolution cs;
  cs.gamma = gamma;
  const std::size_t n = reassigned.num_clients;
  FractionalUflSolution& bar = cs.bar;
  bar.lineage = reassigned.lineage;
  bar.num_clients = n;
  struct Piece {
    std::size_t from;  // copy position in `reassigned`
    double lo, hi;
  };
  std::vector<Piece> pieces;
  std::vector<double> thresholds;
  std::size_t positive = 0;
  for (std::size_t a = 0; a < reassigned.width(); ++a) {
    const double total = reassigned.y[a];
    if (total <= kTol.snap) continue;
    ++positive;
    thresholds.clear();
    for (std::size_t j = 0; j < n; ++j) {
      thresholds.push_back(reassigned.xv(j, a));
      thresholds.push_back(gamma * original.xv(j, a));
    }
    const std::vector<double> cuts = piece_boundaries(total, thresholds, true, kTol.snap);
    const std::size_t k_count = cuts.size() - 1;
    for (std::size_t k = 0; k < k_count; ++k) {
      pieces.push_back({a, cuts[k], cuts[k + 1]});
      const std::size_t id =
          k_count == 1 ? reassigned.facilities[a] : bar.lineage.add_copy(reassigned.facilities[a]);
      bar.facilities.push_back(id);
      bar.y.push_back(cuts[k + 1] - cuts[k]);
    }
  }
  cs.splits = pieces.size() - positive;
  const std::size_t P = pieces.size();
  bar.x.assign(n * P, 0.0);
  cs.x_star.assign(n * P, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < P; ++p) {
      const Piece& pc = pieces[p];
      if (pc.hi <= reassigned.xv(j, pc.from) + kTol.snap) bar.xv(j, p) = bar.y[p];
      const double scaled = gamma * original.xv(j, pc.from);
      double overlap = std::min(pc.hi, scaled) - pc.lo;
      if (overlap < kTol.snap) overlap = 0.0;
      if (overlap > bar.y[p] - kTol.snap) overlap = bar.y[p];
      cs.x_star[j * P + p] = overlap / gamma;
    }
  }
  return cs;
}

std::vector<ClientStats> client_stats(const UflInstance& inst, const CompleteSolution& cs) {
  const FractionalUflSolution& bar = cs.bar;
  const std::size_t P = bar.width();
  std::vector<ClientStats> out(bar.num_clients);
  for (std::size_t j = 0; j < bar.num_clients; ++j) {
    ClientStats& s = out[j];
    double close_w = 0.0, dist_w = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      const double c = inst.c(bar.origin(p), j);
      s.d += c * cs.xs(j, p);
      if (cs.close(j, p)) {
        s.close.push_back(p);
        s.close_mass += bar.y[p];
        close_w += c * bar.y[p];
        s.d_max = std::max(s.d_max, c);
      } else if (cs.xs(j, p) > 0.0) {
        s.distant.push_back(p);
        s.distant_mass += bar.y[p];
        dist_w += c * bar.y[p];
      }
    }
    s.d_close = s.close_mass > 0.0 ? close_w / s.close_mass : 0.0;
    s.d_distant = s.distant_mass > 0.0 ? dist_w / s.distant_mass : s.d_max;
    s.rho = s.d > 0.0 ? (s.d - s.d_close) / s.d : 0.0;
    if (!s.distant.empty() && cs.gamma > 1.0)
      s.lemma1_residual = std::abs(s.d_distant - s.d * (1.0 + s.rho / (cs.gamma - 1.0)));
  }
  return out;
}

std::string check_client_stats(const CompleteSolution& cs, const std::vector<ClientStats>& stats) {
  std::ostringstream msg;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const ClientStats& s = stats[j];
    const double tol = kTol.identity * std::max(1.0, s.d_distant);
    if (std::abs(s.close_mass - 1.0) > kTol.feasibility) msg << "client " << j << ": close mass " << s.close_mass;
    else if (s.rho < -kTol.identity || s.rho > 1.0 + kTol.identity) msg << "client " << j << ": rho " << s.rho;
    else if (s.d_close > s.d + tol) msg << "client " << j << ": d_close " << s.d_close << " > d " << s.d;
    else if (!s.distant.empty() && s.d > s.d_distant + tol) msg << "client " << j << ": d > d_distant";
    else if (s.d_max > s.d_distant + tol) msg << "client " << j << ": d_max > d_distant";
    else if (s.lemma1_residual > tol) msg << "client " << j << ": distant-average identity off by " << s.lemma1_residual;
    if (!msg.str().empty()) return msg.str();
  }
  (void)cs;
  return {};
}

Clustering build_clusters(const CompleteSolution& cs, const std::vector<ClientStats>& stats) {
  const std::size_t n = stats.size();
  const std::size_t P = cs.bar.width();
  Clustering cl;
  cl.cluster_of_piece.assign(P, -1);
  cl.owner.assign(n, 0);
  cl.is_center.assign(n, 0);
  std::vector<std::vector<std::size_t>> users(P);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p : stats[j].close) users[p].push_back(j);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return stats[a].d_close + stats[a].d_max < stats[b].d_close + stats[b].d_max;
  });
  std::vector<char> removed(n, 0);
  for (std::size_t j : order) {
    if (removed[j]) continue;
    const std::size_t id = cl.clusters.size();
    Cluster c;
    c.center = j;
    c.key = stats[j].d_close + stats[j].d_max;
    c.pieces = stats[j].close;
    for (std::size_t p : c.pieces) {
      c.mass += cs.bar.y[p];
      cl.cluster_of_piece[p] = static_cast<long>(id);
      for (std::size_t u : users[p]) {
        if (!removed[u]) {
          removed[u] = 1;
          cl.owner[u] = id;
        }
      }
    }
    cl.is_center[j] = 1;
    cl.owner[j] = id;
    cl.clusters.push_back(std::move(c));
  }
  for (std::size_t p = 0; p < P; ++p) {
    if (cl.cluster_of_piece[p] < 0 && cs.bar.y[p] > 0.0) cl.unclustered.push_back(p);
  }
  return cl;
}

std::string check_clustering(const CompleteSolution& cs, const std::vector<ClientStats>& stats, const Clustering& cl) {
  std::ostringstream msg;
  std::vector<int> seen(cs.bar.width(), 0);
  for (std::size_t c = 0; c < cl.clusters.size(); ++c) {
    const Cluster& k = cl.clusters[c];
    if (std::abs(k.mass - 1.0) > kTol.feasibility) {
      msg << "cluster " << c << " has mass " << k.mass;
      return msg.str();
    }
    for (std::size_t p : k.pieces) {
      if (seen[p]++) {
        msg << "piece " << p << " belongs to two clusters";
        return msg.str();
      }
    }
  }
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const Cluster& k = cl.clusters[cl.owner[j]];
    if (cl.is_center[j]) continue;
    bool shares = false;
    for (std::size_t p : stats[j].close) shares = shares || cl.cluster_of_piece[p] == static_cast<long>(cl.owner[j]);
    if (!shares) {
      msg << "client " << j << " shares no facility with its cluster center";
      return msg.str();
    }
    if (k.key > stats[j].d_close + stats[j].d_max + kTol.identity) {
      msg << "client " << j << " was charged to a center chosen after it";
      return msg.str();
    }
  }
  return {};
}

std::vector<std::uint8_t> round_solution(const CompleteSolution& cs, const Clustering& cl, Rng& rng) {
  std::vector<std::uint8_t> open(cs.bar.width(), 0);
  std::vector<double> w;
  for (const Cluster& k : cl.clusters) {
    w.clear();
    for (std::size_t p : k.pieces) w.push_back(cs.bar.y[p]);
    open[k.pieces[rng.pick(w)]] = 1;
  }
  for (std::size_t p : cl.unclustered) open[p] = rng.bernoulli(cs.bar.y[p]) ? 1 : 0;
  return open;
}

std::vector<double> piece_distances(const UflInstance& inst, const CompleteSolution& cs) {
  const std::size_t P = cs.bar.width();
  std::vector<double> dist(cs.bar.num_clients * P);
  for (std::size_t j = 0; j < cs.bar.num_clients; ++j) {
    for (std::size_t p = 0; p < P; ++p) dist[j * P + p] = inst.c(cs.bar.origin(p), j);
  }
  return dist;
}

Connection connect_clients(const UflInstance& inst, const CompleteSolution& cs, const std::vector<ClientStats>& stats,
                           const Clustering& cl, const std::vector<std::uint8_t>& open,
                           const std::vector<double>& dist) {
  const std::size_t P = cs.bar.width();
  const std::size_t n = cs.bar.num_clients;
  Connection out;
  std::vector<char> orig_open(inst.num_facilities(), 0);
  for (std::size_t p = 0; p < P; ++p) {
    if (!open[p]) continue;
    const std::size_t o = cs.bar.origin(p);
    out.opening_charge += inst.open_cost[o];
    if (!orig_open[o]) out.opening += inst.open_cost[o];
    orig_open[o] = 1;
  }
  for (std::size_t o = 0; o < orig_open.size(); ++o) {
    if (orig_open[o]) out.solution.open.push_back(o);
  }
  out.cost.resize(n);
  out.piece.resize(n);
  out.event.resize(n);
  out.solution.assign.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t p = kernels::argmin_open({dist.data() + j * P, P}, open);
    if (p == kernels::kNoIndex) throw GuaranteeViolation("no facility is open");
    out.piece[j] = p;
    out.cost[j] = dist[j * P + p];
    out.solution.assign[j] = cs.bar.origin(p);
    const ClientStats& s = stats[j];
    bool any_close = false, any_distant = false;
    for (std::size_t q : s.close) any_close = any_close || open[q];
    for (std::size_t q : s.distant) any_distant = any_distant || open[q];
    if (any_close) {
      out.event[j] = ConnectEvent::kCloseOpen;
    } else if (any_distant) {
      out.event[j] = ConnectEvent::kDistantOpen;
    } else {
      out.event[j] = ConnectEvent::kFallback;
      const ClientStats& center = stats[cl.clusters[cl.owner[j]].center];
      if (out.cost[j] > s.d_max + 2.0 * center.d_max + kTol.identity * (1.0 + out.cost[j])) ++out.lemma2_violations;
    }
  }
  return out;
}

CsPipeline CsPipeline::prepare(const UflInstance& inst, const FractionalUflSolution& sol, double gamma) {
  CsPipeline pipe;
  pipe.inst = &inst;
  pipe.original = sol;
  const FractionalUflSolution re = scale_and_reassign(inst, sol, gamma);
  pipe.complete = complete_solution(inst, sol, re, gamma);
  pipe.stats = client_stats(inst, pipe.complete);
  pipe.clustering = build_clusters(pipe.complete, pipe.stats);
  pipe.dist = piece_distances(inst, pipe.complete);
  const CostSplit fc = fractional_cost(inst, sol);
  pipe.F_star = fc.opening;
  pipe.C_star = fc.connection;
  pipe.C_j.assign(sol.num_clients, 0.0);
  for (std::size_t j = 0; j < sol.num_clients; ++j) {
    for (std::size_t a = 0; a < sol.width(); ++a) pipe.C_j[j] += inst.c(sol.origin(a), j) * sol.xv(j, a);
  }
  return pipe;
}

namespace {

template <class F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

double branch_skewed(double g) { return (std::exp(-1.0) + std::exp(-g)) / (1.0 - 1.0 / g); }
double branch_uniform(double g) { return 1.0 + 2.0 * std::exp(-g); }

}  // namespace

double solve_gamma0() {
  return bisect([](double g) { return branch_skewed(g) - branch_uniform(g); }, 1.0 + 1e-9, 2.0);
}

double solve_s0() {
  return bisect([](double s) { return s - 1.0 - 2.0 * std::exp(-s); }, 1.0, 2.0);
}

BoundBreakdown bifactor_bound(double gamma) {
  if (!(gamma > 1.0 && gamma < 2.0)) throw InvalidInput("bifactor bound needs 1 < gamma < 2");
  BoundBreakdown b;
  b.gamma = gamma;
  b.p_close_lower = 1.0 - std::exp(-1.0);
  b.p_fallback_upper = std::exp(-gamma);
  b.branch_uniform = branch_uniform(gamma);
  b.branch_skewed = branch_skewed(gamma);
  b.connection = std::max(b.branch_uniform, b.branch_skewed);
  b.opening = gamma;
  b.s0 = solve_s0();
  return b;
}

AdversarialCase adversarial_instance(AdversaryKind kind, double gamma_target, double a, double b, std::size_t n,
                                     double open_cost) {
  if (n == 0) throw InvalidInput("adversarial instance needs at least one facility");
  if (!(a >= 0.0) || !(open_cost >= 0.0)) throw InvalidInput("distances and costs must be nonnegative");
  std::vector<std::vector<double>> dist(n, std::vector<double>(1, a));
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  if (kind == AdversaryKind::kTwoDistance) {
    if (!(a > 0.0 && a < b)) throw InvalidInput("two-distance instance needs 0 < a < b");
    if (n < 2) throw InvalidInput("two-distance instance needs at least two facilities");
    if (!(gamma_target > 1.0)) throw InvalidInput("two-distance instance needs gamma_target > 1");
    const std::size_t near = n / 2;
    const double near_mass = 1.0 / gamma_target - 1e-6;
    for (std::size_t i = 0; i < n; ++i) {
      const bool is_near = i < near;
      dist[i][0] = is_near ? a : b;
      x[i] = is_near ? near_mass / static_cast<double>(near) : (1.0 - near_mass) / static_cast<double>(n - near);
    }
  }
  AdversarialCase out{UflInstance::from_matrix(std::vector<double>(n, open_cost), dist),
                      FractionalUflSolution::over_originals(n, 1)};
  for (std::size_t i = 0; i < n; ++i) {
    out.solution.y[i] = x[i];
    out.solution.xv(0, i) = x[i];
  }
  return out;
}

CsTrialStats CsTrialStats::empty_for(const CsPipeline& pipe, std::size_t track_pairs) {
  CsTrialStats s;
  const std::size_t n = pipe.stats.size();
  s.client_conn.resize(n);
  s.client_fallback_conn.resize(n);
  s.client_all_closed.assign(n, 0);
  s.piece_open.assign(pipe.complete.bar.width(), 0);
  s.tracked = std::min(track_pairs, pipe.complete.bar.width());
  s.joint_open.assign(s.tracked * s.tracked, 0);
  return s;
}

void CsTrialStats::merge(const CsTrialStats& o) {
  trials += o.trials;
  opening.merge(o.opening);
  opening_charge.merge(o.opening_charge);
  connection.merge(o.connection);
  total.merge(o.total);
  for (std::size_t j = 0; j < client_conn.size(); ++j) {
    client_conn[j].merge(o.client_conn[j]);
    client_fallback_conn[j].merge(o.client_fallback_conn[j]);
    client_all_closed[j] += o.client_all_closed[j];
  }
  for (std::size_t p = 0; p < piece_open.size(); ++p) piece_open[p] += o.piece_open[p];
  for (std::size_t e = 0; e < joint_open.size(); ++e) joint_open[e] += o.joint_open[e];
  close_open += o.close_open;
  distant_open += o.distant_open;
  fallback += o.fallback;
  cluster_violations += o.cluster_violations;
  lemma2_violations += o.lemma2_violations;
}

void cs_trial(const CsPipeline& pipe, Rng& rng, CsTrialStats& acc, CsTrialRecord* record) {
  const auto open = round_solution(pipe.complete, pipe.clustering, rng);
  const Connection con =
      connect_clients(*pipe.inst, pipe.complete, pipe.stats, pipe.clustering, open, pipe.dist);
  double conn = 0.0;
  std::int64_t ev[3] = {0, 0, 0};
  for (std::size_t j = 0; j < con.cost.size(); ++j) {
    conn += con.cost[j];
    acc.client_conn[j].add(con.cost[j]);
    ++ev[static_cast<int>(con.event[j])];
    if (con.event[j] == ConnectEvent::kFallback) acc.client_fallback_conn[j].add(con.cost[j]);
    bool any = false;
    for (std::size_t q : pipe.stats[j].close) any = any || open[q];
    for (std::size_t q : pipe.stats[j].distant) any = any || open[q];
    if (!any) ++acc.client_all_closed[j];
  }
  for (const Cluster& k : pipe.clustering.clusters) {
    int count = 0;
    for (std::size_t p : k.pieces) count += open[p];
    if (count != 1) {
      ++acc.cluster_violations;
      break;
    }
  }
  for (std::size_t p = 0; p < open.size(); ++p) acc.piece_open[p] += open[p];
  for (std::size_t a = 0; a < acc.tracked; ++a) {
    if (!open[a]) continue;
    for (std::size_t b = 0; b < acc.tracked; ++b) acc.joint_open[a * acc.tracked + b] += open[b];
  }
  ++acc.trials;
  acc.opening.add(con.opening);
  acc.opening_charge.add(con.opening_charge);
  acc.connection.add(conn);
  acc.total.add(con.opening + conn);
  acc.close_open += ev[0];
  acc.distant_open += ev[1];
  acc.fallback += ev[2];
  acc.lemma2_violations += static_cast<std::int64_t>(con.lemma2_violations);
  if (record) *record = {0, con.opening, conn, ev[0], ev[1], ev[2]};
}

CsTrialStats run_cs(const CsPipeline& pipe, std::size_t trials, std::uint64_t seed, std::size_t track_pairs,
                    unsigned threads) {
  const CsTrialStats empty = CsTrialStats::empty_for(pipe, track_pairs);
  return run_trials(
      trials, seed, empty, [&](CsTrialStats& acc, std::size_t, Rng& rng) { cs_trial(pipe, rng, acc); }, threads);
}

void RandomGammaStats::merge(const RandomGammaStats& o) {
  trials += o.trials;
  ratio.merge(o.ratio);
  total.merge(o.total);
  if (gamma_draws.size() < o.gamma_draws.size()) gamma_draws.resize(o.gamma_draws.size(), 0);
  for (std::size_t k = 0; k < o.gamma_draws.size(); ++k) gamma_draws[k] += o.gamma_draws[k];
}

RandomGammaStats random_gamma_run(const UflInstance& inst, const FractionalUflSolution& sol,
                                  const std::vector<std::pair<double, double>>& dist, double reference,
                                  std::size_t trials, std::uint64_t seed) {
  double wsum = 0.0;
  std::vector<double> weights;
  std::vector<CsPipeline> pipes;
  for (const auto& [g, w] : dist) {
    if (!(g > 1.0 && g < 2.0)) throw InvalidInput("random gamma entries must lie in (1, 2)");
    if (!(w >= 0.0)) throw InvalidInput("random gamma weights must be nonnegative");
    wsum += w;
    weights.push_back(w);
    pipes.push_back(CsPipeline::prepare(inst, sol, g));
  }
  if (std::abs(wsum - 1.0) > kTol.identity) throw InvalidInput("random gamma weights must sum to 1");
  RandomGammaStats empty;
  empty.gamma_draws.assign(dist.size(), 0);
  if (trials == 0) return empty;
  return run_trials(trials, seed, empty, [&](RandomGammaStats& acc, std::size_t, Rng& rng) {
    const std::size_t k = rng.pick(weights);
    CsTrialStats local = CsTrialStats::empty_for(pipes[k], 0);
    CsTrialRecord rec{};
    cs_trial(pipes[k], rng, local, &rec);
    const double total = rec.opening + rec.connection;
    ++acc.trials;
    ++acc.gamma_draws[k];
    acc.total.add(total);
    acc.ratio.add(reference > 0.0 ? total / reference : 0.0);
  });
}

}  // namespace flround
