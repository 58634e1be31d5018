#include <doctest.h>

#include <limits>
#include <vector>

#include "flround/core_model.hpp"
#include "flround/errors.hpp"

using namespace flround;

TEST_CASE("from_matrix lays out distances facility-major") {
  const UflInstance inst = UflInstance::from_matrix({1, 2}, {{1, 2, 3}, {4, 5, 6}});
  CHECK(inst.num_facilities() == 2);
  CHECK(inst.num_clients() == 3);
  CHECK(inst.c(1, 2) == 6);
  CHECK(inst.facility_ids == std::vector<std::int64_t>{1, 2});
  CHECK(inst.client_ids == std::vector<std::int64_t>{1, 2, 3});
  CHECK_NOTHROW(inst.validate());
}

TEST_CASE("validate rejects bad shapes and costs") {
  UflInstance empty;
  CHECK_THROWS_AS(empty.validate(), InvalidInput);
  UflInstance neg = UflInstance::from_matrix({1}, {{1}});
  neg.open_cost[0] = -1;
  CHECK_THROWS_AS(neg.validate(), InvalidInput);
  UflInstance nan = UflInstance::from_matrix({1}, {{1}});
  nan.conn[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan.validate(), InvalidInput);
  UflInstance shape = UflInstance::from_matrix({1, 1}, {{1}, {1}});
  shape.conn.pop_back();
  CHECK_THROWS_AS(shape.validate(), InvalidInput);
}

TEST_CASE("metric check reports the tightest witness") {
  // c(0,1) = 10 but 0 -> client 0 -> facility 1 -> client 1 costs 1 + 1 + 1.
  const UflInstance bad = UflInstance::from_matrix({1, 1}, {{1, 10}, {1, 1}});
  const auto v = validate_metric(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].i == 0);
  CHECK(v[0].j == 1);
  CHECK(v[0].via_i == 1);
  CHECK(v[0].via_j == 0);
  CHECK(v[0].lhs == 10);
  CHECK(v[0].rhs == 3);
  CHECK(validate_metric(UflInstance::from_matrix({1, 1}, {{1, 3}, {1, 1}})).empty());
}

TEST_CASE("lineage resolves copies to originals") {
  FacilityLineage l(3);
  const std::size_t a = l.add_copy(2);
  const std::size_t b = l.add_copy(a);
  CHECK(a == 3);
  CHECK(l.resolve(b) == 2);
  CHECK(l.resolve(1) == 1);
  CHECK(l.size() == 5);
  CHECK(l.originals() == 3);
}

namespace {
// Two facilities, two clients, half-open.
FractionalUflSolution half_solution() {
  FractionalUflSolution s = FractionalUflSolution::over_originals(2, 2);
  s.y = {0.5, 0.5};
  s.x = {0.5, 0.5, 0.5, 0.5};
  return s;
}
}  // namespace

TEST_CASE("fractional cost and feasibility") {
  const UflInstance inst = UflInstance::from_matrix({2, 4}, {{1, 3}, {2, 1}});
  FractionalUflSolution s = half_solution();
  const CostSplit c = fractional_cost(inst, s);
  CHECK(c.opening == doctest::Approx(3.0));
  CHECK(c.connection == doctest::Approx(0.5 * (1 + 2) + 0.5 * (3 + 1)));
  CHECK(check_fractional(inst, s).empty());
  s.xv(0, 0) = 0.6;
  CHECK_FALSE(check_fractional(inst, s).empty());
}

TEST_CASE("splitting keeps costs and lays x out as a prefix") {
  const UflInstance inst = UflInstance::from_matrix({2, 4}, {{1, 3}, {2, 1}});
  FractionalUflSolution s = FractionalUflSolution::over_originals(2, 2);
  s.y = {0.8, 0.2};
  s.x = {0.8, 0.2, 0.3, 0.2};
  const FractionalUflSolution t = split_facility(s, 0, 0.5);
  REQUIRE(t.width() == 3);
  CHECK(t.y[0] == doctest::Approx(0.5));
  CHECK(t.y[1] == doctest::Approx(0.3));
  CHECK(t.origin(0) == 0);
  CHECK(t.origin(1) == 0);
  CHECK(t.origin(2) == 1);
  CHECK(t.xv(0, 0) == doctest::Approx(0.5));
  CHECK(t.xv(0, 1) == doctest::Approx(0.3));
  CHECK(t.xv(1, 0) == doctest::Approx(0.3));
  CHECK(t.xv(1, 1) == 0.0);
  const CostSplit before = fractional_cost(inst, s), after = fractional_cost(inst, t);
  CHECK(after.opening == doctest::Approx(before.opening).epsilon(1e-12));
  CHECK(after.connection == doctest::Approx(before.connection).epsilon(1e-12));
  CHECK_THROWS_AS(split_facility(s, 0, 0.8), InvalidInput);
  CHECK_THROWS_AS(split_facility(s, 5, 0.1), InvalidInput);
}

TEST_CASE("piece boundaries merge close cuts and add integers") {
  const std::vector<double> th{0.5, 0.5 + 1e-14, 1.2, 3.0};
  const auto b = piece_boundaries(2.5, th, true, 1e-12);
  CHECK(b == std::vector<double>{0.0, 0.5, 1.0, 1.2, 2.0, 2.5});
  const auto plain = piece_boundaries(2.5, th, false, 1e-12);
  CHECK(plain == std::vector<double>{0.0, 0.5, 1.2, 2.5});
  CHECK(piece_boundaries(1.0, {}, true, 1e-12) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("integral cost counts each facility once") {
  const UflInstance inst = UflInstance::from_matrix({2, 4}, {{1, 3}, {2, 1}});
  const CostSplit c = solution_cost(inst, {{0, 0}, {0, 0}});
  CHECK(c.opening == 2);
  CHECK(c.connection == 4);
  CHECK(c.total == 6);
  CHECK_THROWS_AS(solution_cost(inst, {{0}, {0, 1}}), InvalidInput);
  CHECK_THROWS_AS(solution_cost(inst, {{0}, {0}}), InvalidInput);
}

TEST_CASE("two-stage and robust validation") {
  TwoStageInstance ts;
  ts.base = UflInstance::from_matrix({2, 0.1}, {{1, 1}, {3, 1}});
  ts.scenarios = {{0.5, {0}, {4, 4}}, {0.5, {1}, {4, 4}}};
  CHECK_NOTHROW(ts.validate());
  ts.scenarios[0].probability = 0.7;
  CHECK_THROWS_AS(ts.validate(), InvalidInput);
  ts.scenarios[0].probability = 0.5;
  ts.scenarios[1].clients = {5};
  CHECK_THROWS_AS(ts.validate(), InvalidInput);

  RobustInstance r;
  r.base = UflInstance::from_matrix({1, 1}, {{0}, {0}});
  r.k = 1;
  CHECK_NOTHROW(r.validate());
  r.k = 2;
  CHECK_THROWS_AS(r.validate(), InvalidInput);
  r.k = -1;
  CHECK_THROWS_AS(r.validate(), InvalidInput);
}
