#include <doctest.h>

#include <set>
#include <vector>

#include "flround/parallel.hpp"
#include "flround/rng.hpp"
#include "flround/stats.hpp"

using namespace flround;

TEST_CASE("substreams are deterministic and distinct") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 10; ++m)
    for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(m, s));
  CHECK(seen.size() == 1000);
  Rng a(derive_seed(7, 3)), b(derive_seed(7, 3));
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("uniform stays in [0, 1) and pick follows the weights") {
  Rng rng(42);
  std::vector<int> hits(3, 0);
  const std::vector<double> w{0.2, 0.0, 0.8};
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    ++hits[rng.pick(w)];
  }
  CHECK(hits[1] == 0);
  CHECK(hits[0] / 20000.0 == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("running moments merge like a single pass") {
  Rng rng(5);
  RunningMoments all, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform() * 10.0;
    all.add(x);
    (i < 300 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(left.count == all.count);
  CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-12));
  CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-10));
  CHECK(left.min == all.min);
  CHECK(left.max == all.max);

  RunningMoments one;
  one.add(3.0);
  CHECK(one.variance() == 0.0);
  CHECK(one.std_error() == 0.0);
  RunningMoments empty;
  one.merge(empty);
  CHECK(one.count == 1);
  empty.merge(one);
  CHECK(empty.mean == 3.0);
}

namespace {
struct Sum {
  RunningMoments m;
  std::vector<std::size_t> order;
  void merge(const Sum& o) {
    m.merge(o.m);
    order.insert(order.end(), o.order.begin(), o.order.end());
  }
};
}  // namespace

TEST_CASE("trial results do not depend on the thread count") {
  auto body = [](Sum& acc, std::size_t t, Rng& rng) {
    acc.m.add(rng.uniform());
    acc.order.push_back(t);
  };
  const Sum one = run_trials(10000, 9, Sum{}, body, 1);
  const Sum four = run_trials(10000, 9, Sum{}, body, 4);
  CHECK(one.m.mean == four.m.mean);
  CHECK(one.m.m2 == four.m.m2);
  CHECK(one.order == four.order);
  for (std::size_t t = 0; t < one.order.size(); ++t) REQUIRE(one.order[t] == t);
}

TEST_CASE("trial ranges concatenate") {
  auto body = [](Sum& acc, std::size_t t, Rng& rng) {
    acc.m.add(rng.uniform());
    acc.order.push_back(t);
  };
  Sum a = run_trial_range(0, 3000, 4, Sum{}, body, 2);
  const Sum b = run_trial_range(3000, 3000, 4, Sum{}, body, 3);
  const Sum whole = run_trials(6000, 4, Sum{}, body, 1);
  a.merge(b);
  CHECK(a.order == whole.order);
  CHECK(a.m.mean == doctest::Approx(whole.m.mean).epsilon(1e-12));
}

TEST_CASE("an exception in a worker reaches the caller") {
  auto body = [](Sum&, std::size_t t, Rng&) {
    if (t == 5000) throw std::runtime_error("boom");
  };
  CHECK_THROWS_AS(run_trials(10000, 1, Sum{}, body, 4), std::runtime_error);
}
