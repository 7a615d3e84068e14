#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "vdsa/allocation.hpp"
#include "vdsa/errors.hpp"
#include "vdsa/numeric.hpp"

using namespace vdsa;

namespace {

int sum(const std::vector<int>& v) {
  int s = 0;
  for (int x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("equal allocation with exact division") {
  CHECK(equal_allocation(8, 4, 1).counts == std::vector<int>{2, 2, 2, 2});
}

TEST_CASE("equal allocation spreads the remainder on distinct channels") {
  std::vector<int> extra_hits(4, 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto plan = equal_allocation(6, 4, seed);
    REQUIRE(plan.total() == 6);
    const auto [lo, hi] = std::minmax_element(plan.counts.begin(), plan.counts.end());
    REQUIRE(*hi - *lo <= 1);
    REQUIRE(*lo == 1);
    for (int l = 0; l < 4; ++l) extra_hits[l] += plan.counts[l] - 1;
  }
  // Each channel receives an extra with probability 1/2.
  for (int h : extra_hits) CHECK(std::abs(h - 5000) < 250);
}

TEST_CASE("equal allocation with fewer samples than channels") {
  const auto plan = equal_allocation(3, 4, 5);
  CHECK(plan.total() == 3);
  CHECK(std::count(plan.counts.begin(), plan.counts.end(), 1) == 3);
  CHECK(std::count(plan.counts.begin(), plan.counts.end(), 0) == 1);
}

TEST_CASE("enumeration over a base tuple") {
  const std::vector<int> base{1, 1, 1, 1};
  const auto all = enumerate_allocations(2, 4, base);
  CHECK(all.size() == 10);
  std::set<std::vector<int>> unique(all.begin(), all.end());
  CHECK(unique.size() == 10);
  for (const auto& t : all) {
    CHECK(sum(t) == 6);
    for (int x : t) CHECK(x >= 1);
  }
  CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("enumeration of zero extra samples is the base") {
  const std::vector<int> base{2, 0, 3};
  const auto all = enumerate_allocations(0, 3, base);
  REQUIRE(all.size() == 1);
  CHECK(all[0] == base);
}

TEST_CASE("enumeration of one sample over two channels") {
  const std::vector<int> base{0, 0};
  const auto all = enumerate_allocations(1, 2, base);
  const std::set<std::vector<int>> got(all.begin(), all.end());
  CHECK(got == std::set<std::vector<int>>{{1, 0}, {0, 1}});
}

TEST_CASE("enumeration size matches the composition count") {
  const std::vector<int> base(5, 0);
  for (int total = 0; total <= 7; ++total) {
    CHECK(enumerate_allocations(total, 5, base).size() == composition_count(static_cast<std::uint64_t>(total), 5));
  }
}

TEST_CASE("global search at the first iteration has one tuple") {
  const ChannelSet cs({0.2, 0.35, 0.6, 0.8});
  const auto g = global_optimal(cs, 8, 1);
  REQUIRE(g.maximizers.size() == 1);
  CHECK(g.maximizers[0] == std::vector<int>{2, 2, 2, 2});
  CHECK(g.evaluated == 1);
  const std::vector<int> n{2, 2, 2, 2};
  CHECK(g.bounds.upper == doctest::Approx(bounds_for_allocation(cs, n).upper));
}

TEST_CASE("global search agrees with a direct scan") {
  const ChannelSet cs({0.2, 0.35, 0.6});
  const auto g = global_optimal(cs, 5, 3);
  // floor(5/3) = 1 is fixed once per channel; the other 12 samples are free.
  const std::vector<int> base{1, 1, 1};
  double best = -1.0;
  for (const auto& t : enumerate_allocations(12, 3, base)) best = std::max(best, bounds_for_allocation(cs, t).upper);
  CHECK(g.bounds.upper == doctest::Approx(best).epsilon(1e-12));
  CHECK(g.evaluated == composition_count(12, 3));
  for (const auto& m : g.maximizers) CHECK(bounds_for_allocation(cs, m).upper == doctest::Approx(best).epsilon(1e-11));
}

TEST_CASE("global search cap") {
  const ChannelSet cs({0.2, 0.35, 0.6, 0.8});
  CHECK_THROWS_AS(global_optimal(cs, 6, 4, 1000), CapacityError);
  try {
    global_optimal(cs, 6, 4, 1000);
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("iteration 4") != std::string::npos);
  }
}

TEST_CASE("global optimum concentrates on the two lowest channels") {
  const ChannelSet cs({0.2, 0.35, 0.6, 0.8});
  const auto g = global_optimal(cs, 8, 20);
  const auto& t = g.maximizers.front();
  CHECK(sum(t) == 160);
  // Roughly 3.4, 3.4, 0.8 and 0.35 samples per iteration; floor(N/L) = 2 is fixed.
  CHECK(t[0] / 20.0 > 2.5);
  CHECK(t[1] / 20.0 > 2.5);
  CHECK(t[0] + t[1] > t[2] + t[3]);
  CHECK(t[2] >= t[3]);
}

TEST_CASE("global search on a separated pair is immediately certain") {
  const ChannelSet cs({0.0, 1.0, 1.0});
  const auto g = global_optimal(cs, 3, 1);
  CHECK(g.bounds.lower == 1.0);
  const auto step = iterative_optimal(cs, 3, SearchFrontier::initial(3));
  CHECK(step.next.bounds.upper == 1.0);
}

TEST_CASE("iterative search first step fixes floor(N/L)") {
  const ChannelSet cs({0.2, 0.35, 0.6, 0.8});
  const auto step = iterative_optimal(cs, 8, SearchFrontier::initial(4));
  CHECK(step.chosen.counts == std::vector<int>{2, 2, 2, 2});
  CHECK(step.next.iteration == 1);
}

TEST_CASE("iterative frontier is monotone and spends the budget") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t L = 2 + rng() % 3;
    std::vector<double> betas(L);
    for (auto& b : betas) b = static_cast<double>(rng() % 11) / 10.0;
    const ChannelSet cs(betas);
    const int N = 2 + static_cast<int>(rng() % 4);
    auto frontier = SearchFrontier::initial(L);
    for (int i = 1; i <= 6; ++i) {
      const auto prev = frontier;
      const auto step = iterative_optimal(cs, N, prev);
      frontier = step.next;
      REQUIRE(!frontier.entries.empty());
      CHECK(step.chosen.total() == N);
      for (const auto& e : frontier.entries) {
        CHECK(sum(e.cumulative) == i * N);
        CHECK(sum(e.increment) == N);
        const auto& parent = prev.entries.at(e.parent).cumulative;
        for (std::size_t l = 0; l < L; ++l) CHECK(e.cumulative[l] == parent[l] + e.increment[l]);
      }
    }
  }
}

TEST_CASE("iterative path is realizable and never beats the global bound") {
  const ChannelSet cs({0.2, 0.35, 0.6, 0.8});
  const auto path = iterative_optimal_path(cs, 6, 10);
  REQUIRE(path.cumulative.size() == 10);
  for (int i = 1; i <= 10; ++i) {
    CHECK(path.increments[i - 1].total() == 6);
    if (i > 1) {
      for (std::size_t l = 0; l < 4; ++l) CHECK(path.cumulative[i - 1][l] >= path.cumulative[i - 2][l]);
    }
    const auto g = global_optimal(cs, 6, i);
    CHECK(path.bounds[i - 1].upper <= g.bounds.upper + 1e-12);
  }
}

TEST_CASE("largest remainder rounding") {
  const std::vector<double> w{1.0, 1.0, 1.0};
  CHECK(largest_remainder(w, 4).counts == std::vector<int>{2, 1, 1});
  const std::vector<double> w2{0.5, 0.25, 0.25};
  CHECK(largest_remainder(w2, 4).counts == std::vector<int>{2, 1, 1});
  const std::vector<double> w3{0.0, 1.0};
  CHECK(largest_remainder(w3, 5).counts == std::vector<int>{0, 5});
}

TEST_CASE("heuristic with gamma 0 is an equal split") {
  const std::vector<double> est{0.2, 0.35, 0.6, 0.8};
  CHECK(heuristic_allocation(est, 0.0, 8).counts == std::vector<int>{2, 2, 2, 2});
  const auto plan = heuristic_allocation(est, 0.0, 6);
  CHECK(plan.total() == 6);
  const auto [lo, hi] = std::minmax_element(plan.counts.begin(), plan.counts.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("heuristic rounding example") {
  const std::vector<double> est{0.2, 0.35, 0.6, 0.8};
  const auto plan = heuristic_allocation(est, -2.0, 8);
  CHECK(plan.counts == std::vector<int>{3, 3, 1, 1});

  // Oracle: the raw shares by hand.
  const double w[] = {std::exp(-0.7), std::exp(-0.7), std::exp(-1.2), std::exp(-1.6)};
  const double total = w[0] + w[1] + w[2] + w[3];
  CHECK(8 * w[0] / total == doctest::Approx(2.655).epsilon(1e-3));
  CHECK(8 * w[2] / total == doctest::Approx(1.610).epsilon(1e-3));
  CHECK(8 * w[3] / total == doctest::Approx(1.079).epsilon(1e-3));
}

TEST_CASE("heuristic with a very negative gamma uses only the two best channels") {
  const std::vector<double> est{0.6, 0.2, 0.8, 0.35};
  const auto plan = heuristic_allocation(est, -50.0, 8);
  CHECK(plan.counts[0] == 0);
  CHECK(plan.counts[2] == 0);
  CHECK(plan.counts[1] + plan.counts[3] == 8);
}

TEST_CASE("heuristic treats NaN as unobserved") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> with_nan{0.2, nan, 0.8};
  const std::vector<double> with_half{0.2, 0.5, 0.8};
  CHECK(heuristic_allocation(with_nan, -2.0, 9) == heuristic_allocation(with_half, -2.0, 9));
  CHECK_THROWS(heuristic_allocation(std::vector<double>{nan, nan}, -2.0, 4));
  CHECK_THROWS(heuristic_allocation(with_half, 1.0, 4));
}

TEST_CASE("heuristic plans always spend the budget") {
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t L = 2 + rng() % 8;
    std::vector<double> est(L);
    for (auto& e : est) e = uniform01(rng);
    const int N = static_cast<int>(rng() % 40);
    const double gamma = -20.0 * uniform01(rng);
    CHECK(heuristic_allocation(est, gamma, N).total() == N);
  }
}
