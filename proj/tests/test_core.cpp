#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vdsa/core.hpp"
#include "vdsa/errors.hpp"
#include "vdsa/numeric.hpp"
#include "vdsa/random.hpp"

using namespace vdsa;

TEST_CASE("ratio comparison is exact") {
  CHECK(compare({1, 3}, {2, 6}) == 0);
  CHECK(compare({1, 3}, {1, 2}) < 0);
  CHECK(compare({3, 4}, {2, 3}) > 0);
  CHECK(ratio_equal({0, 5}, {0, 1}));
}

TEST_CASE("channel set derives optimal and wrong sets") {
  const ChannelSet cs({0.3, 0.1, 0.1, 0.6});
  CHECK(cs.optimal_set() == std::vector<ChannelIndex>{1, 2});
  CHECK(cs.wrong_set() == std::vector<ChannelIndex>{0, 3});
  CHECK(cs.is_optimal(2));
  CHECK_FALSE(cs.is_optimal(3));
  CHECK_THROWS_AS(ChannelSet({0.5}), std::domain_error);
  CHECK_THROWS_AS(ChannelSet({0.5, 1.5}), std::domain_error);
}

TEST_CASE("ML estimate from a single iteration") {
  SensingLedger ledger(2, 13);
  ledger.record(std::vector<int>{2, 0}, std::vector<int>{8, 5});
  const auto est = estimate_cbr(ledger, 1);
  CHECK(est.value(0) == 0.25);
  CHECK(est.value(1) == 0.0);
}

TEST_CASE("ML estimate sums counts over iterations") {
  SensingLedger ledger(2, 4);
  ledger.record(std::vector<int>{0, 1}, std::vector<int>{2, 2});
  ledger.record(std::vector<int>{1, 2}, std::vector<int>{2, 2});
  const auto est = estimate_cbr(ledger, 2);
  CHECK(est.busy(0) == 1);
  CHECK(est.busy(1) == 3);
  CHECK(est.samples(0) == 4);
  CHECK(est.value(0) == 0.25);
  CHECK(est.value(1) == 0.75);
}

TEST_CASE("unobserved channel takes the sentinel") {
  SensingLedger ledger(3, 4);
  ledger.record(std::vector<int>{1, 0, 0}, std::vector<int>{4, 0, 0});
  const auto est = estimate_cbr(ledger, 1);
  CHECK_FALSE(est.observed(1));
  CHECK(est.value(1) == kUnobservedValue);
  CHECK(ratio_equal(est.ratio(2), kUnobservedRatio));
}

TEST_CASE("ledger rejects budget violations and bad iterations") {
  SensingLedger ledger(2, 4);
  CHECK_THROWS(ledger.record(std::vector<int>{0, 0}, std::vector<int>{2, 1}));
  CHECK_THROWS(ledger.record(std::vector<int>{3, 0}, std::vector<int>{2, 2}));
  ledger.record(std::vector<int>{1, 0}, std::vector<int>{2, 2});
  CHECK_THROWS(ledger.busy_sum(0, 1));
  CHECK_THROWS(ledger.busy_sum(1, 2));
}

TEST_CASE("selection picks the unique minimum") {
  Rng rng(1);
  const CbrEstimate est({3, 1, 6}, {10, 10, 10});
  CHECK(select_channel(est, rng) == 1);
}

TEST_CASE("selection breaks ties uniformly") {
  Rng rng(42);
  const CbrEstimate est({2, 2, 9}, {10, 10, 10});
  const int trials = 20000;
  int first = 0;
  for (int t = 0; t < trials; ++t) {
    const auto l = select_channel(est, rng);
    REQUIRE(l <= 1);
    first += l == 0 ? 1 : 0;
  }
  // 4 sigma of Binomial(20000, 0.5) is about 283.
  CHECK(std::abs(first - trials / 2) < 283);
}

TEST_CASE("selection on a single channel") {
  Rng rng(3);
  const CbrEstimate est({0}, {4});
  CHECK(select_channel(est, rng) == 0);
  const std::vector<double> one{0.0};
  CHECK(select_lowest(one, rng) == 0);
}

TEST_CASE("selection compares rationals exactly") {
  Rng rng(5);
  // 1/3 vs 2/6 tie exactly; 33/100 is strictly lower.
  const CbrEstimate est({1, 2, 33}, {3, 6, 100});
  CHECK(select_channel(est, rng) == 2);
}

TEST_CASE("sampling with degenerate probabilities") {
  Rng rng(9);
  const std::vector<double> betas{0.0, 1.0};
  const auto k = sample_channels(betas, AllocationPlan{{3, 3}}, rng);
  CHECK(k == std::vector<int>{0, 3});
}

TEST_CASE("sampling obeys the law of large numbers") {
  Rng rng(11);
  const std::vector<double> betas{0.5};
  const auto k = sample_channels(betas, AllocationPlan{{1'000'000}}, rng);
  CHECK(std::abs(k[0] / 1e6 - 0.5) < 0.002);
}

TEST_CASE("sampling is deterministic under a seed") {
  const ChannelSet cs({0.2, 0.35, 0.6, 0.8});
  const AllocationPlan plan{{5, 5, 5, 5}};
  CHECK(sample_channels(cs, plan, 77) == sample_channels(cs, plan, 77));
  CHECK(sample_channels(cs, plan, 77) != sample_channels(cs, plan, 78));
}

TEST_CASE("derived seeds differ across streams and indices") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("binomial draws match their mean") {
  Rng rng(13);
  long total = 0;
  for (int t = 0; t < 10000; ++t) total += draw_binomial(20, 0.3, rng);
  // mean 6, sd of the mean sqrt(4.2/10000) ~ 0.0205.
  CHECK(std::abs(total / 10000.0 - 6.0) < 0.1);
  CHECK(draw_binomial(0, 0.5, rng) == 0);
  CHECK(draw_binomial(7, 1.0, rng) == 7);
}

TEST_CASE("composition count") {
  CHECK(composition_count(2, 4) == 10);
  CHECK(composition_count(0, 3) == 1);
  CHECK(composition_count(5, 1) == 1);
  CHECK(composition_count(1000, 30) == UINT64_MAX);
}

TEST_CASE("binomial pmf sums to one") {
  const auto pmf = binomial_pmf(30, 0.37);
  double s = 0.0;
  for (double p : pmf) s += p;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
  const auto tail = upper_tail(binomial_pmf(3, 0.2));
  CHECK(tail[0] == doctest::Approx(1.0));
  CHECK(tail[3] == doctest::Approx(0.008));
  CHECK(tail[4] == 0.0);
}
