#include <doctest.h>

#include <optional>
#include <vector>

#include "vdsa/core.hpp"
#include "vdsa/memory.hpp"

using namespace vdsa;

TEST_CASE("window covering everything equals the cumulative estimate") {
  SensingLedger ledger(3, 6);
  ledger.record(std::vector<int>{1, 0, 2}, std::vector<int>{2, 2, 2});
  ledger.record(std::vector<int>{0, 1, 1}, std::vector<int>{3, 2, 1});
  ledger.record(std::vector<int>{2, 0, 0}, std::vector<int>{2, 2, 2});
  const auto cumulative = estimate_cbr(ledger, 3).values();
  CHECK(windowed_estimate(ledger, 3, 3, {}) == cumulative);
  CHECK(windowed_estimate(ledger, 3, 50, {}) == cumulative);
}

TEST_CASE("two-term window") {
  SensingLedger ledger(1, 4);
  for (int k : {1, 0, 3}) ledger.record(std::vector<int>{k}, std::vector<int>{4});
  const auto w = windowed_estimate(ledger, 3, 1, {});
  CHECK(w[0] == 0.375);
}

TEST_CASE("unsampled channel carries the previous value forward") {
  SensingLedger ledger(2, 4);
  ledger.record(std::vector<int>{1, 2}, std::vector<int>{2, 2});
  ledger.record(std::vector<int>{1, 0}, std::vector<int>{4, 0});
  ledger.record(std::vector<int>{3, 0}, std::vector<int>{4, 0});
  const std::vector<double> previous{0.4, 0.9};
  const auto w = windowed_estimate(ledger, 3, 1, previous);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.9);
  CHECK(windowed_estimate(ledger, 3, 1, {})[1] == kUnobservedValue);
}

TEST_CASE("zero window uses only the current iteration") {
  SensingLedger ledger(1, 2);
  ledger.record(std::vector<int>{2}, std::vector<int>{2});
  ledger.record(std::vector<int>{0}, std::vector<int>{2});
  CHECK(windowed_estimate(ledger, 2, 0, {})[0] == 0.0);
}

TEST_CASE("sliding window average") {
  CHECK(swa_smooth(std::vector<double>{0.2, 0.4}, 2) == doctest::Approx(0.3));
  CHECK(swa_smooth(std::vector<double>{0.9, 0.2, 0.7}, 1) == 0.7);
  CHECK(swa_smooth(std::vector<double>{0.1, 0.1, 0.1, 0.5}, 4) == doctest::Approx(0.2));
  // Fewer values than K averages what is available.
  CHECK(swa_smooth(std::vector<double>{0.2, 0.6}, 4) == doctest::Approx(0.4));
  CHECK(swa_smooth(std::vector<double>{0.8, 0.1, 0.1, 0.1, 0.5}, 4) == doctest::Approx(0.2));
}

TEST_CASE("exponentially weighted average") {
  CHECK(ewma_smooth(std::nullopt, 0.3, 0.7) == 0.3);
  CHECK(ewma_smooth(0.5, 0.1, 0.7) == doctest::Approx(0.22));
  CHECK(ewma_smooth(0.5, 0.1, 1.0) == 0.1);
  CHECK(ewma_smooth(0.9, 0.0, 1.0) == 0.0);
}

TEST_CASE("memory config validation") {
  CHECK_NOTHROW(MemoryConfig::ewma(10, 0.7).validate());
  CHECK_THROWS(MemoryConfig::ewma(10, 0.0).validate());
  CHECK_THROWS(MemoryConfig::ewma(10, 1.5).validate());
  CHECK_THROWS(MemoryConfig::swa(10, 0).validate());
  CHECK_THROWS(MemoryConfig::none(-1).validate());
}

TEST_CASE("smoother models") {
  const std::vector<double> a{0.5, 0.2};
  const std::vector<double> b{0.1, 0.4};

  Smoother none(MemoryConfig::none(5), 2);
  CHECK_FALSE(none.primed());
  none.update(a);
  CHECK(none.primed());
  CHECK(none.update(b) == b);

  Smoother ewma(MemoryConfig::ewma(5, 0.7), 2);
  CHECK(ewma.update(a) == a);
  const auto& e = ewma.update(b);
  CHECK(e[0] == doctest::Approx(0.22));
  CHECK(e[1] == doctest::Approx(0.7 * 0.4 + 0.3 * 0.2));

  Smoother swa(MemoryConfig::swa(5, 2), 2);
  swa.update(a);
  swa.update(b);
  const auto& s = swa.update(b);
  CHECK(s[0] == doctest::Approx(0.1));
  CHECK(s[1] == doctest::Approx(0.4));
}

TEST_CASE("smoothed values stay in the unit interval") {
  Rng rng(4);
  for (const auto& cfg : {MemoryConfig::swa(3, 3), MemoryConfig::ewma(3, 0.3), MemoryConfig::none(3)}) {
    Smoother sm(cfg, 3);
    for (int t = 0; t < 500; ++t) {
      std::vector<double> v(3);
      for (auto& x : v) x = uniform01(rng);
      for (double y : sm.update(v)) {
        CHECK(y >= 0.0);
        CHECK(y <= 1.0);
      }
    }
  }
}
