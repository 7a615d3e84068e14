#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "vdsa/errors.hpp"
#include "vdsa/scenario.hpp"

using namespace vdsa;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vdsa_scenario_test";
  fs::create_directories(dir);
  return dir / name;
}

TrafficScenario quiet_scenario() {
  TrafficScenario s;
  s.vehicle_density = 0.0;
  s.rsus.clear();
  s.oscillation_sigma = 0.0;
  s.baselines = {0.3, 0.05, 0.6, 0.9};
  return s;
}

}  // namespace

TEST_CASE("zero density without RSUs reproduces the baselines") {
  const auto s = quiet_scenario();
  const auto trace = synth_trace(s, 20.0, 5);
  CHECK(trace.steps() == 200);
  for (const auto& row : trace.cbr) CHECK(row == s.baselines);
}

TEST_CASE("small oscillation keeps time means near the baselines") {
  auto s = quiet_scenario();
  s.oscillation_sigma = 0.02;
  const auto trace = synth_trace(s, 140.0, 8);
  for (std::size_t l = 0; l < 4; ++l) {
    double mean = 0.0;
    for (const auto& row : trace.cbr) mean += row[l];
    mean /= static_cast<double>(trace.steps());
    CHECK(std::abs(mean - s.baselines[l]) <= 0.05);
  }
}

TEST_CASE("a single RSU produces one contiguous plateau") {
  auto s = quiet_scenario();
  s.baselines = {0.05, 0.05, 0.05, 0.05};
  s.rsus = {{2.0, 0}};
  const auto trace = synth_trace(s, 140.0, 1);
  const double v = s.platoon_speed_kph / 3.6;
  int transitions = 0;
  bool prev = false;
  std::size_t elevated = 0;
  for (std::size_t k = 0; k < trace.steps(); ++k) {
    const bool up = trace.cbr[k][0] > 0.05 + 1e-12;
    if (up) {
      ++elevated;
      CHECK(trace.cbr[k][0] == doctest::Approx(0.2));
      const double x = v * static_cast<double>(k) * trace.dt;
      CHECK(std::abs(x - 2000.0) <= s.rsu_range_m + 1e-9);
    }
    if (k > 0 && up != prev) ++transitions;
    prev = up;
    for (std::size_t l = 1; l < 4; ++l) CHECK(trace.cbr[k][l] == 0.05);
  }
  CHECK(transitions == 2);
  // 600 m of road at the platoon speed.
  CHECK(std::abs(static_cast<double>(elevated) * trace.dt - 600.0 / v) < 0.2);
  REQUIRE(trace.annotations.size() == 1);
  CHECK(trace.annotations[0].t == doctest::Approx(2000.0 / v));
}

TEST_CASE("events add on their interval") {
  auto s = quiet_scenario();
  s.events = {{1, 10.0, 30.0, 0.3}};
  const auto trace = synth_trace(s, 40.0, 2);
  CHECK(trace.cbr[99][1] == doctest::Approx(0.05));
  CHECK(trace.cbr[100][1] == doctest::Approx(0.35));
  CHECK(trace.cbr[299][1] == doctest::Approx(0.35));
  CHECK(trace.cbr[300][1] == doctest::Approx(0.05));
}

TEST_CASE("traces are deterministic under a seed") {
  TrafficScenario s;
  const auto a = synth_trace(s, 30.0, 12);
  const auto b = synth_trace(s, 30.0, 12);
  const auto c = synth_trace(s, 30.0, 13);
  CHECK(a.cbr == b.cbr);
  CHECK(a.cbr != c.cbr);
  for (const auto& row : a.cbr) {
    for (double x : row) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
}

TEST_CASE("trace round trip") {
  TrafficScenario s;
  s.events = {{2, 5.0, 8.0, 0.2}};
  const auto trace = synth_trace(s, 12.0, 3);
  const auto path = temp_file("roundtrip.csv");
  save_trace(trace, path);
  const auto back = load_trace(path);
  CHECK(back.cbr == trace.cbr);
  CHECK(back.dt == doctest::Approx(trace.dt));
  REQUIRE(back.annotations.size() == trace.annotations.size());
  for (std::size_t i = 0; i < back.annotations.size(); ++i) {
    CHECK(back.annotations[i].label == trace.annotations[i].label);
  }
}

TEST_CASE("out-of-range value names its line") {
  const std::string text = "t,beta_1,beta_2\n0,0.1,0.2\n0.1,1.2,0.3\n";
  try {
    parse_trace(text);
    FAIL("expected a parse error");
  } catch (const TraceParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("beta_1") != std::string::npos);
  }
}

TEST_CASE("empty trace file is an error") {
  CHECK_THROWS_AS(parse_trace(""), TraceParseError);
  const auto path = temp_file("empty.csv");
  std::ofstream(path).close();
  CHECK_THROWS_AS(load_trace(path), TraceParseError);
  CHECK_THROWS_AS(parse_trace("t,beta_1,beta_2\n"), TraceParseError);
}

TEST_CASE("malformed traces") {
  CHECK_THROWS_AS(parse_trace("time,a\n0,0.1\n"), TraceParseError);
  CHECK_THROWS_AS(parse_trace("t,beta_1,beta_2\n0,0.1\n"), TraceParseError);
  CHECK_THROWS_AS(parse_trace("t,beta_1,beta_2\n0,0.1,x\n"), TraceParseError);
  CHECK_THROWS_AS(parse_trace("t,beta_1,beta_2\n0.1,0.1,0.2\n0.1,0.1,0.2\n"), TraceParseError);
  CHECK_THROWS_AS(load_trace(temp_file("does_not_exist.csv")), IoError);
}

TEST_CASE("perfect channel gives perfect reception") {
  TrafficScenario s = quiet_scenario();
  s.baselines = {0.0, 0.0, 0.0, 0.0};
  s.attenuation_floor = 1.0;
  const auto trace = synth_trace(s, 20.0, 4);
  const auto report = run_platoon(trace, EngineConfig{}, s, 9);
  for (std::size_t f = 1; f <= report.followers(); ++f) CHECK(report.mean_success(f) == 1.0);
  CHECK(report.match_fraction() == 1.0);
}

TEST_CASE("attenuation profile") {
  TrafficScenario s;
  CHECK(s.attenuation(1) == 1.0);
  CHECK(s.attenuation(3) == 1.0);
  CHECK(s.attenuation(6) == doctest::Approx(0.95));
  CHECK(s.attenuation(9) == doctest::Approx(0.9));
}

TEST_CASE("oracle selection dominates the estimator in channel quality") {
  TrafficScenario s;
  s.interference_range_m = 2000.0;
  s.baselines = {0.02, 0.02, 0.02, 0.02};
  for (std::uint64_t run = 0; run < 5; ++run) {
    const auto trace = synth_trace(s, 60.0, run);
    const auto oracle = run_platoon_oracle(trace, s, run);
    for (double gamma : {0.0, -2.0}) {
      EngineConfig cfg;
      cfg.gamma = gamma;
      const auto est = run_platoon(trace, cfg, s, run);
      CHECK(oracle.mean_channel_quality() >= est.mean_channel_quality());
    }
    CHECK(oracle.match_fraction() == 1.0);
  }
}

TEST_CASE("reception reports are deterministic") {
  TrafficScenario s;
  const auto trace = synth_trace(s, 30.0, 6);
  const auto a = run_platoon(trace, EngineConfig{}, s, 2);
  const auto b = run_platoon(trace, EngineConfig{}, s, 2);
  CHECK(a.selected == b.selected);
  CHECK(a.success == b.success);
}

TEST_CASE("rolling mean") {
  const std::vector<std::uint8_t> v{1, 0, 1, 1};
  const auto r = rolling_mean(v, 2);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.5);
  CHECK(r[2] == 0.5);
  CHECK(r[3] == 1.0);
}

TEST_CASE("scenario from a flat config") {
  auto cfg = FlatConfig::parse(
      "channels = 3\nchannel_probabilities = 0.2,0.3,0.5\nbaselines = 0.1,0.2,0.3\n"
      "rsu_positions_km = 1.5\nrsu_channels = 3\nevents = 2,1,2,0.4; 1,3,4,0.1\n");
  const auto s = TrafficScenario::from_config(cfg);
  CHECK(s.n_channels == 3);
  REQUIRE(s.rsus.size() == 1);
  CHECK(s.rsus[0].channel == 2);
  REQUIRE(s.events.size() == 2);
  CHECK(s.events[0].channel == 1);
  CHECK_NOTHROW(cfg.reject_unknown());

  auto bad = FlatConfig::parse("channels = 3\n");
  CHECK_THROWS_AS(TrafficScenario::from_config(bad), ConfigError);
}

TEST_CASE("flat config parsing") {
  auto c = FlatConfig::parse("# comment\na = 1\nb = x , y\n\nlist = 1, 2,3\n");
  CHECK(c.get_int("a", 0) == 1);
  CHECK(c.get_ints("list", {}) == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(c.reject_unknown(), ConfigError);
  CHECK(c.get_string("b", "") == "x , y");
  CHECK_NOTHROW(c.reject_unknown());
  CHECK_THROWS_AS(FlatConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(FlatConfig::parse("no equals sign\n"), ConfigError);
  auto d = FlatConfig::parse("n = abc\n");
  CHECK_THROWS_AS(d.get_int("n", 0), ConfigError);
}
