#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vdsa/bumblebee.hpp"
#include "vdsa/config.hpp"
#include "vdsa/core.hpp"

namespace vdsa {

struct TraceAnnotation {
  double t = 0.0;
  std::string label;
};

/// Time-stepped CBR matrix: cbr[step][channel], step k at time k * dt.
struct ScenarioTrace {
  double dt = 0.1;
  std::vector<std::vector<double>> cbr;
  std::vector<TraceAnnotation> annotations;

  std::size_t steps() const { return cbr.size(); }
  std::size_t channels() const { return cbr.empty() ? 0 : cbr.front().size(); }
  double duration() const { return dt * static_cast<double>(cbr.size()); }
  /// Throws std::domain_error on ragged rows, values outside [0,1] or dt <= 0.
  void validate() const;
};

/// CSV with header `t,beta_1,...,beta_L`; annotations as leading `# t label` lines.
void save_trace(const ScenarioTrace& trace, const std::filesystem::path& path);
/// Throws IoError when unreadable and TraceParseError (with the line) on bad content.
ScenarioTrace load_trace(const std::filesystem::path& path);
ScenarioTrace parse_trace(const std::string& text);

struct RsuSpec {
  double position_km = 0.0;
  ChannelIndex channel = 0;
};

/// Additive CBR step on one channel over [start_s, end_s).
struct CbrEvent {
  ChannelIndex channel = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double level = 0.0;
};

/// Road, traffic, infrastructure and platoon parameters.
///
/// The road is a ring of `road_length_km`; non-platoon vehicles occupy the
/// other `lanes - 1` lanes, split between both directions, and each keeps
/// one channel for the whole run. Per-vehicle and per-RSU channel load is
/// a fixed duty increment while within range of the platoon.
struct TrafficScenario {
  std::size_t n_channels = 4;
  double road_length_km = 5.0;
  int lanes = 6;
  double vehicle_density = 10.0;  // vehicles / km / lane
  std::vector<double> channel_probabilities{0.08, 0.28, 0.16, 0.48};
  double vehicle_duty = 0.003;
  double interference_range_m = 1000.0;
  double vehicle_speed_min_kph = 90.0;
  double vehicle_speed_max_kph = 130.0;

  std::vector<RsuSpec> rsus{{1.0, 0}, {2.0, 1}, {3.0, 2}, {4.0, 0}};
  double rsu_duty = 0.15;
  double rsu_range_m = 300.0;

  std::vector<double> baselines{0.05, 0.05, 0.05, 0.05};
  double oscillation_sigma = 0.01;  // stationary std of the OU wobble
  double oscillation_tau_s = 2.0;
  std::vector<CbrEvent> events;

  int platoon_size = 10;
  double platoon_speed_kph = 130.0;
  double platoon_start_km = 0.0;
  double vdsa_period_ms = 100.0;
  double duration_s = 140.0;

  /// Per-follower reception multiplier: 1 up to `attenuation_knee`, then
  /// linear down to `attenuation_floor` at `attenuation_end`, flat after.
  int attenuation_knee = 3;
  int attenuation_end = 9;
  double attenuation_floor = 0.9;

  void validate() const;
  double attenuation(int follower) const;
  double dt() const { return vdsa_period_ms / 1000.0; }

  /// Reads every field from a flat config; absent keys keep their defaults.
  /// Channel indices in the file are 1-based.
  static TrafficScenario from_config(FlatConfig& config);
};

ScenarioTrace synth_trace(const TrafficScenario& scenario, double duration_s, std::uint64_t seed);

struct ReceptionReport {
  double dt = 0.1;
  std::vector<ChannelIndex> selected;
  std::vector<ChannelIndex> reference;
  std::vector<double> selected_cbr;                // true CBR of the selected channel
  std::vector<double> reference_cbr;               // true minimum CBR
  std::vector<std::vector<std::uint8_t>> success;  // [follower-1][step]
  std::vector<std::vector<double>> rolling;        // [follower-1][step], 10 s window
  int switches = 0;

  std::size_t steps() const { return selected.size(); }
  std::size_t followers() const { return success.size(); }
  double match_fraction() const;
  double mean_success(std::size_t follower) const;  // 1-based follower
  double mean_channel_quality() const;              // mean of 1 - selected CBR
  int switches_between(double t0, double t1) const;
};

/// Runs the engine over the trace with a sensing budget of one sample per
/// platoon vehicle per step, and scores leader-packet reception.
ReceptionReport run_platoon(const ScenarioTrace& trace, EngineConfig engine,
                            const TrafficScenario& scenario, std::uint64_t seed);

/// Same scoring with perfect CBR knowledge: always the current argmin.
ReceptionReport run_platoon_oracle(const ScenarioTrace& trace, const TrafficScenario& scenario,
                                   std::uint64_t seed);

/// Mean of the trailing `window` entries ending at each index.
std::vector<double> rolling_mean(const std::vector<std::uint8_t>& values, std::size_t window);

void save_reception_report(const ReceptionReport& report, const std::filesystem::path& path);

}  // namespace vdsa
