#include "vdsa/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vdsa/errors.hpp"

namespace vdsa {
namespace {

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  if (begin < end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && begin != end;
}

double ring_distance(double a, double b, double ring) {
  double d = std::fmod(std::fabs(a - b), ring);
  return std::min(d, ring - d);
}

ReceptionReport score_run(const ScenarioTrace& trace, const TrafficScenario& scenario,
                          const std::vector<ChannelIndex>& selected, int switches,
                          std::uint64_t seed) {
  ReceptionReport report;
  report.dt = trace.dt;
  report.selected = selected;
  report.switches = switches;
  const std::size_t steps = trace.steps();
  const auto followers = static_cast<std::size_t>(scenario.platoon_size - 1);
  report.reference.resize(steps);
  report.selected_cbr.resize(steps);
  report.reference_cbr.resize(steps);
  report.success.assign(followers, std::vector<std::uint8_t>(steps, 0));

  Rng rng(derive_seed(seed, 2));
  for (std::size_t k = 0; k < steps; ++k) {
    const auto& row = trace.cbr[k];
    report.reference[k] = static_cast<ChannelIndex>(std::min_element(row.begin(), row.end()) - row.begin());
    report.selected_cbr[k] = row[selected[k]];
    report.reference_cbr[k] = row[report.reference[k]];
    for (std::size_t f = 0; f < followers; ++f) {
      const double p = (1.0 - row[selected[k]]) * scenario.attenuation(static_cast<int>(f) + 1);
      // One uniform per (step, follower) regardless of p keeps runs paired.
      report.success[f][k] = uniform01(rng) < p ? 1 : 0;
    }
  }
  const auto window = static_cast<std::size_t>(std::lround(10.0 / trace.dt));
  for (const auto& s : report.success) report.rolling.push_back(rolling_mean(s, std::max<std::size_t>(window, 1)));
  return report;
}

void check_platoon_inputs(const ScenarioTrace& trace, const TrafficScenario& scenario) {
  trace.validate();
  scenario.validate();
  if (trace.steps() == 0) throw std::domain_error("platoon run needs a non-empty trace");
  if (trace.channels() != scenario.n_channels) {
    throw std::domain_error("trace has " + std::to_string(trace.channels()) +
                            " channels, scenario expects " + std::to_string(scenario.n_channels));
  }
  if (std::fabs(trace.dt - scenario.dt()) > 1e-9) {
    throw std::domain_error("trace timestep differs from the VDSA period");
  }
}

}  // namespace

void ScenarioTrace::validate() const {
  if (!(dt > 0.0)) throw std::domain_error("trace timestep must be positive");
  const std::size_t L = channels();
  for (std::size_t k = 0; k < cbr.size(); ++k) {
    if (cbr[k].size() != L) throw std::domain_error("trace row " + std::to_string(k) + " is ragged");
    for (double v : cbr[k]) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error("trace row " + std::to_string(k) + " has CBR outside [0,1]");
      }
    }
  }
}

void save_trace(const ScenarioTrace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace " + path.string());
  for (const auto& a : trace.annotations) out << "# " << format_number(a.t) << ' ' << a.label << '\n';
  out << 't';
  for (std::size_t l = 1; l <= trace.channels(); ++l) out << ",beta_" << l;
  out << '\n';
  for (std::size_t k = 0; k < trace.steps(); ++k) {
    out << format_number(static_cast<double>(k) * trace.dt);
    for (double v : trace.cbr[k]) out << ',' << format_number(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing trace " + path.string());
}

ScenarioTrace parse_trace(const std::string& text) {
  ScenarioTrace trace;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::size_t channels = 0;
  bool header = false;
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream note(line.substr(1));
      TraceAnnotation a;
      std::string t_text;
      note >> t_text;
      std::getline(note >> std::ws, a.label);
      if (!parse_double(t_text, a.t)) throw TraceParseError(number, "annotation without a time");
      trace.annotations.push_back(std::move(a));
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();

    if (!header) {
      if (cells.size() < 2 || cells[0] != "t") throw TraceParseError(number, "expected header t,beta_1,...");
      for (std::size_t l = 1; l < cells.size(); ++l) {
        if (cells[l] != "beta_" + std::to_string(l)) {
          throw TraceParseError(number, "header column " + std::to_string(l + 1) + " should be beta_" +
                                            std::to_string(l));
        }
      }
      channels = cells.size() - 1;
      header = true;
      continue;
    }
    if (cells.size() != channels + 1) {
      throw TraceParseError(number, "expected " + std::to_string(channels + 1) + " fields, found " +
                                        std::to_string(cells.size()));
    }
    double t = 0.0;
    if (!parse_double(cells[0], t)) throw TraceParseError(number, "bad time `" + cells[0] + "`");
    if (!times.empty() && !(t > times.back())) throw TraceParseError(number, "time is not increasing");
    std::vector<double> values(channels);
    for (std::size_t l = 0; l < channels; ++l) {
      if (!parse_double(cells[l + 1], values[l])) {
        throw TraceParseError(number, "bad value `" + cells[l + 1] + "` for beta_" + std::to_string(l + 1));
      }
      if (!(values[l] >= 0.0 && values[l] <= 1.0)) {
        throw TraceParseError(number, "beta_" + std::to_string(l + 1) + " = " + cells[l + 1] +
                                          " is outside [0,1]");
      }
    }
    times.push_back(t);
    trace.cbr.push_back(std::move(values));
  }
  if (!header) throw TraceParseError(number == 0 ? 1 : number, "trace file is empty");
  if (trace.cbr.empty()) throw TraceParseError(number, "trace has a header but no rows");
  if (times.size() >= 2) {
    trace.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  }
  return trace;
}

ScenarioTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read trace " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_trace(buffer.str());
  } catch (const TraceParseError& e) {
    throw TraceParseError(e.line(), path.string() + ": " + std::string(e.what()));
  }
}

void TrafficScenario::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("scenario: " + what); };
  if (n_channels < 2) fail("at least two channels are required");
  if (channel_probabilities.size() != n_channels) fail("channel_probabilities needs one entry per channel");
  double total = 0.0;
  for (double p : channel_probabilities) {
    if (p < 0.0) fail("channel probabilities must be >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) fail("channel probabilities must sum to 1");
  if (baselines.size() != n_channels) fail("baselines needs one entry per channel");
  for (double b : baselines) {
    if (b < 0.0 || b > 1.0) fail("baselines must lie in [0,1]");
  }
  if (!(road_length_km > 0.0)) fail("road_length_km must be positive");
  if (lanes < 1) fail("lanes must be >= 1");
  if (vehicle_density < 0.0) fail("vehicle_density must be >= 0");
  if (vehicle_duty < 0.0 || rsu_duty < 0.0) fail("duty increments must be >= 0");
  if (interference_range_m < 0.0 || rsu_range_m < 0.0) fail("ranges must be >= 0");
  if (vehicle_speed_min_kph < 0.0 || vehicle_speed_max_kph < vehicle_speed_min_kph) {
    fail("vehicle speed range is invalid");
  }
  for (const auto& r : rsus) {
    if (r.channel >= n_channels) fail("RSU channel out of range");
  }
  for (const auto& e : events) {
    if (e.channel >= n_channels) fail("event channel out of range");
    if (e.end_s < e.start_s) fail("event ends before it starts");
  }
  if (oscillation_sigma < 0.0 || !(oscillation_tau_s > 0.0)) fail("oscillation parameters are invalid");
  if (platoon_size < 2) fail("platoon_size must be >= 2");
  if (!(vdsa_period_ms > 0.0)) fail("vdsa_period_ms must be positive");
  if (!(duration_s > 0.0)) fail("duration_s must be positive");
  if (attenuation_knee < 0 || attenuation_end < attenuation_knee) fail("attenuation positions are invalid");
  if (attenuation_floor < 0.0 || attenuation_floor > 1.0) fail("attenuation_floor must lie in [0,1]");
}

double TrafficScenario::attenuation(int follower) const {
  if (follower <= attenuation_knee) return 1.0;
  if (follower >= attenuation_end) return attenuation_floor;
  const double frac = static_cast<double>(follower - attenuation_knee) /
                      static_cast<double>(attenuation_end - attenuation_knee);
  return 1.0 - frac * (1.0 - attenuation_floor);
}

TrafficScenario TrafficScenario::from_config(FlatConfig& c) {
  TrafficScenario s;
  s.n_channels = static_cast<std::size_t>(c.get_int("channels", static_cast<int>(s.n_channels)));
  s.road_length_km = c.get_double("road_length_km", s.road_length_km);
  s.lanes = c.get_int("lanes", s.lanes);
  s.vehicle_density = c.get_double("vehicle_density", s.vehicle_density);
  s.channel_probabilities = c.get_doubles("channel_probabilities", s.channel_probabilities);
  s.vehicle_duty = c.get_double("vehicle_duty", s.vehicle_duty);
  s.interference_range_m = c.get_double("interference_range_m", s.interference_range_m);
  s.vehicle_speed_min_kph = c.get_double("vehicle_speed_min_kph", s.vehicle_speed_min_kph);
  s.vehicle_speed_max_kph = c.get_double("vehicle_speed_max_kph", s.vehicle_speed_max_kph);

  std::vector<double> positions, channels;
  for (const auto& r : s.rsus) {
    positions.push_back(r.position_km);
    channels.push_back(static_cast<double>(r.channel + 1));
  }
  positions = c.get_doubles("rsu_positions_km", positions);
  const auto rsu_channels = c.get_ints("rsu_channels", std::vector<int>(channels.begin(), channels.end()));
  if (positions.size() != rsu_channels.size()) {
    throw ConfigError("rsu_positions_km and rsu_channels differ in length");
  }
  s.rsus.clear();
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (rsu_channels[j] < 1) throw ConfigError("rsu_channels are 1-based");
    s.rsus.push_back({positions[j], static_cast<ChannelIndex>(rsu_channels[j] - 1)});
  }
  s.rsu_duty = c.get_double("rsu_duty", s.rsu_duty);
  s.rsu_range_m = c.get_double("rsu_range_m", s.rsu_range_m);

  s.baselines = c.get_doubles("baselines", s.baselines);
  s.oscillation_sigma = c.get_double("oscillation_sigma", s.oscillation_sigma);
  s.oscillation_tau_s = c.get_double("oscillation_tau_s", s.oscillation_tau_s);
  for (const auto& g : c.get_groups("events")) {
    if (g.size() != 4 || g[0] < 1) throw ConfigError("events entries are `channel,start_s,end_s,level`");
    s.events.push_back({static_cast<ChannelIndex>(g[0]) - 1, g[1], g[2], g[3]});
  }

  s.platoon_size = c.get_int("platoon_size", s.platoon_size);
  s.platoon_speed_kph = c.get_double("platoon_speed_kph", s.platoon_speed_kph);
  s.platoon_start_km = c.get_double("platoon_start_km", s.platoon_start_km);
  s.vdsa_period_ms = c.get_double("vdsa_period_ms", s.vdsa_period_ms);
  s.duration_s = c.get_double("duration_s", s.duration_s);
  s.attenuation_knee = c.get_int("attenuation_knee", s.attenuation_knee);
  s.attenuation_end = c.get_int("attenuation_end", s.attenuation_end);
  s.attenuation_floor = c.get_double("attenuation_floor", s.attenuation_floor);
  s.validate();
  return s;
}

ScenarioTrace synth_trace(const TrafficScenario& scenario, double duration_s, std::uint64_t seed) {
  scenario.validate();
  if (!(duration_s > 0.0)) throw std::domain_error("trace duration must be positive");
  const double dt = scenario.dt();
  const auto steps = static_cast<std::size_t>(std::llround(duration_s / dt));
  const std::size_t L = scenario.n_channels;
  const double ring = scenario.road_length_km * 1000.0;

  struct Vehicle {
    double x0, velocity;  // m, m/s (signed)
    ChannelIndex channel;
  };
  std::vector<Vehicle> vehicles;
  {
    Rng rng(derive_seed(seed, 10));
    std::discrete_distribution<std::size_t> channel_of(scenario.channel_probabilities.begin(),
                                                       scenario.channel_probabilities.end());
    std::poisson_distribution<int> count(scenario.vehicle_density * scenario.road_length_km);
    const int other_lanes = scenario.lanes - 1;
    const int same_direction = other_lanes / 2;
    for (int lane = 0; lane < other_lanes; ++lane) {
      const double sign = lane < same_direction ? 1.0 : -1.0;
      const int n = scenario.vehicle_density > 0.0 ? count(rng) : 0;
      for (int v = 0; v < n; ++v) {
        const double x0 = uniform01(rng) * ring;
        const double kph = scenario.vehicle_speed_min_kph +
                           uniform01(rng) * (scenario.vehicle_speed_max_kph - scenario.vehicle_speed_min_kph);
        vehicles.push_back({x0, sign * kph / 3.6, channel_of(rng)});
      }
    }
  }

  Rng ou_rng(derive_seed(seed, 11));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double decay = std::exp(-dt / scenario.oscillation_tau_s);
  const double kick = scenario.oscillation_sigma * std::sqrt(1.0 - decay * decay);
  std::vector<double> wobble(L, 0.0);
  if (scenario.oscillation_sigma > 0.0) {
    for (auto& w : wobble) w = scenario.oscillation_sigma * gauss(ou_rng);
  }

  ScenarioTrace trace;
  trace.dt = dt;
  trace.cbr.assign(steps, std::vector<double>(L, 0.0));
  const double platoon_velocity = scenario.platoon_speed_kph / 3.6;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double xp = scenario.platoon_start_km * 1000.0 + platoon_velocity * t;
    auto& row = trace.cbr[k];
    for (std::size_t l = 0; l < L; ++l) row[l] = scenario.baselines[l];
    for (const auto& v : vehicles) {
      if (ring_distance(v.x0 + v.velocity * t, xp, ring) <= scenario.interference_range_m) {
        row[v.channel] += scenario.vehicle_duty;
      }
    }
    for (const auto& r : scenario.rsus) {
      if (ring_distance(r.position_km * 1000.0, xp, ring) <= scenario.rsu_range_m) row[r.channel] += scenario.rsu_duty;
    }
    for (const auto& e : scenario.events) {
      if (t >= e.start_s && t < e.end_s) row[e.channel] += e.level;
    }
    for (std::size_t l = 0; l < L; ++l) {
      if (scenario.oscillation_sigma > 0.0) {
        if (k > 0) wobble[l] = wobble[l] * decay + kick * gauss(ou_rng);
        row[l] += wobble[l];
      }
      row[l] = std::clamp(row[l], 0.0, 1.0);
    }
  }
  for (const auto& r : scenario.rsus) {
    const double centre = r.position_km * 1000.0 - scenario.platoon_start_km * 1000.0;
    if (platoon_velocity > 0.0 && centre >= 0.0) {
      trace.annotations.push_back({centre / platoon_velocity, "rsu ch" + std::to_string(r.channel + 1)});
    }
  }
  for (const auto& e : scenario.events) {
    trace.annotations.push_back({e.start_s, "event ch" + std::to_string(e.channel + 1)});
  }
  std::sort(trace.annotations.begin(), trace.annotations.end(),
            [](const TraceAnnotation& a, const TraceAnnotation& b) { return a.t < b.t; });
  return trace;
}

std::vector<double> rolling_mean(const std::vector<std::uint8_t>& values, std::size_t window) {
  if (window == 0) throw std::domain_error("rolling window must be positive");
  std::vector<double> out(values.size());
  long sum = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sum += values[k];
    if (k >= window) sum -= values[k - window];
    out[k] = static_cast<double>(sum) / static_cast<double>(std::min(k + 1, window));
  }
  return out;
}

ReceptionReport run_platoon(const ScenarioTrace& trace, EngineConfig engine_config,
                            const TrafficScenario& scenario, std::uint64_t seed) {
  check_platoon_inputs(trace, scenario);
  engine_config.n_budget = scenario.platoon_size;
  VdsaEngine engine(engine_config, trace.channels());
  Rng rng(derive_seed(seed, 1));
  std::vector<ChannelIndex> selected;
  selected.reserve(trace.steps());
  for (const auto& row : trace.cbr) selected.push_back(engine.step(row, rng));
  return score_run(trace, scenario, selected, engine.switches(), seed);
}

ReceptionReport run_platoon_oracle(const ScenarioTrace& trace, const TrafficScenario& scenario,
                                   std::uint64_t seed) {
  check_platoon_inputs(trace, scenario);
  Rng rng(derive_seed(seed, 1));
  std::vector<ChannelIndex> selected;
  int switches = 0;
  for (const auto& row : trace.cbr) {
    const ChannelIndex l = select_lowest(row, rng);
    if (!selected.empty() && selected.back() != l) ++switches;
    selected.push_back(l);
  }
  return score_run(trace, scenario, selected, switches, seed);
}

double ReceptionReport::match_fraction() const {
  if (selected.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    // a tie for the minimum counts as a match
    if (selected_cbr[k] <= reference_cbr[k]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(selected.size());
}

double ReceptionReport::mean_success(std::size_t follower) const {
  if (follower < 1 || follower > success.size()) throw std::domain_error("follower index out of range");
  const auto& s = success[follower - 1];
  if (s.empty()) return 0.0;
  long sum = 0;
  for (auto v : s) sum += v;
  return static_cast<double>(sum) / static_cast<double>(s.size());
}

double ReceptionReport::mean_channel_quality() const {
  if (selected_cbr.empty()) return 0.0;
  double sum = 0.0;
  for (double b : selected_cbr) sum += 1.0 - b;
  return sum / static_cast<double>(selected_cbr.size());
}

int ReceptionReport::switches_between(double t0, double t1) const {
  int count = 0;
  for (std::size_t k = 1; k < selected.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= t0 && t < t1 && selected[k] != selected[k - 1]) ++count;
  }
  return count;
}

void save_reception_report(const ReceptionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report " + path.string());
  out << "t,selected,reference";
  for (std::size_t f = 1; f <= report.followers(); ++f) out << ",success_ratio_v" << f;
  out << '\n';
  for (std::size_t k = 0; k < report.steps(); ++k) {
    out << format_number(static_cast<double>(k) * report.dt) << ',' << report.selected[k] + 1 << ','
        << report.reference[k] + 1;
    for (const auto& r : report.rolling) out << ',' << format_number(r[k]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing report " + path.string());
}

}  // namespace vdsa
