#include "vdsa/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "vdsa/config.hpp"
#include "vdsa/errors.hpp"

#ifndef VDSA_GIT_DESCRIBE
#define VDSA_GIT_DESCRIBE "unknown"
#endif

namespace vdsa {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string memory_model_name(MemoryModel m) {
  switch (m) {
    case MemoryModel::kNone:
      return "none";
    case MemoryModel::kSwa:
      return "swa";
    case MemoryModel::kEwma:
      return "ewma";
  }
  return "unknown";
}

json to_json(const McOptions& mc) { return {{"runs", mc.runs}, {"seed", mc.seed}}; }

json to_json(const MemoryConfig& m) {
  return {{"window_J", m.window_J}, {"model", memory_model_name(m.model)}, {"swa_K", m.swa_K}, {"ewma_alpha", m.ewma_alpha}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string git_describe() { return VDSA_GIT_DESCRIBE; }

json to_json(const BoundsExperimentConfig& c) {
  return {{"id", c.id},
          {"betas", c.betas},
          {"N", c.n_budget},
          {"iterations", c.iterations},
          {"gammas", c.gammas},
          {"global", c.global},
          {"enumeration_cap", c.enumeration_cap},
          {"frontier_cap", c.iterative.frontier_cap},
          {"mc", to_json(c.mc)}};
}

json to_json(const SweepConfig& c) {
  json configs = json::array();
  for (const auto& [L, N] : c.configurations) configs.push_back({L, N});
  return {{"id", c.id},         {"configurations", configs}, {"beta_sets", c.beta_sets}, {"gammas", c.gammas},
          {"threshold", c.threshold}, {"horizon", c.horizon},     {"mc", to_json(c.mc)}};
}

json to_json(const MemoryExperimentConfig& c) {
  json variants = json::array();
  for (const auto& v : c.variants) {
    variants.push_back({{"name", v.name},
                        {"allocation", v.allocation == AllocationMode::kEqual ? "equal" : "heuristic"},
                        {"gamma", v.gamma},
                        {"memory", to_json(v.memory)}});
  }
  return {{"id", c.id},     {"N", c.n_budget}, {"switching_cost", c.switching_cost},
          {"seeds", c.seeds}, {"seed", c.seed},  {"variants", variants}};
}

json to_json(const TrafficScenario& s) {
  json rsus = json::array();
  for (const auto& r : s.rsus) rsus.push_back({r.position_km, r.channel + 1});
  json events = json::array();
  for (const auto& e : s.events) events.push_back({e.channel + 1, e.start_s, e.end_s, e.level});
  return {{"channels", s.n_channels},
          {"road_length_km", s.road_length_km},
          {"lanes", s.lanes},
          {"vehicle_density", s.vehicle_density},
          {"channel_probabilities", s.channel_probabilities},
          {"vehicle_duty", s.vehicle_duty},
          {"interference_range_m", s.interference_range_m},
          {"vehicle_speed_kph", {s.vehicle_speed_min_kph, s.vehicle_speed_max_kph}},
          {"rsus", rsus},
          {"rsu_duty", s.rsu_duty},
          {"rsu_range_m", s.rsu_range_m},
          {"baselines", s.baselines},
          {"oscillation", {s.oscillation_sigma, s.oscillation_tau_s}},
          {"events", events},
          {"platoon_size", s.platoon_size},
          {"platoon_speed_kph", s.platoon_speed_kph},
          {"platoon_start_km", s.platoon_start_km},
          {"vdsa_period_ms", s.vdsa_period_ms},
          {"duration_s", s.duration_s},
          {"attenuation", {s.attenuation_knee, s.attenuation_end, s.attenuation_floor}}};
}

json to_json(const PlatoonExperimentConfig& c) {
  return {{"id", c.id},     {"scenario", to_json(c.scenario)}, {"gammas", c.gammas},
          {"memory", to_json(c.memory)}, {"switching_cost", c.switching_cost}, {"runs", c.runs},
          {"seed", c.seed}};
}

std::string config_hash(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

fs::path write_manifest(const std::string& experiment_id, const json& base_config, const ReportContext& ctx,
                        const std::vector<fs::path>& files, const json& summary) {
  ensure_dir(ctx.out_dir);
  json config = base_config;
  if (!ctx.inputs.is_null()) config["inputs"] = ctx.inputs;
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  const json manifest{{"experiment_id", experiment_id},
                      {"config_hash", config_hash(config)},
                      {"seeds", ctx.seeds},
                      {"git_describe", git_describe()},
                      {"files", names},
                      {"config", config},
                      {"summary", summary}};
  const fs::path path = ctx.out_dir / (experiment_id + "_manifest.json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
  return path;
}

std::vector<fs::path> emit_report(const BoundsExperimentResult& r, const ReportContext& ctx) {
  ensure_dir(ctx.out_dir);
  const auto& id = r.config.id;
  std::vector<fs::path> files;

  std::vector<std::string> header{"iteration", "global_lb", "global_ub", "iterative_lb", "iterative_ub"};
  for (const auto& c : r.curves) {
    header.push_back("mc_" + c.strategy);
    header.push_back("mc_" + c.strategy + "_sigma");
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{std::to_string(row.iteration),
                                   r.config.global ? format_double(row.global.lower) : "",
                                   r.config.global ? format_double(row.global.upper) : "",
                                   format_double(row.iterative.lower), format_double(row.iterative.upper)};
    for (const auto& c : r.curves) {
      cells.push_back(format_double(c.value(row.iteration)));
      cells.push_back(format_double(c.sigma(row.iteration)));
    }
    rows.push_back(std::move(cells));
  }
  files.push_back(ctx.out_dir / (id + "_curves.csv"));
  write_csv(files.back(), header, rows);

  header = {"iteration"};
  const std::size_t L = r.config.betas.size();
  for (std::size_t l = 1; l <= L; ++l) header.push_back("global_ch" + std::to_string(l));
  for (std::size_t l = 1; l <= L; ++l) header.push_back("iterative_ch" + std::to_string(l));
  header.push_back("global_maximizers");
  rows.clear();
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{std::to_string(row.iteration)};
    for (std::size_t l = 0; l < L; ++l) cells.push_back(row.global_counts.empty() ? "" : std::to_string(row.global_counts[l]));
    for (std::size_t l = 0; l < L; ++l) cells.push_back(std::to_string(row.iterative_counts[l]));
    cells.push_back(std::to_string(row.global_maximizers));
    rows.push_back(std::move(cells));
  }
  files.push_back(ctx.out_dir / (id + "_samples.csv"));
  write_csv(files.back(), header, rows);

  json crossings = json::object();
  for (const auto& c : r.curves) {
    const auto v = c.values();
    const auto hit = first_crossing(v, 0.9);
    crossings[c.strategy] = hit ? json(*hit) : json(nullptr);
  }
  if (r.config.global) {
    const auto g = r.global_upper();
    const auto hit = first_crossing(g, 0.9);
    crossings["global_upper"] = hit ? json(*hit) : json(nullptr);
  }
  const json summary{{"first_iteration_at_0.9", crossings},
                     {"max_frontier", r.max_frontier},
                     {"frontier_truncated", r.frontier_truncated}};
  files.push_back(write_manifest(id, to_json(r.config), ctx, files, summary));
  return files;
}

std::vector<fs::path> emit_report(const SweepResult& r, const ReportContext& ctx) {
  ensure_dir(ctx.out_dir);
  const auto& id = r.config.id;
  std::vector<fs::path> files;

  std::vector<std::string> header{"L", "N", "set", "betas", "equal_iterations", "equal_flagged"};
  for (double g : r.config.gammas) {
    const std::string tag = "gamma" + format_double(g);
    header.push_back(tag + "_iterations");
    header.push_back(tag + "_flagged");
    header.push_back(tag + "_ratio");
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : r.entries) {
    std::vector<std::string> cells{std::to_string(e.n_channels), std::to_string(e.n_budget),
                                   std::to_string(e.set_index), join_doubles(e.betas),
                                   std::to_string(e.equal_iterations), e.equal_flagged ? "1" : "0"};
    for (std::size_t g = 0; g < r.config.gammas.size(); ++g) {
      cells.push_back(std::to_string(e.iterations[g]));
      cells.push_back(e.flagged[g] ? "1" : "0");
      cells.push_back(format_double(e.ratio[g]));
    }
    rows.push_back(std::move(cells));
  }
  files.push_back(ctx.out_dir / (id + "_entries.csv"));
  write_csv(files.back(), header, rows);

  rows.clear();
  json summary = json::object();
  for (double g : r.config.gammas) {
    for (const auto& [x, p] : r.cdf(g)) rows.push_back({format_double(g), format_double(x), format_double(p)});
    summary["gamma" + format_double(g)] = {{"median_ratio", r.median_ratio(g)},
                                           {"fraction_outperformed", r.fraction_outperformed(g)}};
  }
  files.push_back(ctx.out_dir / (id + "_cdf.csv"));
  write_csv(files.back(), {"gamma", "ratio", "cdf"}, rows);
  files.push_back(write_manifest(id, to_json(r.config), ctx, files, summary));
  return files;
}

std::vector<fs::path> emit_report(const MemoryExperimentResult& r, const ReportContext& ctx) {
  ensure_dir(ctx.out_dir);
  const auto& id = r.config.id;
  std::vector<fs::path> files;
  const bool has_baseline = [&] {
    for (const auto& v : r.variants) {
      if (v.name == "heuristic") return true;
    }
    return false;
  }();

  std::vector<std::vector<std::string>> rows;
  json summary = json::object();
  for (const auto& v : r.variants) {
    std::string gain;
    if (has_baseline) gain = format_double(r.paired_gap(v.name, "heuristic").first);
    rows.push_back({v.name, format_double(v.mean()), format_double(v.std_error()), gain});
    summary[v.name] = v.mean();
  }
  files.push_back(ctx.out_dir / (id + "_rates.csv"));
  write_csv(files.back(), {"variant", "mean_rate", "std_error", "gain_vs_memoryless"}, rows);

  rows.clear();
  std::vector<std::string> header{"step"};
  for (const auto& v : r.variants) header.push_back(v.name);
  const std::size_t steps = r.variants.empty() ? 0 : r.variants.front().per_step_rate.size();
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<std::string> cells{std::to_string(k)};
    for (const auto& v : r.variants) cells.push_back(k < v.per_step_rate.size() ? format_double(v.per_step_rate[k]) : "");
    rows.push_back(std::move(cells));
  }
  files.push_back(ctx.out_dir / (id + "_selection.csv"));
  write_csv(files.back(), header, rows);
  files.push_back(write_manifest(id, to_json(r.config), ctx, files, summary));
  return files;
}

std::vector<fs::path> emit_report(const PlatoonExperimentResult& r, const ReportContext& ctx) {
  ensure_dir(ctx.out_dir);
  const auto& id = r.config.id;
  std::vector<fs::path> files;
  std::vector<std::string> header{"run", "strategy", "match_fraction", "last_follower_success",
                                  "switches_first_60s", "switches"};
  const int followers = r.config.scenario.platoon_size - 1;
  for (int f = 1; f <= followers; ++f) header.push_back("success_v" + std::to_string(f));
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const PlatoonRunSummary& s, const std::string& name) {
    std::vector<std::string> cells{std::to_string(s.run), name, format_double(s.match_fraction),
                                   format_double(s.last_follower_success), std::to_string(s.switches_first_60s),
                                   std::to_string(s.switches)};
    for (double v : s.follower_success) cells.push_back(format_double(v));
    rows.push_back(std::move(cells));
  };
  for (const auto& s : r.summaries) add(s, "gamma" + format_double(s.gamma));
  for (const auto& s : r.oracle) add(s, "oracle");
  files.push_back(ctx.out_dir / (id + "_runs.csv"));
  write_csv(files.back(), header, rows);

  for (std::size_t g = 0; g < r.first_run_reports.size(); ++g) {
    files.push_back(ctx.out_dir / (id + "_run0_gamma" + format_double(r.config.gammas[g]) + ".csv"));
    save_reception_report(r.first_run_reports[g], files.back());
  }

  json summary = json::object();
  for (double gamma : r.config.gammas) {
    double match = 0.0, last = 0.0;
    int sw = 0;
    for (const auto& s : r.summaries) {
      if (s.gamma != gamma) continue;
      match += s.match_fraction;
      last += s.last_follower_success;
      sw += s.switches_first_60s;
    }
    const double n = static_cast<double>(r.config.runs);
    summary["gamma" + format_double(gamma)] = {
        {"mean_match_fraction", match / n}, {"mean_last_follower_success", last / n}, {"switches_first_60s", sw}};
  }
  files.push_back(write_manifest(id, to_json(r.config), ctx, files, summary));
  return files;
}

}  // namespace vdsa
