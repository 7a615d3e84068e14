#include "vdsa/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "vdsa/errors.hpp"
#include "vdsa/experiments.hpp"
#include "vdsa/report.hpp"

namespace vdsa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  unsigned workers = 1;
  bool paper_scale = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_config) {
  auto* config = cmd->add_option("--config", o.config, "Flat `key = value` configuration file");
  if (needs_config) config->required();
  cmd->add_option("--seed", o.seed, "Base seed; every random stream is derived from it")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory (default: $VDSA_OUT_DIR, else ./out)");
  cmd->add_option("--workers", o.workers, "Worker threads; results do not depend on this")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--paper-scale", o.paper_scale, "Use the full-size study parameters");
  cmd->add_flag("--verbose", o.verbose, "Progress and summaries on stderr");
}

fs::path output_dir(const CommonOptions& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("VDSA_OUT_DIR"); env && *env) return env;
  return "out";
}

FlatConfig load_config(const CommonOptions& o) {
  if (o.config.empty()) return FlatConfig::parse("", "<empty>");
  std::error_code ec;
  if (!fs::exists(o.config, ec)) throw ConfigError("config file not found: " + o.config);
  return FlatConfig::load(o.config);
}

MemoryConfig read_memory(FlatConfig& c, MemoryConfig m) {
  m.window_J = c.get_int("window_J", m.window_J);
  const std::string model = c.get_string("memory_model", m.model == MemoryModel::kNone  ? "none"
                                                         : m.model == MemoryModel::kSwa ? "swa"
                                                                                        : "ewma");
  if (model == "none") {
    m.model = MemoryModel::kNone;
  } else if (model == "swa") {
    m.model = MemoryModel::kSwa;
  } else if (model == "ewma") {
    m.model = MemoryModel::kEwma;
  } else {
    throw ConfigError("memory_model must be none, swa or ewma, got `" + model + "`");
  }
  m.swa_K = c.get_int("swa_K", m.swa_K);
  m.ewma_alpha = c.get_double("ewma_alpha", m.ewma_alpha);
  m.validate();
  return m;
}

void print_files(std::ostream& out, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << f.string() << '\n';
}

int cmd_bounds(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  FlatConfig c = load_config(o);
  BoundsExperimentConfig cfg;
  cfg.id = c.get_string("id", cfg.id);
  cfg.betas = c.get_doubles("betas", cfg.betas);
  cfg.n_budget = c.get_int("N", cfg.n_budget);
  cfg.iterations = c.get_int("iterations", cfg.iterations);
  cfg.gammas = c.get_doubles("gammas", cfg.gammas);
  cfg.global = c.get_bool("global", cfg.global);
  cfg.enumeration_cap = c.get_u64("enumeration_cap", cfg.enumeration_cap);
  cfg.iterative.frontier_cap = static_cast<std::size_t>(c.get_u64("frontier_cap", cfg.iterative.frontier_cap));
  cfg.mc.runs = c.get_u64("runs", cfg.mc.runs);
  c.reject_unknown();
  if (o.paper_scale) cfg.mc.runs = 100'000;
  cfg.mc.seed = o.seed;
  cfg.mc.workers = o.workers;

  if (o.verbose) err << "bounds: N=" << cfg.n_budget << " iterations=" << cfg.iterations << " runs=" << cfg.mc.runs << '\n';
  const auto result = run_bounds_experiment(cfg);
  const auto files = emit_report(result, {output_dir(o), {o.seed}});
  if (o.verbose) {
    for (const auto& curve : result.curves) {
      const auto hit = first_crossing(curve.values(), 0.9);
      err << "  " << curve.strategy << " reaches 0.9 at " << (hit ? std::to_string(*hit) : "never") << '\n';
    }
  }
  print_files(out, files);
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  FlatConfig c = load_config(o);
  SweepConfig cfg;
  cfg.id = c.get_string("id", cfg.id);
  if (c.has("configurations")) {
    cfg.configurations.clear();
    for (const auto& g : c.get_groups("configurations")) {
      if (g.size() != 2 || g[0] < 2 || g[1] < 1) throw ConfigError("configurations entries are `L,N` with L >= 2, N >= 1");
      cfg.configurations.emplace_back(static_cast<std::size_t>(g[0]), static_cast<int>(g[1]));
    }
  }
  cfg.beta_sets = c.get_int("beta_sets", cfg.beta_sets);
  cfg.gammas = c.get_doubles("gammas", cfg.gammas);
  cfg.threshold = c.get_double("threshold", cfg.threshold);
  cfg.horizon = c.get_int("horizon", cfg.horizon);
  cfg.mc.runs = c.get_u64("runs", cfg.mc.runs);
  c.reject_unknown();
  if (o.paper_scale) {
    const SweepConfig full = SweepConfig::paper_scale();
    cfg.configurations = full.configurations;
    cfg.beta_sets = full.beta_sets;
    cfg.mc.runs = full.mc.runs;
  }
  cfg.mc.seed = o.seed;
  cfg.mc.workers = o.workers;

  if (o.verbose) {
    err << "sweep: " << cfg.configurations.size() << " configurations x " << cfg.beta_sets << " sets, "
        << cfg.mc.runs << " runs\n";
  }
  const auto result = run_gamma_sweep(cfg);
  const auto files = emit_report(result, {output_dir(o), {o.seed}});
  if (o.verbose) {
    for (double g : cfg.gammas) {
      err << "  gamma " << g << ": median ratio " << result.median_ratio(g) << ", outperformed "
          << result.fraction_outperformed(g) << '\n';
    }
  }
  print_files(out, files);
  return kExitOk;
}

int cmd_memory(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  FlatConfig c = load_config(o);
  MemoryExperimentConfig cfg;
  cfg.id = c.get_string("id", cfg.id);
  cfg.n_budget = c.get_int("N", cfg.n_budget);
  cfg.switching_cost = c.get_double("switching_cost", cfg.switching_cost);
  cfg.seeds = c.get_int("seeds", cfg.seeds);
  const int window_J = c.get_int("window_J", 100);
  int trace_count = c.get_int("traces", cfg.seeds);
  const std::string trace_path = c.get_string("trace", "");
  std::vector<ScenarioTrace> traces;
  TrafficScenario scenario;
  if (trace_path.empty()) scenario = TrafficScenario::from_config(c);
  c.reject_unknown();
  if (o.paper_scale) {
    cfg.seeds = 100;
    trace_count = 100;
  }
  cfg.variants = MemoryExperimentConfig::standard_variants(window_J);
  cfg.seed = o.seed;
  cfg.workers = o.workers;

  if (trace_path.empty()) {
    traces = synth_trace_set(scenario, trace_count, o.seed);
  } else {
    traces.push_back(load_trace(trace_path));
  }
  if (o.verbose) err << "memory: " << traces.size() << " traces, " << cfg.seeds << " seeds, J=" << window_J << '\n';
  const auto result = run_memory_experiment(traces, cfg);
  const json inputs = trace_path.empty() ? json{{"scenario", to_json(scenario)}, {"traces", trace_count}}
                                         : json{{"trace", trace_path}};
  const auto files = emit_report(result, {output_dir(o), {o.seed}, inputs});
  if (o.verbose) {
    for (const auto& v : result.variants) err << "  " << v.name << ' ' << v.mean() << " +- " << v.std_error() << '\n';
  }
  print_files(out, files);
  return kExitOk;
}

int cmd_platoon(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  FlatConfig c = load_config(o);
  PlatoonExperimentConfig cfg;
  cfg.id = c.get_string("id", cfg.id);
  cfg.gammas = c.get_doubles("gammas", cfg.gammas);
  cfg.runs = c.get_int("runs", cfg.runs);
  cfg.switching_cost = c.get_double("switching_cost", cfg.switching_cost);
  cfg.memory = read_memory(c, cfg.memory);
  cfg.scenario = TrafficScenario::from_config(c);
  c.reject_unknown();
  cfg.seed = o.seed;
  cfg.workers = o.workers;

  if (o.verbose) err << "platoon: " << cfg.runs << " runs, " << cfg.gammas.size() << " strategies\n";
  const auto result = run_platoon_experiment(cfg);
  const auto files = emit_report(result, {output_dir(o), {o.seed}});
  if (o.verbose) {
    for (const auto& s : result.summaries) {
      err << "  run " << s.run << " gamma " << s.gamma << ": match " << s.match_fraction << ", last follower "
          << s.last_follower_success << ", switches(60s) " << s.switches_first_60s << '\n';
    }
  }
  print_files(out, files);
  return kExitOk;
}

int cmd_trace_synth(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  FlatConfig c = load_config(o);
  const std::string id = c.get_string("id", "trace");
  const TrafficScenario scenario = TrafficScenario::from_config(c);
  c.reject_unknown();
  const ScenarioTrace trace = synth_trace(scenario, scenario.duration_s, o.seed);
  const fs::path dir = output_dir(o);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path path = dir / (id + ".csv");
  save_trace(trace, path);
  if (o.verbose) err << "trace: " << trace.steps() << " steps x " << trace.channels() << " channels\n";
  const auto manifest = write_manifest(id, to_json(scenario), {dir, {o.seed}}, {path},
                                       {{"steps", trace.steps()}, {"channels", trace.channels()}, {"dt", trace.dt}});
  print_files(out, {path, manifest});
  return kExitOk;
}

int cmd_trace_validate(const std::string& path, std::ostream& out) {
  const ScenarioTrace trace = load_trace(path);
  double lo = 1.0, hi = 0.0;
  for (const auto& row : trace.cbr) {
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  out << path << ": " << trace.steps() << " steps, " << trace.channels() << " channels, dt " << format_double(trace.dt)
      << ", CBR range [" << format_double(lo) << ", " << format_double(hi) << "], " << trace.annotations.size()
      << " annotations\n";
  return kExitOk;
}

int cmd_oracle(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  FlatConfig c = load_config(o);
  const std::string id = c.get_string("id", "oracle");
  const std::vector<double> betas = c.get_doubles("betas", {});
  const std::vector<int> cumulative = c.get_ints("cumulative", {});
  const std::uint64_t guard = c.get_u64("guard", kBruteForceGuard);
  c.reject_unknown();
  if (betas.size() != cumulative.size()) throw ConfigError("betas and cumulative must have the same length");
  for (int n : cumulative) {
    if (n < 0) throw ConfigError("cumulative counts must be >= 0");
  }
  const ChannelSet channels(betas);
  const double exact = brute_force_success(channels, cumulative, guard);
  const SuccessBounds b = bounds_for_allocation(channels, cumulative);

  const fs::path dir = output_dir(o);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path path = dir / (id + "_oracle.csv");
  write_csv(path, {"exact", "lower", "upper", "p_strict", "p_equal", "p_greater"},
            {{format_double(exact), format_double(b.lower), format_double(b.upper), format_double(b.p_strict),
              format_double(b.p_equal), format_double(b.p_greater)}});
  const json config{{"betas", betas}, {"cumulative", cumulative}, {"guard", guard}};
  const auto manifest = write_manifest(id, config, {dir, {o.seed}}, {path},
                                       {{"exact", exact}, {"lower", b.lower}, {"upper", b.upper}});
  if (o.verbose) err << "oracle: exact " << exact << " in [" << b.lower << ", " << b.upper << "]\n";
  out << "exact " << format_double(exact) << " lower " << format_double(b.lower) << " upper "
      << format_double(b.upper) << '\n';
  print_files(out, {path, manifest});
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Channel selection under limited sensing: bounds, allocation, memory and platoon experiments",
               "vdsa_cli"};
  app.require_subcommand(1);
  app.footer(
      "Scenario keys: channels, road_length_km, lanes, vehicle_density, channel_probabilities, vehicle_duty,\n"
      "interference_range_m, vehicle_speed_min_kph, vehicle_speed_max_kph, rsu_positions_km, rsu_channels,\n"
      "rsu_duty, rsu_range_m, baselines, oscillation_sigma, oscillation_tau_s, events (`ch,start,end,level; ...`),\n"
      "platoon_size, platoon_speed_kph, platoon_start_km, vdsa_period_ms, duration_s, attenuation_knee,\n"
      "attenuation_end, attenuation_floor. Channel numbers in configs are 1-based.\n"
      "Exit codes: 0 ok, 2 configuration error, 3 capacity guard exceeded, 4 I/O error.\n"
      "VDSA_OUT_DIR sets the output directory when --out is absent.");

  CommonOptions opts;
  std::string trace_file;
  std::function<int()> action;

  auto* bounds = app.add_subcommand("bounds", "Exact bounds, optimal allocations and Monte Carlo success curves");
  add_common(bounds, opts, true);
  bounds->footer(
      "Config keys: id, betas, N, iterations, gammas, global, enumeration_cap, frontier_cap, runs.\n"
      "--paper-scale raises Monte Carlo runs to 100000.");
  bounds->callback([&] { action = [&] { return cmd_bounds(opts, out, err); }; });

  auto* sweep = app.add_subcommand("sweep", "Heuristic gamma sweep against equal allocation");
  add_common(sweep, opts, true);
  sweep->footer(
      "Config keys: id, configurations (`L,N; L,N; ...`), beta_sets, gammas, threshold, horizon, runs.\n"
      "--paper-scale uses 26 (L, N) pairs, 200 CBR sets and 100000 runs.");
  sweep->callback([&] { action = [&] { return cmd_sweep(opts, out, err); }; });

  auto* memory = app.add_subcommand("memory", "Memory model comparison on time-varying traces");
  add_common(memory, opts, true);
  memory->footer(
      "Config keys: id, N, switching_cost, seeds, traces, window_J, trace (CSV path), or scenario keys.\n"
      "--paper-scale uses 100 seeds and 100 traces.");
  memory->callback([&] { action = [&] { return cmd_memory(opts, out, err); }; });

  auto* trace = app.add_subcommand("trace", "Generate or check CBR trace files");
  trace->require_subcommand(1);
  auto* synth = trace->add_subcommand("synth", "Synthesize a trace from a scenario config");
  add_common(synth, opts, true);
  synth->footer("Config keys: id plus scenario keys. --paper-scale has no effect.");
  synth->callback([&] { action = [&] { return cmd_trace_synth(opts, out, err); }; });
  auto* validate = trace->add_subcommand("validate", "Parse a trace file and report its shape");
  validate->add_option("file", trace_file, "Trace CSV to check")->required();
  add_common(validate, opts, false);
  validate->footer("Only the file argument is used; the shared flags are accepted for uniformity.");
  validate->callback([&] { action = [&] { return cmd_trace_validate(trace_file, out); }; });

  auto* platoon = app.add_subcommand("platoon", "Platoon reception experiment over synthesized traces");
  add_common(platoon, opts, true);
  platoon->footer(
      "Config keys: id, gammas, runs, switching_cost, window_J, memory_model, swa_K, ewma_alpha, scenario keys.\n"
      "--paper-scale has no effect.");
  platoon->callback([&] { action = [&] { return cmd_platoon(opts, out, err); }; });

  auto* oracle = app.add_subcommand("oracle", "Brute-force success probability for one allocation");
  add_common(oracle, opts, true);
  oracle->footer("Config keys: id, betas, cumulative, guard. --paper-scale has no effect.");
  oracle->callback([&] { action = [&] { return cmd_oracle(opts, out, err); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    return action();
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace vdsa
