#include "vdsa/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "vdsa/config.hpp"
#include "vdsa/errors.hpp"

namespace vdsa {
namespace {

// Exact argmin of busy/samples with the 1/2 sentinel for unobserved
// channels; ties resolved by reservoir sampling.
ChannelIndex pick_lowest(const std::vector<std::int64_t>& busy, const std::vector<std::int64_t>& samples,
                         Rng& rng) {
  ChannelIndex best = 0;
  std::int64_t best_num = samples[0] > 0 ? busy[0] : 1;
  std::int64_t best_den = samples[0] > 0 ? samples[0] : 2;
  std::uint64_t ties = 1;
  for (ChannelIndex l = 1; l < busy.size(); ++l) {
    const std::int64_t num = samples[l] > 0 ? busy[l] : 1;
    const std::int64_t den = samples[l] > 0 ? samples[l] : 2;
    const std::int64_t lhs = num * best_den;
    const std::int64_t rhs = best_num * den;
    if (lhs < rhs) {
      best = l;
      best_num = num;
      best_den = den;
      ties = 1;
    } else if (lhs == rhs) {
      ++ties;
      std::uniform_int_distribution<std::uint64_t> pick(0, ties - 1);
      if (pick(rng) == 0) best = l;
    }
  }
  return best;
}

void run_chunk(const ChannelSet& channels, const std::vector<char>& optimal, int n_budget,
               int iterations, const Strategy& strategy, const IterativePath* path,
               std::uint64_t seed, std::uint64_t stream, std::uint64_t first, std::uint64_t last,
               std::vector<std::uint64_t>& successes) {
  const std::size_t L = channels.size();
  const auto betas = channels.betas();
  std::vector<std::int64_t> busy(L), samples(L);
  std::vector<double> estimate(L);
  for (std::uint64_t run = first; run < last; ++run) {
    Rng rng(derive_seed(seed, stream, run));
    std::fill(busy.begin(), busy.end(), 0);
    std::fill(samples.begin(), samples.end(), 0);
    for (int i = 1; i <= iterations; ++i) {
      AllocationPlan plan;
      switch (strategy.kind) {
        case StrategyKind::kIterativeOptimal:
          plan = path->increments[static_cast<std::size_t>(i - 1)];
          break;
        case StrategyKind::kEqual:
          plan = equal_allocation(n_budget, L, rng);
          break;
        case StrategyKind::kHeuristic:
          if (i == 1) {
            plan = equal_allocation(n_budget, L, rng);
          } else {
            for (std::size_t l = 0; l < L; ++l) {
              estimate[l] = samples[l] > 0 ? static_cast<double>(busy[l]) / static_cast<double>(samples[l])
                                           : std::nan("");
            }
            plan = heuristic_allocation(estimate, strategy.gamma, n_budget);
          }
          break;
      }
      for (std::size_t l = 0; l < L; ++l) {
        const int n = plan.counts[l];
        if (n == 0) continue;
        busy[l] += draw_binomial(n, betas[l], rng);
        samples[l] += n;
      }
      if (optimal[pick_lowest(busy, samples, rng)]) ++successes[static_cast<std::size_t>(i - 1)];
    }
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

std::string Strategy::name() const {
  switch (kind) {
    case StrategyKind::kIterativeOptimal:
      return "iterative";
    case StrategyKind::kEqual:
      return "equal";
    case StrategyKind::kHeuristic: {
      std::ostringstream s;
      s << "heuristic(" << gamma << ")";
      return s.str();
    }
  }
  return "unknown";
}

double SuccessCurve::value(int iteration) const {
  return static_cast<double>(successes.at(static_cast<std::size_t>(iteration - 1))) /
         static_cast<double>(runs);
}

double SuccessCurve::sigma(int iteration) const {
  const double p = value(iteration);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
}

std::vector<double> SuccessCurve::values() const {
  std::vector<double> out;
  for (std::size_t i = 1; i <= successes.size(); ++i) out.push_back(value(static_cast<int>(i)));
  return out;
}

SuccessCurve mc_success_curve(const ChannelSet& channels, int n_budget, int iterations,
                              const Strategy& strategy, const McOptions& options,
                              const IterativePath* path) {
  if (iterations < 1) throw std::domain_error("Monte Carlo curve needs at least one iteration");
  if (options.runs < 1) throw std::domain_error("Monte Carlo needs at least one run");
  if (n_budget < 1) throw std::domain_error("sample budget must be >= 1");
  if (strategy.kind == StrategyKind::kIterativeOptimal &&
      (path == nullptr || path->increments.size() < static_cast<std::size_t>(iterations))) {
    throw std::domain_error("iterative strategy needs a committed path covering every iteration");
  }
  if (strategy.kind == StrategyKind::kHeuristic && strategy.gamma > 0.0) {
    throw std::domain_error("heuristic gamma must be <= 0");
  }
  std::vector<char> optimal(channels.size(), 0);
  for (auto l : channels.optimal_set()) optimal[l] = 1;

  // Fixed chunking keeps the partition independent of the worker count.
  constexpr std::uint64_t kChunk = 256;
  const std::uint64_t chunks = (options.runs + kChunk - 1) / kChunk;
  const std::uint64_t stream = fnv1a64(strategy.name());
  std::vector<std::vector<std::uint64_t>> partial(
      std::max(1u, options.workers), std::vector<std::uint64_t>(static_cast<std::size_t>(iterations), 0));
  detail::parallel_for(chunks, options.workers, [&](std::size_t c, unsigned w) {
    const std::uint64_t first = c * kChunk;
    const std::uint64_t last = std::min(options.runs, first + kChunk);
    run_chunk(channels, optimal, n_budget, iterations, strategy, path, options.seed, stream, first, last,
              partial[w]);
  });

  SuccessCurve curve;
  curve.strategy = strategy.name();
  curve.runs = options.runs;
  curve.successes.assign(static_cast<std::size_t>(iterations), 0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < p.size(); ++i) curve.successes[i] += p[i];
  }
  return curve;
}

std::optional<int> first_crossing(std::span<const double> curve, double threshold) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] >= threshold) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::optional<int> sustained_crossing(std::span<const double> curve, double threshold) {
  std::optional<int> start;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] >= threshold) {
      if (!start) start = static_cast<int>(i) + 1;
    } else {
      start.reset();
    }
  }
  return start;
}

const SuccessCurve& BoundsExperimentResult::curve(const std::string& strategy) const {
  for (const auto& c : curves) {
    if (c.strategy == strategy) return c;
  }
  throw std::domain_error("no curve named " + strategy);
}

std::vector<double> BoundsExperimentResult::global_upper() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.global.upper);
  return out;
}

std::vector<double> BoundsExperimentResult::iterative_upper() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.iterative.upper);
  return out;
}

BoundsExperimentResult run_bounds_experiment(const BoundsExperimentConfig& config) {
  if (config.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (config.n_budget < 1) throw ConfigError("N must be >= 1");
  const ChannelSet channels(config.betas);
  BoundsExperimentResult result;
  result.config = config;

  const auto path = iterative_optimal_path(channels, config.n_budget, config.iterations, config.iterative);
  result.max_frontier = path.max_frontier;
  result.frontier_truncated = path.truncated;

  BoundEvaluator evaluator(channels);
  for (int i = 1; i <= config.iterations; ++i) {
    BoundsRow row;
    row.iteration = i;
    row.iterative = path.bounds[static_cast<std::size_t>(i - 1)];
    row.iterative_counts = path.cumulative[static_cast<std::size_t>(i - 1)];
    if (config.global) {
      const auto g = global_optimal(evaluator, config.n_budget, i, config.enumeration_cap);
      row.global = g.bounds;
      row.global_counts = g.maximizers.front();
      row.global_maximizers = g.maximizers.size();
    }
    result.rows.push_back(std::move(row));
  }

  result.curves.push_back(
      mc_success_curve(channels, config.n_budget, config.iterations, Strategy::iterative_optimal(), config.mc, &path));
  result.curves.push_back(mc_success_curve(channels, config.n_budget, config.iterations, Strategy::equal(), config.mc));
  for (double g : config.gammas) {
    result.curves.push_back(
        mc_success_curve(channels, config.n_budget, config.iterations, Strategy::heuristic(g), config.mc));
  }
  return result;
}

SweepConfig SweepConfig::paper_scale() {
  SweepConfig c;
  c.configurations.clear();
  const std::vector<std::pair<std::size_t, std::vector<int>>> table{
      {3, {3, 4, 5, 6, 9}}, {4, {4, 5, 6, 7, 8, 12}}, {5, {5, 6, 7, 8, 9, 10, 15}}, {6, {6, 7, 8, 9, 10, 11, 12, 18}}};
  for (const auto& [L, ns] : table) {
    for (int n : ns) c.configurations.emplace_back(L, n);
  }
  c.beta_sets = 200;
  c.mc.runs = 100'000;
  return c;
}

std::size_t SweepResult::gamma_index(double gamma) const {
  for (std::size_t g = 0; g < config.gammas.size(); ++g) {
    if (config.gammas[g] == gamma) return g;
  }
  throw std::domain_error("gamma not part of the sweep");
}

double SweepResult::fraction_outperformed(double gamma) const {
  if (entries.empty()) return 0.0;
  const std::size_t g = gamma_index(gamma);
  std::size_t worse = 0;
  for (const auto& e : entries) {
    if (e.ratio[g] > 1.0) ++worse;
  }
  return static_cast<double>(worse) / static_cast<double>(entries.size());
}

double SweepResult::median_ratio(double gamma) const {
  if (entries.empty()) return 0.0;
  const std::size_t g = gamma_index(gamma);
  std::vector<double> r;
  for (const auto& e : entries) r.push_back(e.ratio[g]);
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  return n % 2 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
}

std::vector<std::pair<double, double>> SweepResult::cdf(double gamma) const {
  const std::size_t g = gamma_index(gamma);
  std::vector<double> r;
  for (const auto& e : entries) r.push_back(e.ratio[g]);
  std::sort(r.begin(), r.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double share = static_cast<double>(i + 1) / static_cast<double>(r.size());
    if (!out.empty() && out.back().first == r[i]) {
      out.back().second = share;
    } else {
      out.emplace_back(r[i], share);
    }
  }
  return out;
}

std::vector<double> grid_betas(std::size_t n_channels, Rng& rng) {
  std::uniform_int_distribution<int> level(0, 10);
  std::vector<double> betas(n_channels);
  for (auto& b : betas) b = level(rng) / 10.0;
  return betas;
}

SweepEntry sweep_entry(const std::vector<double>& betas, int n_budget, const SweepConfig& config,
                       const McOptions& mc) {
  SweepEntry e;
  e.n_channels = betas.size();
  e.n_budget = n_budget;
  e.betas = betas;
  const ChannelSet channels(e.betas);

  auto iterations_for = [&](const SuccessCurve& curve, bool& flagged) {
    const auto values = curve.values();
    const auto hit = sustained_crossing(values, config.threshold);
    flagged = !hit.has_value();
    return hit.value_or(config.horizon);
  };
  const auto equal = mc_success_curve(channels, n_budget, config.horizon, Strategy::equal(), mc);
  bool equal_flagged = false;
  e.equal_iterations = iterations_for(equal, equal_flagged);
  e.equal_flagged = equal_flagged;
  for (double g : config.gammas) {
    bool flagged = false;
    int its = 0;
    if (g == 0.0) {
      its = e.equal_iterations;
      flagged = e.equal_flagged;
    } else {
      its = iterations_for(mc_success_curve(channels, n_budget, config.horizon, Strategy::heuristic(g), mc), flagged);
    }
    e.iterations.push_back(its);
    e.flagged.push_back(flagged ? 1 : 0);
    e.ratio.push_back(static_cast<double>(its) / static_cast<double>(e.equal_iterations));
  }
  return e;
}

SweepResult run_gamma_sweep(const SweepConfig& config) {
  if (config.beta_sets < 1) throw ConfigError("beta_sets must be >= 1");
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
  for (double g : config.gammas) {
    if (g > 0.0) throw ConfigError("sweep gammas must be <= 0");
  }
  for (const auto& [L, N] : config.configurations) {
    if (L < 2 || N < 1) throw ConfigError("sweep configurations need L >= 2 and N >= 1");
  }

  SweepResult result;
  result.config = config;
  const std::size_t sets = static_cast<std::size_t>(config.beta_sets);
  const std::size_t tasks = config.configurations.size() * sets;
  result.entries.resize(tasks);

  detail::parallel_for(tasks, config.mc.workers, [&](std::size_t task, unsigned) {
    const std::size_t c = task / sets;
    const std::size_t s = task % sets;
    const auto [L, N] = config.configurations[c];
    Rng beta_rng(derive_seed(config.mc.seed, 1000 + c, s));
    auto betas = grid_betas(L, beta_rng);
    SweepEntry e = sweep_entry(betas, N, config, {config.mc.runs, derive_seed(config.mc.seed, c, s), 1});
    e.set_index = static_cast<int>(s);
    result.entries[task] = std::move(e);
  });
  return result;
}

std::vector<MemoryVariant> MemoryExperimentConfig::standard_variants(int window_J) {
  std::vector<MemoryVariant> v;
  v.push_back({"equal", AllocationMode::kEqual, 0.0, MemoryConfig::none(window_J)});
  v.push_back({"heuristic", AllocationMode::kHeuristic, -2.0, MemoryConfig::none(window_J)});
  for (int K : {2, 3, 4, 5}) {
    v.push_back({"swa" + std::to_string(K), AllocationMode::kHeuristic, -2.0, MemoryConfig::swa(window_J, K)});
  }
  for (double a : {0.9, 0.8, 0.7, 0.6}) {
    std::ostringstream name;
    name << "ewma" << a;
    v.push_back({name.str(), AllocationMode::kHeuristic, -2.0, MemoryConfig::ewma(window_J, a)});
  }
  return v;
}

double MemoryVariantResult::mean() const { return mean_of(per_seed_rate); }
double MemoryVariantResult::std_error() const { return std_error_of(per_seed_rate); }

const MemoryVariantResult& MemoryExperimentResult::variant(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  throw std::domain_error("no memory variant named " + name);
}

std::pair<double, double> MemoryExperimentResult::paired_gap(const std::string& a, const std::string& b) const {
  const auto& va = variant(a).per_seed_rate;
  const auto& vb = variant(b).per_seed_rate;
  std::vector<double> diff(va.size());
  for (std::size_t s = 0; s < va.size(); ++s) diff[s] = va[s] - vb[s];
  return {mean_of(diff), std_error_of(diff)};
}

std::vector<ScenarioTrace> synth_trace_set(const TrafficScenario& scenario, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("trace count must be >= 1");
  std::vector<ScenarioTrace> traces;
  traces.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    traces.push_back(synth_trace(scenario, scenario.duration_s, derive_seed(seed, 50, static_cast<std::uint64_t>(k))));
  }
  return traces;
}

MemoryExperimentResult run_memory_experiment(std::span<const ScenarioTrace> traces,
                                             const MemoryExperimentConfig& config) {
  if (traces.empty()) throw ConfigError("memory experiment needs at least one trace");
  if (config.variants.empty()) throw ConfigError("memory experiment needs at least one variant");
  if (config.seeds < 1) throw ConfigError("seeds must be >= 1");
  for (const auto& t : traces) {
    t.validate();
    if (t.steps() == 0 || t.channels() < 2) throw ConfigError("memory traces need steps and >= 2 channels");
  }

  const std::size_t V = config.variants.size();
  const auto S = static_cast<std::size_t>(config.seeds);
  // hits[seed][variant][step]
  std::vector<std::vector<std::vector<std::uint8_t>>> hits(S, std::vector<std::vector<std::uint8_t>>(V));
  detail::parallel_for(S, config.workers, [&](std::size_t s, unsigned) {
    const auto& trace = traces[s % traces.size()];
    for (std::size_t v = 0; v < V; ++v) {
      const auto& variant = config.variants[v];
      EngineConfig ec;
      ec.n_budget = config.n_budget;
      ec.gamma = variant.gamma;
      ec.allocation = variant.allocation;
      ec.memory = variant.memory;
      ec.switching_cost = config.switching_cost;
      VdsaEngine engine(ec, trace.channels());
      Rng rng(derive_seed(config.seed, 7, s));
      auto& h = hits[s][v];
      h.reserve(trace.steps());
      for (const auto& row : trace.cbr) {
        const ChannelIndex l = engine.step(row, rng);
        const double best = *std::min_element(row.begin(), row.end());
        h.push_back(row[l] <= best ? 1 : 0);
      }
    }
  });

  MemoryExperimentResult result;
  result.config = config;
  for (std::size_t v = 0; v < V; ++v) {
    MemoryVariantResult r;
    r.name = config.variants[v].name;
    std::size_t longest = 0;
    for (std::size_t s = 0; s < S; ++s) longest = std::max(longest, hits[s][v].size());
    std::vector<std::size_t> step_hits(longest, 0), step_count(longest, 0);
    for (std::size_t s = 0; s < S; ++s) {
      const auto& h = hits[s][v];
      std::size_t sum = 0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        sum += h[k];
        step_hits[k] += h[k];
        ++step_count[k];
      }
      r.per_seed_rate.push_back(static_cast<double>(sum) / static_cast<double>(h.size()));
    }
    for (std::size_t k = 0; k < longest; ++k) {
      r.per_step_rate.push_back(static_cast<double>(step_hits[k]) / static_cast<double>(step_count[k]));
    }
    result.variants.push_back(std::move(r));
  }
  return result;
}

const PlatoonRunSummary& PlatoonExperimentResult::summary(int run, double gamma) const {
  for (const auto& s : summaries) {
    if (s.run == run && s.gamma == gamma) return s;
  }
  throw std::domain_error("no platoon summary for that run and gamma");
}

PlatoonExperimentResult run_platoon_experiment(const PlatoonExperimentConfig& config) {
  config.scenario.validate();
  if (config.runs < 1) throw ConfigError("runs must be >= 1");
  if (config.gammas.empty()) throw ConfigError("platoon experiment needs at least one gamma");
  for (double g : config.gammas) {
    if (g > 0.0) throw ConfigError("platoon gammas must be <= 0");
  }
  const std::size_t G = config.gammas.size();
  const auto R = static_cast<std::size_t>(config.runs);
  PlatoonExperimentResult result;
  result.config = config;
  result.summaries.resize(R * G);
  result.oracle.resize(R);
  result.first_run_reports.resize(G);

  auto summarize = [&](const ReceptionReport& rep, int run, double gamma) {
    PlatoonRunSummary s;
    s.run = run;
    s.gamma = gamma;
    s.match_fraction = rep.match_fraction();
    s.last_follower_success = rep.mean_success(rep.followers());
    s.switches_first_60s = rep.switches_between(0.0, 60.0);
    s.switches = rep.switches;
    for (std::size_t f = 1; f <= rep.followers(); ++f) s.follower_success.push_back(rep.mean_success(f));
    return s;
  };

  detail::parallel_for(R, config.workers, [&](std::size_t r, unsigned) {
    const auto trace = synth_trace(config.scenario, config.scenario.duration_s, derive_seed(config.seed, 100, r));
    const std::uint64_t run_seed = derive_seed(config.seed, 200, r);
    for (std::size_t g = 0; g < G; ++g) {
      EngineConfig ec;
      ec.gamma = config.gammas[g];
      ec.allocation = AllocationMode::kHeuristic;
      ec.memory = config.memory;
      ec.switching_cost = config.switching_cost;
      auto rep = run_platoon(trace, ec, config.scenario, run_seed);
      result.summaries[r * G + g] = summarize(rep, static_cast<int>(r), config.gammas[g]);
      if (r == 0) result.first_run_reports[g] = std::move(rep);
    }
    result.oracle[r] = summarize(run_platoon_oracle(trace, config.scenario, run_seed), static_cast<int>(r), 0.0);
  });
  return result;
}

}  // namespace vdsa
