#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vdsa/allocation.hpp"
#include "vdsa/bumblebee.hpp"
#include "vdsa/scenario.hpp"

namespace vdsa {

enum class StrategyKind { kIterativeOptimal, kEqual, kHeuristic };

struct Strategy {
  StrategyKind kind = StrategyKind::kEqual;
  double gamma = 0.0;  // heuristic only

  static Strategy iterative_optimal() { return {StrategyKind::kIterativeOptimal, 0.0}; }
  static Strategy equal() { return {StrategyKind::kEqual, 0.0}; }
  static Strategy heuristic(double gamma) { return {StrategyKind::kHeuristic, gamma}; }
  std::string name() const;
};

struct McOptions {
  std::uint64_t runs = 10'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Per-iteration count of runs whose selected channel is optimal.
struct SuccessCurve {
  std::string strategy;
  std::uint64_t runs = 0;
  std::vector<std::uint64_t> successes;  // [iteration-1]

  std::size_t iterations() const { return successes.size(); }
  double value(int iteration) const;
  /// Binomial standard error at `iteration`.
  double sigma(int iteration) const;
  std::vector<double> values() const;
};

/// Monte Carlo success frequency for a fixed CBR vector. Heuristic runs use
/// equal allocation on the first iteration and the cumulative estimate
/// afterwards. The iterative strategy needs the committed `path`. Results are
/// independent of `options.workers`.
SuccessCurve mc_success_curve(const ChannelSet& channels, int n_budget, int iterations,
                              const Strategy& strategy, const McOptions& options,
                              const IterativePath* path = nullptr);

/// First iteration (1-based) whose value reaches `threshold`.
std::optional<int> first_crossing(std::span<const double> curve, double threshold);
/// First iteration from which the curve stays at or above `threshold` to its end.
std::optional<int> sustained_crossing(std::span<const double> curve, double threshold);

struct BoundsExperimentConfig {
  std::string id = "bounds";
  std::vector<double> betas{0.2, 0.35, 0.6, 0.8};
  int n_budget = 8;
  int iterations = 20;
  std::vector<double> gammas{-4.0};
  bool global = true;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  IterativeOptions iterative;
  McOptions mc;
};

struct BoundsRow {
  int iteration = 0;
  SuccessBounds global;
  SuccessBounds iterative;
  std::vector<int> global_counts;     // front() maximizer
  std::size_t global_maximizers = 0;
  std::vector<int> iterative_counts;  // committed path
};

struct BoundsExperimentResult {
  BoundsExperimentConfig config;
  std::vector<BoundsRow> rows;
  std::vector<SuccessCurve> curves;  // iterative-optimal, equal, heuristic per gamma
  std::size_t max_frontier = 0;
  bool frontier_truncated = false;

  const SuccessCurve& curve(const std::string& strategy) const;
  std::vector<double> global_upper() const;
  std::vector<double> iterative_upper() const;
};

/// Throws CapacityError naming the iteration when the global search is too large.
BoundsExperimentResult run_bounds_experiment(const BoundsExperimentConfig& config);

struct SweepConfig {
  std::string id = "sweep";
  std::vector<std::pair<std::size_t, int>> configurations{{3, 3}, {3, 6}, {4, 4}, {4, 8}, {5, 5}, {6, 6}};
  int beta_sets = 20;
  std::vector<double> gammas{-1.0, -2.0, -4.0, -8.0, -16.0};
  double threshold = 0.95;
  int horizon = 200;
  McOptions mc;

  /// The 26 (L, N) pairs, 200 CBR sets and 1e5 runs of the full study.
  static SweepConfig paper_scale();
};

struct SweepEntry {
  std::size_t n_channels = 0;
  int n_budget = 0;
  int set_index = 0;
  std::vector<double> betas;
  int equal_iterations = 0;
  bool equal_flagged = false;       // never sustained the threshold
  std::vector<int> iterations;      // per gamma
  std::vector<std::uint8_t> flagged;
  std::vector<double> ratio;        // iterations / equal_iterations
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepEntry> entries;

  std::size_t gamma_index(double gamma) const;
  double fraction_outperformed(double gamma) const;  // share with ratio > 1
  double median_ratio(double gamma) const;
  /// Empirical CDF: sorted distinct ratios and the share at or below each.
  std::vector<std::pair<double, double>> cdf(double gamma) const;
};

/// Random CBR vector on the 0.1 grid, as drawn by the sweep.
std::vector<double> grid_betas(std::size_t n_channels, Rng& rng);

/// Threshold iterations of equal allocation and every configured gamma for
/// one CBR vector, using `mc` for all curves. set_index is left at 0.
SweepEntry sweep_entry(const std::vector<double>& betas, int n_budget, const SweepConfig& config,
                       const McOptions& mc);

SweepResult run_gamma_sweep(const SweepConfig& config);

struct MemoryVariant {
  std::string name;
  AllocationMode allocation = AllocationMode::kHeuristic;
  double gamma = -2.0;
  MemoryConfig memory;
};

struct MemoryExperimentConfig {
  std::string id = "memory";
  int n_budget = 8;
  double switching_cost = 0.1;
  std::vector<MemoryVariant> variants;
  int seeds = 20;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  /// Equal and heuristic memoryless, SWA K in {2,3,4,5}, EWMA alpha in {0.9,0.8,0.7,0.6}.
  static std::vector<MemoryVariant> standard_variants(int window_J);
};

struct MemoryVariantResult {
  std::string name;
  std::vector<double> per_seed_rate;  // share of steps on a best channel
  std::vector<double> per_step_rate;  // share of seeds on a best channel

  double mean() const;
  double std_error() const;
};

struct MemoryExperimentResult {
  MemoryExperimentConfig config;
  std::vector<MemoryVariantResult> variants;

  const MemoryVariantResult& variant(const std::string& name) const;
  /// Mean paired difference a - b across seeds and its standard error.
  std::pair<double, double> paired_gap(const std::string& a, const std::string& b) const;
};

/// `count` traces of `scenario.duration_s`, trace k seeded by derive_seed(seed, 50, k).
std::vector<ScenarioTrace> synth_trace_set(const TrafficScenario& scenario, int count, std::uint64_t seed);

/// Seed s runs every variant on traces[s % traces.size()] with the same
/// engine seed, so variants are compared on common random numbers.
MemoryExperimentResult run_memory_experiment(std::span<const ScenarioTrace> traces,
                                             const MemoryExperimentConfig& config);

struct PlatoonRunSummary {
  int run = 0;
  double gamma = 0.0;
  double match_fraction = 0.0;
  double last_follower_success = 0.0;
  int switches_first_60s = 0;
  int switches = 0;
  std::vector<double> follower_success;
};

struct PlatoonExperimentConfig {
  std::string id = "platoon";
  TrafficScenario scenario;
  std::vector<double> gammas{0.0, -2.0};
  MemoryConfig memory = MemoryConfig::ewma(100, 0.7);
  double switching_cost = 0.1;
  int runs = 10;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct PlatoonExperimentResult {
  PlatoonExperimentConfig config;
  std::vector<PlatoonRunSummary> summaries;  // run-major, gamma-minor
  std::vector<PlatoonRunSummary> oracle;     // one per run
  std::vector<ReceptionReport> first_run_reports;  // one per gamma, run 0

  const PlatoonRunSummary& summary(int run, double gamma) const;
};

/// Run r synthesizes one trace and replays it under every gamma with a
/// shared engine and reception seed.
PlatoonExperimentResult run_platoon_experiment(const PlatoonExperimentConfig& config);

}  // namespace vdsa
