#pragma once

#include <span>
#include <vector>

#include "vdsa/core.hpp"
#include "vdsa/memory.hpp"

namespace vdsa {

/// Stay-or-switch rule with hysteresis. The best candidate is the lowest
/// smoothed value among channels other than `current` (ties at random); the
/// engine moves there iff smoothed[current] >= smoothed[candidate] + chi.
ChannelIndex switching_decision(ChannelIndex current, std::span<const double> smoothed,
                                double switching_cost, Rng& rng);

enum class AllocationMode { kHeuristic, kEqual };

struct EngineConfig {
  int n_budget = 8;
  double gamma = -2.0;
  AllocationMode allocation = AllocationMode::kHeuristic;
  MemoryConfig memory;
  double switching_cost = 0.1;
  /// Skip sensing and feed the true CBR vector as the windowed estimate.
  bool exact_estimates = false;

  void validate() const;
};

/// One platoon's channel-selection loop.
///
/// The first step() is the initialization round: equal allocation, then the
/// lowest windowed estimate becomes the current channel. Every later step
/// allocates from the previous windowed estimate, senses, re-estimates,
/// smooths and applies switching_decision.
class VdsaEngine {
 public:
  VdsaEngine(const EngineConfig& config, std::size_t n_channels);

  /// Advances one iteration against the true CBR vector and returns the
  /// channel in use afterwards.
  ChannelIndex step(std::span<const double> true_betas, Rng& rng);

  bool initialized() const { return iteration_ > 0; }
  ChannelIndex current() const { return current_; }
  int iteration() const { return iteration_; }
  int switches() const { return switches_; }
  const AllocationPlan& last_plan() const { return last_plan_; }
  const std::vector<double>& windowed() const { return windowed_; }
  const std::vector<double>& smoothed() const { return smoother_.smoothed(); }
  const SensingLedger& ledger() const { return ledger_; }
  const EngineConfig& config() const { return config_; }

 private:
  AllocationPlan plan_next(Rng& rng) const;

  EngineConfig config_;
  std::size_t n_channels_;
  SensingLedger ledger_;
  Smoother smoother_;
  std::vector<double> windowed_;
  AllocationPlan last_plan_;
  ChannelIndex current_ = 0;
  int iteration_ = 0;  // completed steps, counting initialization
  int switches_ = 0;
};

}  // namespace vdsa
