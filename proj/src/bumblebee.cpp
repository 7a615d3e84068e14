#include "vdsa/bumblebee.hpp"

#include <limits>
#include <stdexcept>

#include "vdsa/allocation.hpp"

namespace vdsa {

ChannelIndex switching_decision(ChannelIndex current, std::span<const double> smoothed,
                                double switching_cost, Rng& rng) {
  if (current >= smoothed.size()) throw std::domain_error("current channel out of range");
  if (switching_cost < 0.0) throw std::domain_error("switching cost must be >= 0");
  if (smoothed.size() < 2) return current;

  double best = std::numeric_limits<double>::infinity();
  std::vector<ChannelIndex> ties;
  for (ChannelIndex l = 0; l < smoothed.size(); ++l) {
    if (l == current) continue;
    if (smoothed[l] < best) {
      best = smoothed[l];
      ties.assign(1, l);
    } else if (smoothed[l] == best) {
      ties.push_back(l);
    }
  }
  ChannelIndex candidate = ties.front();
  if (ties.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    candidate = ties[pick(rng)];
  }
  return smoothed[current] >= best + switching_cost ? candidate : current;
}

void EngineConfig::validate() const {
  if (n_budget < 1) throw std::domain_error("sample budget N must be >= 1");
  if (gamma > 0.0) throw std::domain_error("allocation gamma must be <= 0");
  if (switching_cost < 0.0) throw std::domain_error("switching cost must be >= 0");
  memory.validate();
}

VdsaEngine::VdsaEngine(const EngineConfig& config, std::size_t n_channels)
    : config_(config),
      n_channels_(n_channels),
      ledger_(n_channels, config.n_budget),
      smoother_(config.memory, n_channels),
      windowed_(n_channels, kUnobservedValue) {
  config_.validate();
  if (n_channels < 2) throw std::domain_error("engine needs at least two channels");
}

AllocationPlan VdsaEngine::plan_next(Rng& rng) const {
  if (iteration_ == 0 || config_.allocation == AllocationMode::kEqual) {
    return equal_allocation(config_.n_budget, n_channels_, rng);
  }
  return heuristic_allocation(windowed_, config_.gamma, config_.n_budget);
}

ChannelIndex VdsaEngine::step(std::span<const double> true_betas, Rng& rng) {
  if (true_betas.size() != n_channels_) throw std::domain_error("CBR vector has the wrong length");

  last_plan_ = plan_next(rng);
  if (config_.exact_estimates) {
    windowed_.assign(true_betas.begin(), true_betas.end());
  } else {
    const auto busy = sample_channels(true_betas, last_plan_, rng);
    ledger_.record(busy, last_plan_.counts);
    windowed_ = windowed_estimate(ledger_, static_cast<int>(ledger_.iterations()),
                                  config_.memory.window_J, windowed_);
  }
  const auto& smoothed = smoother_.update(windowed_);

  if (iteration_ == 0) {
    current_ = select_lowest(windowed_, rng);
  } else {
    const ChannelIndex next = switching_decision(current_, smoothed, config_.switching_cost, rng);
    if (next != current_) ++switches_;
    current_ = next;
  }
  ++iteration_;
  return current_;
}

}  // namespace vdsa
