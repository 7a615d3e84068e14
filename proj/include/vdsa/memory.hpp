#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "vdsa/core.hpp"

namespace vdsa {

enum class MemoryModel { kNone, kSwa, kEwma };

struct MemoryConfig {
  int window_J = 100;  // raw estimate spans iterations i-J..i
  MemoryModel model = MemoryModel::kEwma;
  int swa_K = 4;
  double ewma_alpha = 0.7;

  static MemoryConfig none(int window_J) { return {window_J, MemoryModel::kNone, 4, 0.7}; }
  static MemoryConfig swa(int window_J, int K) { return {window_J, MemoryModel::kSwa, K, 0.7}; }
  static MemoryConfig ewma(int window_J, double alpha) {
    return {window_J, MemoryModel::kEwma, 4, alpha};
  }

  /// Throws std::domain_error on J < 0, K < 1 or alpha outside (0, 1].
  void validate() const;
};

/// Windowed ML estimate over iterations max(1, i-J)..i. A channel with no
/// samples in the window keeps its entry from `previous`, or the sentinel
/// when there is none.
std::vector<double> windowed_estimate(const SensingLedger& ledger, int iteration, int window_J,
                                      std::span<const double> previous = {});

/// Mean of the most recent min(K, history.size()) values; history is oldest first.
double swa_smooth(std::span<const double> history, int K);

double ewma_smooth(std::optional<double> previous, double current, double alpha);

/// Per-channel smoothing state for one decision engine.
class Smoother {
 public:
  Smoother(const MemoryConfig& config, std::size_t n_channels);

  /// Feeds one windowed estimate per channel and returns the smoothed values.
  const std::vector<double>& update(std::span<const double> windowed);

  const std::vector<double>& smoothed() const { return smoothed_; }
  bool primed() const { return primed_; }

 private:
  MemoryConfig config_;
  std::vector<std::deque<double>> history_;
  std::vector<double> smoothed_;
  bool primed_ = false;
};

}  // namespace vdsa
