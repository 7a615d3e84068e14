#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdsa/random.hpp"

namespace vdsa {

/// Channel indices are 0-based in the library. File formats and the CLI
/// report them 1-based.
using ChannelIndex = std::size_t;

/// An exact estimate busy/samples. The value 1/2 with `samples == 0` is not
/// representable here; unobserved channels are tracked by CbrEstimate.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Three-way comparison by cross-multiplication. Both denominators must be
/// positive.
int compare(const Ratio& a, const Ratio& b);
inline bool ratio_equal(const Ratio& a, const Ratio& b) { return compare(a, b) == 0; }
inline bool ratio_less(const Ratio& a, const Ratio& b) { return compare(a, b) < 0; }

/// Sentinel used for a channel with no samples: a neutral prior.
inline constexpr Ratio kUnobservedRatio{1, 2};
inline constexpr double kUnobservedValue = 0.5;

/// True per-channel CBR values together with the optimal / wrong index sets.
class ChannelSet {
 public:
  explicit ChannelSet(std::vector<double> betas);

  std::size_t size() const { return betas_.size(); }
  double beta(ChannelIndex l) const { return betas_.at(l); }
  std::span<const double> betas() const { return betas_; }

  /// Indices attaining min beta, ascending.
  const std::vector<ChannelIndex>& optimal_set() const { return optimal_; }
  /// Complement of optimal_set(), ascending. May be empty.
  const std::vector<ChannelIndex>& wrong_set() const { return wrong_; }
  bool is_optimal(ChannelIndex l) const;

 private:
  std::vector<double> betas_;
  std::vector<ChannelIndex> optimal_;
  std::vector<ChannelIndex> wrong_;
};

/// Per-iteration sample counts. Sums to the iteration budget N.
struct AllocationPlan {
  std::vector<int> counts;

  int total() const;
  std::size_t size() const { return counts.size(); }
  int operator[](std::size_t l) const { return counts[l]; }
  bool operator==(const AllocationPlan&) const = default;
};

/// Busy counts and sample counts for every channel and sensing iteration.
///
/// Iterations are numbered from 1 in the order they were recorded. Every
/// recorded iteration must spend exactly the ledger's budget.
class SensingLedger {
 public:
  SensingLedger(std::size_t channels, int budget);

  void record(std::span<const int> busy, std::span<const int> samples);

  std::size_t channels() const { return channels_; }
  int budget() const { return budget_; }
  std::size_t iterations() const { return busy_.size(); }
  bool empty() const { return busy_.empty(); }

  std::span<const int> busy(std::size_t iteration) const;
  std::span<const int> samples(std::size_t iteration) const;

  /// Sum of busy counts over iterations [first, last], both 1-based inclusive.
  std::vector<std::int64_t> busy_sum(std::size_t first, std::size_t last) const;
  std::vector<std::int64_t> sample_sum(std::size_t first, std::size_t last) const;

 private:
  void check_iteration(std::size_t iteration) const;

  std::size_t channels_;
  int budget_;
  std::vector<std::vector<int>> busy_;
  std::vector<std::vector<int>> samples_;
};

/// Per-channel CBR estimates kept as exact (busy, samples) pairs.
class CbrEstimate {
 public:
  CbrEstimate() = default;
  CbrEstimate(std::vector<std::int64_t> busy, std::vector<std::int64_t> samples);

  std::size_t size() const { return busy_.size(); }
  bool observed(ChannelIndex l) const { return samples_.at(l) > 0; }
  std::int64_t busy(ChannelIndex l) const { return busy_.at(l); }
  std::int64_t samples(ChannelIndex l) const { return samples_.at(l); }

  /// k/N for observed channels, the 1/2 sentinel otherwise.
  Ratio ratio(ChannelIndex l) const;
  double value(ChannelIndex l) const { return ratio(l).value(); }
  std::vector<double> values() const;
  bool any_observed() const;

 private:
  std::vector<std::int64_t> busy_;
  std::vector<std::int64_t> samples_;
};

/// Cumulative ML estimate over iterations 1..iteration.
CbrEstimate estimate_cbr(const SensingLedger& ledger, std::size_t iteration);

/// Lowest-estimate channel, ties uniformly at random. Compares exactly.
ChannelIndex select_channel(const CbrEstimate& estimate, Rng& rng);

/// Real-valued variant used on smoothed estimates.
ChannelIndex select_lowest(std::span<const double> values, Rng& rng);

/// Draws k_l ~ Binomial(N_l, beta_l) for each channel.
std::vector<int> sample_channels(std::span<const double> betas, const AllocationPlan& plan,
                                 Rng& rng);
std::vector<int> sample_channels(const ChannelSet& channels, const AllocationPlan& plan,
                                 std::uint64_t seed);

}  // namespace vdsa
