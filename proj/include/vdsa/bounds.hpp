#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdsa/core.hpp"

namespace vdsa {

struct SupportPoint {
  Ratio value;
  double mass = 0.0;
};

/// Probability mass over exact rational support points, strictly increasing.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  /// Points must already be strictly increasing under exact comparison.
  explicit DiscreteDistribution(std::vector<SupportPoint> points);

  static DiscreteDistribution point_mass(Ratio value);

  const std::vector<SupportPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// Pr{X <= x}.
  double cdf(const Ratio& x) const;
  /// Pr{X = x}; 0 off the support.
  double mass_at(const Ratio& x) const;
  double total_mass() const;

 private:
  std::vector<SupportPoint> points_;
};

/// Minimum of the optimal-set estimates (b) and of the wrong-set estimates (c).
struct MinDistributionPair {
  DiscreteDistribution dist_b;
  DiscreteDistribution dist_c;
};

struct SuccessBounds {
  double lower = 0.0;
  double upper = 0.0;
  double p_strict = 0.0;   // Pr{b < c}
  double p_equal = 0.0;    // Pr{b = c}
  double p_greater = 0.0;  // Pr{b > c}, computed independently of the two above
};

/// Distribution of the ML estimate k/n with k ~ Binomial(n, beta).
/// Support {q/n}; zero-mass points are pruned.
DiscreteDistribution estimate_distribution(double beta, std::int64_t cumulative_samples);

/// Point mass at the unobserved-channel sentinel.
DiscreteDistribution unobserved_distribution();

/// Distribution of the minimum of independent variables, with coinciding
/// rational values from different inputs merged into one support point.
DiscreteDistribution min_distribution(std::span<const DiscreteDistribution> dists);

/// Lower/upper bounds on the probability of selecting an optimal channel.
/// n_wrong == 0 means every channel is optimal: both bounds are 1.
SuccessBounds success_bounds(const MinDistributionPair& pair, std::size_t n_optimal,
                             std::size_t n_wrong);

/// Builds per-channel distributions, reduces them to (b, c) and evaluates
/// success_bounds. Channels with zero cumulative samples use the sentinel.
SuccessBounds bounds_for_allocation(const ChannelSet& channels, std::span<const int> cumulative);

/// Bound evaluator for allocation searches.
///
/// Evaluates the same quantities as bounds_for_allocation without
/// materializing merged distributions: Pr{min >= x} and Pr{min > x} for a
/// rational x reduce to integer floor/ceil lookups in cached binomial tail
/// tables. Instances cache per (channel, count) tables and are not
/// thread-safe; use one per thread.
class BoundEvaluator {
 public:
  explicit BoundEvaluator(const ChannelSet& channels);

  SuccessBounds evaluate(std::span<const int> cumulative);
  const ChannelSet& channels() const { return channels_; }

 private:
  const std::vector<double>& tail(ChannelIndex l, int n);
  double prob_ge(ChannelIndex l, int n, const Ratio& x);
  double prob_gt(ChannelIndex l, int n, const Ratio& x);

  ChannelSet channels_;
  std::vector<std::vector<std::vector<double>>> tails_;  // [channel][n] -> Pr{k >= j}
  std::vector<Ratio> support_scratch_;
};

/// Default guard on the number of joint outcomes brute_force_success visits.
inline constexpr std::uint64_t kBruteForceGuard = 1'000'000;

/// Exact success probability by enumerating every joint outcome. A tie among
/// m minimizers holding t optimal channels contributes t/m of its mass.
/// Throws CapacityError when prod(N_l + 1) exceeds `guard`.
double brute_force_success(const ChannelSet& channels, std::span<const int> cumulative,
                           std::uint64_t guard = kBruteForceGuard);

}  // namespace vdsa
