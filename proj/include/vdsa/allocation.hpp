#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vdsa/bounds.hpp"
#include "vdsa/core.hpp"

namespace vdsa {

/// floor(N/L) per channel, the remainder on distinct channels chosen
/// uniformly at random.
AllocationPlan equal_allocation(int n_budget, std::size_t n_channels, Rng& rng);
AllocationPlan equal_allocation(int n_budget, std::size_t n_channels, std::uint64_t seed);

/// Stars-and-bars stream of `base + c` over every composition c of `total`
/// into base.size() non-negative parts, in ascending lexicographic order.
class CompositionEnumerator {
 public:
  CompositionEnumerator(int total, std::span<const int> base);

  /// Current tuple (base already added).
  const std::vector<int>& current() const { return tuple_; }
  /// Advances; false once the stream is exhausted.
  bool next();

 private:
  std::vector<int> base_;
  std::vector<int> parts_;
  std::vector<int> tuple_;
};

std::vector<std::vector<int>> enumerate_allocations(int total, std::size_t n_channels,
                                                    std::span<const int> base);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;
inline constexpr double kBoundTieTolerance = 1e-12;

struct GlobalOptimum {
  /// Every cumulative tuple within the tie tolerance of the best upper bound,
  /// ascending lexicographically. front() is the conventional pick.
  std::vector<std::vector<int>> maximizers;
  SuccessBounds bounds;  // of maximizers.front()
  std::uint64_t evaluated = 0;
};

/// Exhaustive search over cumulative tuples summing to iteration*N with
/// floor(N/L) per channel fixed. Throws CapacityError above `cap` tuples.
GlobalOptimum global_optimal(const ChannelSet& channels, int n_budget, int iteration,
                             std::uint64_t cap = kDefaultEnumerationCap);
GlobalOptimum global_optimal(BoundEvaluator& evaluator, int n_budget, int iteration,
                             std::uint64_t cap = kDefaultEnumerationCap);

struct FrontierEntry {
  std::vector<int> cumulative;
  std::vector<int> increment;  // samples added in this iteration
  std::size_t parent = 0;      // index into the previous frontier
};

/// Cumulative tuples tied for the best upper bound after `iteration`
/// iterations, ascending lexicographically.
struct SearchFrontier {
  int iteration = 0;
  std::vector<FrontierEntry> entries;
  SuccessBounds bounds;
  bool truncated = false;  // the tie set overflowed the cap at this step

  /// The empty frontier before the first iteration.
  static SearchFrontier initial(std::size_t n_channels);
};

struct IterativeOptions {
  std::size_t frontier_cap = 64;
  double tie_tolerance = kBoundTieTolerance;
};

struct IterativeStep {
  SearchFrontier next;
  AllocationPlan chosen;  // increment of next.entries.front()
};

/// One greedy step: extend every frontier tuple by every distribution of N
/// new samples (floor(N/L) fixed on the first step) and keep the maximizers.
IterativeStep iterative_optimal(BoundEvaluator& evaluator, int n_budget,
                                const SearchFrontier& frontier, const IterativeOptions& options = {});
IterativeStep iterative_optimal(const ChannelSet& channels, int n_budget,
                                const SearchFrontier& frontier, const IterativeOptions& options = {});

/// A committed allocation sequence through the iterative search.
struct IterativePath {
  std::vector<std::vector<int>> cumulative;  // [iteration-1][channel]
  std::vector<AllocationPlan> increments;    // [iteration-1]
  std::vector<SuccessBounds> bounds;         // frontier bounds per iteration
  std::size_t max_frontier = 0;
  bool truncated = false;
};

/// Runs `iterations` greedy steps, then backtracks from the smallest final
/// tuple so the returned sequence is realizable (cumulative counts never
/// decrease) and every prefix is a per-iteration maximizer.
IterativePath iterative_optimal_path(const ChannelSet& channels, int n_budget, int iterations,
                                     const IterativeOptions& options = {});

/// Largest-remainder (Hamilton) rounding of N * w_l / sum(w); remainder ties
/// go to the lower channel index.
AllocationPlan largest_remainder(std::span<const double> weights, int n_budget);

/// Exponential allocation heuristic. Weights exp(gamma * estimate), except
/// the best channel, which takes the second-best channel's weight.
/// NaN entries are treated as unobserved and take the sentinel estimate.
AllocationPlan heuristic_allocation(std::span<const double> estimates, double gamma, int n_budget);
AllocationPlan heuristic_allocation(const CbrEstimate& estimate, double gamma, int n_budget);

}  // namespace vdsa
