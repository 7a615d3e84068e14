#include "vdsa/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vdsa/errors.hpp"
#include "vdsa/numeric.hpp"

namespace vdsa {

AllocationPlan equal_allocation(int n_budget, std::size_t n_channels, Rng& rng) {
  if (n_budget < 0) throw std::domain_error("sample budget must be non-negative");
  if (n_channels == 0) throw std::domain_error("equal_allocation needs at least one channel");
  const int L = static_cast<int>(n_channels);
  AllocationPlan plan{std::vector<int>(n_channels, n_budget / L)};
  const int extra = n_budget - L * (n_budget / L);
  if (extra == 0) return plan;
  // partial Fisher-Yates: the first `extra` slots become a uniform random subset
  std::vector<std::size_t> order(n_channels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int j = 0; j < extra; ++j) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), n_channels - 1);
    std::swap(order[static_cast<std::size_t>(j)], order[pick(rng)]);
    ++plan.counts[order[static_cast<std::size_t>(j)]];
  }
  return plan;
}

AllocationPlan equal_allocation(int n_budget, std::size_t n_channels, std::uint64_t seed) {
  Rng rng(seed);
  return equal_allocation(n_budget, n_channels, rng);
}

CompositionEnumerator::CompositionEnumerator(int total, std::span<const int> base)
    : base_(base.begin(), base.end()), parts_(base.size(), 0), tuple_(base_) {
  if (total < 0) throw std::domain_error("composition total must be non-negative");
  if (base_.empty()) throw std::domain_error("composition needs at least one part");
  parts_.back() = total;
  tuple_.back() += total;
}

bool CompositionEnumerator::next() {
  // Ascending lexicographic successor: bump the rightmost non-final part that
  // still has mass to its right, and pour everything after it into the tail.
  const std::size_t L = parts_.size();
  if (L < 2) return false;
  int suffix = parts_[L - 1];
  std::size_t j = L - 1;
  while (j-- > 0) {
    if (suffix > 0) {
      ++parts_[j];
      for (std::size_t m = j + 1; m + 1 < L; ++m) parts_[m] = 0;
      parts_[L - 1] = suffix - 1;
      for (std::size_t m = j; m < L; ++m) tuple_[m] = base_[m] + parts_[m];
      return true;
    }
    suffix += parts_[j];
  }
  return false;
}

std::vector<std::vector<int>> enumerate_allocations(int total, std::size_t n_channels,
                                                    std::span<const int> base) {
  if (base.size() != n_channels) throw std::domain_error("base length differs from channel count");
  std::vector<std::vector<int>> out;
  CompositionEnumerator it(total, base);
  do {
    out.push_back(it.current());
  } while (it.next());
  return out;
}

GlobalOptimum global_optimal(BoundEvaluator& evaluator, int n_budget, int iteration,
                             std::uint64_t cap) {
  if (iteration < 1) throw std::domain_error("iterations are numbered from 1");
  if (n_budget < 0) throw std::domain_error("sample budget must be non-negative");
  const std::size_t L = evaluator.channels().size();
  const int per_channel = n_budget / static_cast<int>(L);
  const int free = iteration * n_budget - static_cast<int>(L) * per_channel;
  const std::uint64_t count = composition_count(static_cast<std::uint64_t>(free), L);
  if (count > cap) {
    throw CapacityError("global search at iteration " + std::to_string(iteration) + " needs " +
                        std::to_string(count) + " tuples, cap is " + std::to_string(cap));
  }

  const std::vector<int> base(L, per_channel);
  CompositionEnumerator it(free, base);
  GlobalOptimum out;
  double best = -1.0;
  std::vector<std::pair<double, std::vector<int>>> candidates;
  do {
    const auto b = evaluator.evaluate(it.current());
    ++out.evaluated;
    if (b.upper > best + kBoundTieTolerance) {
      best = b.upper;
      candidates.clear();
      candidates.emplace_back(b.upper, it.current());
    } else if (b.upper >= best - kBoundTieTolerance) {
      best = std::max(best, b.upper);
      candidates.emplace_back(b.upper, it.current());
    }
  } while (it.next());

  for (auto& [ub, tuple] : candidates) {
    if (ub >= best - kBoundTieTolerance) out.maximizers.push_back(std::move(tuple));
  }
  out.bounds = evaluator.evaluate(out.maximizers.front());
  return out;
}

GlobalOptimum global_optimal(const ChannelSet& channels, int n_budget, int iteration,
                             std::uint64_t cap) {
  BoundEvaluator evaluator(channels);
  return global_optimal(evaluator, n_budget, iteration, cap);
}

SearchFrontier SearchFrontier::initial(std::size_t n_channels) {
  SearchFrontier f;
  f.entries.push_back(FrontierEntry{std::vector<int>(n_channels, 0), std::vector<int>(n_channels, 0), 0});
  return f;
}

IterativeStep iterative_optimal(BoundEvaluator& evaluator, int n_budget,
                                const SearchFrontier& frontier, const IterativeOptions& options) {
  if (frontier.entries.empty()) throw std::domain_error("iterative search needs a non-empty frontier");
  const std::size_t L = evaluator.channels().size();
  const bool first = frontier.iteration == 0;
  const int per_channel = first ? n_budget / static_cast<int>(L) : 0;
  const int free = n_budget - static_cast<int>(L) * per_channel;
  const std::vector<int> base_increment(L, per_channel);

  struct Candidate {
    double upper;
    FrontierEntry entry;
  };
  std::vector<Candidate> candidates;
  double best = -1.0;
  std::vector<int> cumulative(L);
  for (std::size_t p = 0; p < frontier.entries.size(); ++p) {
    const auto& parent = frontier.entries[p].cumulative;
    CompositionEnumerator it(free, base_increment);
    do {
      const auto& inc = it.current();
      for (std::size_t l = 0; l < L; ++l) cumulative[l] = parent[l] + inc[l];
      const double ub = evaluator.evaluate(cumulative).upper;
      if (ub > best + options.tie_tolerance) {
        best = ub;
        candidates.clear();
      } else if (ub < best - options.tie_tolerance) {
        continue;
      }
      best = std::max(best, ub);
      candidates.push_back({ub, FrontierEntry{cumulative, inc, p}});
    } while (it.next());
  }

  std::erase_if(candidates, [&](const Candidate& c) { return c.upper < best - options.tie_tolerance; });
  // Order by tuple, then by parent so duplicates keep the earliest parent.
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.entry.cumulative < b.entry.cumulative;
  });
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const Candidate& a, const Candidate& b) {
                                 return a.entry.cumulative == b.entry.cumulative;
                               }),
                   candidates.end());

  IterativeStep step;
  step.next.iteration = frontier.iteration + 1;
  if (candidates.size() > options.frontier_cap) {
    candidates.resize(options.frontier_cap);
    step.next.truncated = true;
  }
  for (auto& c : candidates) step.next.entries.push_back(std::move(c.entry));
  step.next.bounds = evaluator.evaluate(step.next.entries.front().cumulative);
  step.chosen = AllocationPlan{step.next.entries.front().increment};
  return step;
}

IterativeStep iterative_optimal(const ChannelSet& channels, int n_budget,
                                const SearchFrontier& frontier, const IterativeOptions& options) {
  BoundEvaluator evaluator(channels);
  return iterative_optimal(evaluator, n_budget, frontier, options);
}

IterativePath iterative_optimal_path(const ChannelSet& channels, int n_budget, int iterations,
                                     const IterativeOptions& options) {
  if (iterations < 1) throw std::domain_error("iterative path needs at least one iteration");
  BoundEvaluator evaluator(channels);
  std::vector<SearchFrontier> history;
  history.push_back(SearchFrontier::initial(channels.size()));
  IterativePath path;
  for (int i = 1; i <= iterations; ++i) {
    auto step = iterative_optimal(evaluator, n_budget, history.back(), options);
    path.max_frontier = std::max(path.max_frontier, step.next.entries.size());
    path.truncated = path.truncated || step.next.truncated;
    path.bounds.push_back(step.next.bounds);
    history.push_back(std::move(step.next));
  }

  path.cumulative.resize(static_cast<std::size_t>(iterations));
  path.increments.resize(static_cast<std::size_t>(iterations));
  std::size_t index = 0;
  for (std::size_t i = static_cast<std::size_t>(iterations); i >= 1; --i) {
    const auto& entry = history[i].entries[index];
    path.cumulative[i - 1] = entry.cumulative;
    path.increments[i - 1] = AllocationPlan{entry.increment};
    index = entry.parent;
  }
  // Per-iteration bounds along the committed path. Every prefix is a
  // maximizer, so this equals the frontier bound within the tie tolerance.
  for (std::size_t i = 0; i < path.cumulative.size(); ++i) {
    path.bounds[i] = evaluator.evaluate(path.cumulative[i]);
  }
  return path;
}

AllocationPlan largest_remainder(std::span<const double> weights, int n_budget) {
  if (weights.empty()) throw std::domain_error("largest_remainder needs at least one weight");
  if (n_budget < 0) throw std::domain_error("sample budget must be non-negative");
  KahanSum total;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("weights must be finite and >= 0");
    total += w;
  }
  if (!(total.value() > 0.0)) throw std::domain_error("weights sum to zero");

  const std::size_t L = weights.size();
  AllocationPlan plan{std::vector<int>(L, 0)};
  std::vector<double> remainder(L);
  int assigned = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const double quota = n_budget * weights[l] / total.value();
    const double whole = std::floor(quota);
    plan.counts[l] = static_cast<int>(whole);
    remainder[l] = quota - whole;
    assigned += plan.counts[l];
  }
  // Rounding can push a quota a hair over an integer; never over-assign.
  while (assigned > n_budget) {
    auto it = std::max_element(plan.counts.begin(), plan.counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; assigned < n_budget; j = (j + 1) % L) {
    ++plan.counts[order[j]];
    ++assigned;
  }
  return plan;
}

AllocationPlan heuristic_allocation(std::span<const double> estimates, double gamma, int n_budget) {
  if (estimates.empty()) throw std::domain_error("heuristic_allocation needs at least one channel");
  if (gamma > 0.0) throw std::domain_error("heuristic gamma must be <= 0");
  if (std::all_of(estimates.begin(), estimates.end(), [](double v) { return std::isnan(v); })) {
    throw std::domain_error("heuristic_allocation: every estimate is undefined");
  }
  std::vector<double> value(estimates.begin(), estimates.end());
  for (double& v : value) {
    if (std::isnan(v)) v = kUnobservedValue;
  }
  const std::size_t L = value.size();
  if (L == 1) return AllocationPlan{{n_budget}};

  // best and second-best by value, lower index first on ties
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
  const std::size_t best = order[0];
  const std::size_t second = order[1];

  // Shift by the smallest exponent so extreme gamma cannot underflow every weight.
  std::vector<double> exponent(L);
  for (std::size_t l = 0; l < L; ++l) exponent[l] = gamma * (l == best ? value[second] : value[l]);
  const double top = *std::max_element(exponent.begin(), exponent.end());
  std::vector<double> weight(L);
  for (std::size_t l = 0; l < L; ++l) weight[l] = std::exp(exponent[l] - top);
  return largest_remainder(weight, n_budget);
}

AllocationPlan heuristic_allocation(const CbrEstimate& estimate, double gamma, int n_budget) {
  if (!estimate.any_observed()) {
    throw std::domain_error("heuristic_allocation: every estimate is undefined");
  }
  return heuristic_allocation(estimate.values(), gamma, n_budget);
}

}  // namespace vdsa
