#include "vdsa/core.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vdsa {

int compare(const Ratio& a, const Ratio& b) {
  // Counts stay far below 2^31, so the products cannot overflow.
  const std::int64_t lhs = a.num * b.den;
  const std::int64_t rhs = b.num * a.den;
  return (lhs > rhs) - (lhs < rhs);
}

ChannelSet::ChannelSet(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.size() < 2) throw std::domain_error("ChannelSet needs at least two channels");
  for (double b : betas_) {
    if (!(b >= 0.0 && b <= 1.0)) throw std::domain_error("CBR values must lie in [0, 1]");
  }
  const double lo = *std::min_element(betas_.begin(), betas_.end());
  for (ChannelIndex l = 0; l < betas_.size(); ++l) {
    (betas_[l] == lo ? optimal_ : wrong_).push_back(l);
  }
}

bool ChannelSet::is_optimal(ChannelIndex l) const { return betas_.at(l) == betas_[optimal_.front()]; }

int AllocationPlan::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

SensingLedger::SensingLedger(std::size_t channels, int budget)
    : channels_(channels), budget_(budget) {
  if (channels == 0) throw std::domain_error("ledger needs at least one channel");
  if (budget < 0) throw std::domain_error("sample budget must be non-negative");
}

void SensingLedger::record(std::span<const int> busy, std::span<const int> samples) {
  if (busy.size() != channels_ || samples.size() != channels_) {
    throw std::domain_error("ledger row has wrong channel count");
  }
  int total = 0;
  for (std::size_t l = 0; l < channels_; ++l) {
    if (samples[l] < 0 || busy[l] < 0 || busy[l] > samples[l]) {
      throw std::domain_error("ledger row violates 0 <= k <= N on channel " + std::to_string(l + 1));
    }
    total += samples[l];
  }
  if (total != budget_) {
    throw std::domain_error("ledger row spends " + std::to_string(total) + " samples, budget is " +
                            std::to_string(budget_));
  }
  busy_.emplace_back(busy.begin(), busy.end());
  samples_.emplace_back(samples.begin(), samples.end());
}

void SensingLedger::check_iteration(std::size_t iteration) const {
  if (iteration == 0 || iteration > busy_.size()) {
    throw std::domain_error("iteration " + std::to_string(iteration) + " not in ledger of " +
                            std::to_string(busy_.size()));
  }
}

std::span<const int> SensingLedger::busy(std::size_t iteration) const {
  check_iteration(iteration);
  return busy_[iteration - 1];
}

std::span<const int> SensingLedger::samples(std::size_t iteration) const {
  check_iteration(iteration);
  return samples_[iteration - 1];
}

namespace {

std::vector<std::int64_t> column_sum(const std::vector<std::vector<int>>& rows, std::size_t channels,
                                     std::size_t first, std::size_t last) {
  std::vector<std::int64_t> out(channels, 0);
  for (std::size_t i = first; i <= last; ++i) {
    for (std::size_t l = 0; l < channels; ++l) out[l] += rows[i - 1][l];
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> SensingLedger::busy_sum(std::size_t first, std::size_t last) const {
  check_iteration(first);
  check_iteration(last);
  return column_sum(busy_, channels_, first, last);
}

std::vector<std::int64_t> SensingLedger::sample_sum(std::size_t first, std::size_t last) const {
  check_iteration(first);
  check_iteration(last);
  return column_sum(samples_, channels_, first, last);
}

CbrEstimate::CbrEstimate(std::vector<std::int64_t> busy, std::vector<std::int64_t> samples)
    : busy_(std::move(busy)), samples_(std::move(samples)) {
  if (busy_.size() != samples_.size()) throw std::domain_error("estimate size mismatch");
  for (std::size_t l = 0; l < busy_.size(); ++l) {
    if (samples_[l] < 0 || busy_[l] < 0 || busy_[l] > samples_[l]) {
      throw std::domain_error("estimate violates 0 <= k <= N");
    }
  }
}

Ratio CbrEstimate::ratio(ChannelIndex l) const {
  if (!observed(l)) return kUnobservedRatio;
  return Ratio{busy_[l], samples_[l]};
}

std::vector<double> CbrEstimate::values() const {
  std::vector<double> out(size());
  for (ChannelIndex l = 0; l < size(); ++l) out[l] = value(l);
  return out;
}

bool CbrEstimate::any_observed() const {
  return std::any_of(samples_.begin(), samples_.end(), [](std::int64_t n) { return n > 0; });
}

CbrEstimate estimate_cbr(const SensingLedger& ledger, std::size_t iteration) {
  if (ledger.empty()) throw std::domain_error("cannot estimate CBR from an empty ledger");
  return CbrEstimate(ledger.busy_sum(1, iteration), ledger.sample_sum(1, iteration));
}

namespace {

ChannelIndex pick_uniform(const std::vector<ChannelIndex>& ties, Rng& rng) {
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

}  // namespace

ChannelIndex select_channel(const CbrEstimate& estimate, Rng& rng) {
  if (estimate.size() == 0 || !estimate.any_observed()) {
    throw std::domain_error("select_channel: no channel has been observed");
  }
  std::vector<ChannelIndex> ties{0};
  Ratio best = estimate.ratio(0);
  for (ChannelIndex l = 1; l < estimate.size(); ++l) {
    const int c = compare(estimate.ratio(l), best);
    if (c < 0) {
      best = estimate.ratio(l);
      ties.assign(1, l);
    } else if (c == 0) {
      ties.push_back(l);
    }
  }
  return pick_uniform(ties, rng);
}

ChannelIndex select_lowest(std::span<const double> values, Rng& rng) {
  if (values.empty()) throw std::domain_error("select_lowest: empty estimate");
  std::vector<ChannelIndex> ties{0};
  for (ChannelIndex l = 1; l < values.size(); ++l) {
    if (values[l] < values[ties.front()]) {
      ties.assign(1, l);
    } else if (values[l] == values[ties.front()]) {
      ties.push_back(l);
    }
  }
  return pick_uniform(ties, rng);
}

std::vector<int> sample_channels(std::span<const double> betas, const AllocationPlan& plan,
                                 Rng& rng) {
  if (plan.size() != betas.size()) throw std::domain_error("plan length differs from channel count");
  std::vector<int> busy(betas.size());
  for (std::size_t l = 0; l < betas.size(); ++l) {
    if (plan[l] < 0) throw std::domain_error("plan holds a negative count");
    busy[l] = draw_binomial(plan[l], betas[l], rng);
  }
  return busy;
}

std::vector<int> sample_channels(const ChannelSet& channels, const AllocationPlan& plan,
                                 std::uint64_t seed) {
  Rng rng(seed);
  return sample_channels(channels.betas(), plan, rng);
}

}  // namespace vdsa
