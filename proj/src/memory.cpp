#include "vdsa/memory.hpp"

#include <algorithm>
#include <stdexcept>

namespace vdsa {

void MemoryConfig::validate() const {
  if (window_J < 0) throw std::domain_error("memory window J must be >= 0");
  if (swa_K < 1) throw std::domain_error("SWA length K must be >= 1");
  if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) {
    throw std::domain_error("EWMA alpha must lie in (0, 1]");
  }
}

std::vector<double> windowed_estimate(const SensingLedger& ledger, int iteration, int window_J,
                                      std::span<const double> previous) {
  if (iteration < 1 || static_cast<std::size_t>(iteration) > ledger.iterations()) {
    throw std::domain_error("windowed_estimate: iteration outside the ledger");
  }
  if (window_J < 0) throw std::domain_error("memory window J must be >= 0");
  const std::size_t L = ledger.channels();
  if (!previous.empty() && previous.size() != L) {
    throw std::domain_error("windowed_estimate: previous estimate has the wrong length");
  }
  const auto first = static_cast<std::size_t>(std::max(1, iteration - window_J));
  const auto last = static_cast<std::size_t>(iteration);
  const auto busy = ledger.busy_sum(first, last);
  const auto samples = ledger.sample_sum(first, last);
  std::vector<double> out(L);
  for (std::size_t l = 0; l < L; ++l) {
    if (samples[l] > 0) {
      out[l] = static_cast<double>(busy[l]) / static_cast<double>(samples[l]);
    } else {
      out[l] = previous.empty() ? kUnobservedValue : previous[l];
    }
  }
  return out;
}

double swa_smooth(std::span<const double> history, int K) {
  if (K < 1) throw std::domain_error("SWA length K must be >= 1");
  if (history.empty()) throw std::domain_error("swa_smooth needs at least one value");
  const std::size_t n = std::min(history.size(), static_cast<std::size_t>(K));
  double sum = 0.0;
  for (std::size_t j = history.size() - n; j < history.size(); ++j) sum += history[j];
  return sum / static_cast<double>(n);
}

double ewma_smooth(std::optional<double> previous, double current, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("EWMA alpha must lie in (0, 1]");
  if (!previous) return current;
  return alpha * current + (1.0 - alpha) * *previous;
}

Smoother::Smoother(const MemoryConfig& config, std::size_t n_channels)
    : config_(config), history_(n_channels), smoothed_(n_channels, kUnobservedValue) {
  config_.validate();
}

const std::vector<double>& Smoother::update(std::span<const double> windowed) {
  if (windowed.size() != smoothed_.size()) {
    throw std::domain_error("Smoother::update: wrong number of channels");
  }
  for (std::size_t l = 0; l < windowed.size(); ++l) {
    switch (config_.model) {
      case MemoryModel::kNone:
        smoothed_[l] = windowed[l];
        break;
      case MemoryModel::kSwa: {
        auto& h = history_[l];
        h.push_back(windowed[l]);
        if (h.size() > static_cast<std::size_t>(config_.swa_K)) h.pop_front();
        double sum = 0.0;
        for (double v : h) sum += v;
        smoothed_[l] = sum / static_cast<double>(h.size());
        break;
      }
      case MemoryModel::kEwma:
        smoothed_[l] = ewma_smooth(primed_ ? std::optional<double>(smoothed_[l]) : std::nullopt,
                                   windowed[l], config_.ewma_alpha);
        break;
    }
  }
  primed_ = true;
  return smoothed_;
}

}  // namespace vdsa
