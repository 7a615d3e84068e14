#include "vdsa/bounds.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vdsa/errors.hpp"
#include "vdsa/numeric.hpp"

namespace vdsa {

DiscreteDistribution::DiscreteDistribution(std::vector<SupportPoint> points)
    : points_(std::move(points)) {
  for (std::size_t k = 1; k < points_.size(); ++k) {
    if (!ratio_less(points_[k - 1].value, points_[k].value)) {
      throw std::domain_error("distribution support must be strictly increasing");
    }
  }
}

DiscreteDistribution DiscreteDistribution::point_mass(Ratio value) {
  return DiscreteDistribution({SupportPoint{value, 1.0}});
}

double DiscreteDistribution::cdf(const Ratio& x) const {
  KahanSum acc;
  for (const auto& p : points_) {
    if (compare(p.value, x) > 0) break;
    acc += p.mass;
  }
  return acc.value();
}

double DiscreteDistribution::mass_at(const Ratio& x) const {
  for (const auto& p : points_) {
    const int c = compare(p.value, x);
    if (c == 0) return p.mass;
    if (c > 0) break;
  }
  return 0.0;
}

double DiscreteDistribution::total_mass() const {
  KahanSum acc;
  for (const auto& p : points_) acc += p.mass;
  return acc.value();
}

DiscreteDistribution estimate_distribution(double beta, std::int64_t cumulative_samples) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::domain_error("beta must lie in [0, 1]");
  if (cumulative_samples < 1) {
    throw std::domain_error("estimate_distribution needs at least one sample");
  }
  const int n = static_cast<int>(cumulative_samples);
  const auto pmf = binomial_pmf(n, beta);
  std::vector<SupportPoint> points;
  for (int q = 0; q <= n; ++q) {
    if (pmf[q] > 0.0) points.push_back({Ratio{q, n}, pmf[q]});
  }
  return DiscreteDistribution(std::move(points));
}

DiscreteDistribution unobserved_distribution() {
  return DiscreteDistribution::point_mass(kUnobservedRatio);
}

namespace {

// Pr{X > x_k} for each point of a sorted merged support.
std::vector<double> survival_on(const DiscreteDistribution& d, const std::vector<Ratio>& support) {
  const auto& pts = d.points();
  // suffix[j] = sum of masses at indices >= j
  std::vector<double> suffix(pts.size() + 1, 0.0);
  KahanSum acc;
  for (std::size_t j = pts.size(); j-- > 0;) {
    acc += pts[j].mass;
    suffix[j] = acc.value();
  }
  std::vector<double> out(support.size());
  std::size_t j = 0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    while (j < pts.size() && compare(pts[j].value, support[k]) <= 0) ++j;
    out[k] = suffix[j];
  }
  return out;
}

// Pr{X > v} at each support point of `of`, for X distributed as `d`.
std::vector<double> survival_at_points(const DiscreteDistribution& d,
                                       const DiscreteDistribution& of) {
  std::vector<Ratio> support;
  support.reserve(of.size());
  for (const auto& p : of.points()) support.push_back(p.value);
  return survival_on(d, support);
}

}  // namespace

DiscreteDistribution min_distribution(std::span<const DiscreteDistribution> dists) {
  if (dists.empty()) throw std::domain_error("min_distribution of an empty list");
  if (dists.size() == 1) return dists.front();

  std::vector<Ratio> support;
  for (const auto& d : dists) {
    for (const auto& p : d.points()) support.push_back(p.value);
  }
  std::sort(support.begin(), support.end(), ratio_less);
  support.erase(std::unique(support.begin(), support.end(), ratio_equal), support.end());

  std::vector<double> joint(support.size(), 1.0);
  for (const auto& d : dists) {
    const auto s = survival_on(d, support);
    for (std::size_t k = 0; k < support.size(); ++k) joint[k] *= s[k];
  }

  std::vector<SupportPoint> points;
  double previous = 1.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double mass = std::max(0.0, previous - joint[k]);
    previous = joint[k];
    if (mass >= kMassFloor) points.push_back({support[k], mass});
  }
  return DiscreteDistribution(std::move(points));
}

SuccessBounds success_bounds(const MinDistributionPair& pair, std::size_t n_optimal,
                             std::size_t n_wrong) {
  if (n_optimal == 0) throw std::domain_error("success_bounds needs a non-empty optimal set");
  if (n_wrong == 0) return SuccessBounds{1.0, 1.0, 1.0, 0.0, 0.0};
  if (pair.dist_b.empty() || pair.dist_c.empty()) {
    throw std::domain_error("success_bounds needs two non-empty distributions");
  }

  const auto c_above_b = survival_at_points(pair.dist_c, pair.dist_b);
  const auto b_above_c = survival_at_points(pair.dist_b, pair.dist_c);

  KahanSum strict;
  KahanSum equal;
  KahanSum greater;
  const auto& bp = pair.dist_b.points();
  const auto& cp = pair.dist_c.points();
  for (std::size_t k = 0; k < bp.size(); ++k) strict += bp[k].mass * c_above_b[k];
  for (std::size_t k = 0; k < cp.size(); ++k) greater += cp[k].mass * b_above_c[k];
  for (std::size_t i = 0, j = 0; i < bp.size() && j < cp.size();) {
    const int c = compare(bp[i].value, cp[j].value);
    if (c == 0) {
      equal += bp[i].mass * cp[j].mass;
      ++i;
      ++j;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }

  SuccessBounds out;
  out.p_strict = strict.value();
  out.p_equal = equal.value();
  out.p_greater = greater.value();
  const double o = static_cast<double>(n_optimal);
  const double w = static_cast<double>(n_wrong);
  out.lower = out.p_strict + out.p_equal / (w + 1.0);
  out.upper = out.p_strict + out.p_equal * o / (o + 1.0);
  return out;
}

namespace {

DiscreteDistribution channel_distribution(const ChannelSet& channels, ChannelIndex l, int n) {
  return n > 0 ? estimate_distribution(channels.beta(l), n) : unobserved_distribution();
}

DiscreteDistribution min_over(const ChannelSet& channels, const std::vector<ChannelIndex>& set,
                              std::span<const int> cumulative) {
  std::vector<DiscreteDistribution> dists;
  dists.reserve(set.size());
  for (ChannelIndex l : set) dists.push_back(channel_distribution(channels, l, cumulative[l]));
  return min_distribution(dists);
}

void check_allocation(const ChannelSet& channels, std::span<const int> cumulative) {
  if (cumulative.size() != channels.size()) {
    throw std::domain_error("allocation length differs from channel count");
  }
  for (int n : cumulative) {
    if (n < 0) throw std::domain_error("allocation holds a negative count");
  }
}

}  // namespace

SuccessBounds bounds_for_allocation(const ChannelSet& channels, std::span<const int> cumulative) {
  check_allocation(channels, cumulative);
  if (channels.wrong_set().empty()) return SuccessBounds{1.0, 1.0, 1.0, 0.0, 0.0};
  MinDistributionPair pair{min_over(channels, channels.optimal_set(), cumulative),
                           min_over(channels, channels.wrong_set(), cumulative)};
  return success_bounds(pair, channels.optimal_set().size(), channels.wrong_set().size());
}

BoundEvaluator::BoundEvaluator(const ChannelSet& channels)
    : channels_(channels), tails_(channels.size()) {}

const std::vector<double>& BoundEvaluator::tail(ChannelIndex l, int n) {
  auto& per_n = tails_[l];
  if (per_n.size() <= static_cast<std::size_t>(n)) per_n.resize(static_cast<std::size_t>(n) + 1);
  auto& t = per_n[static_cast<std::size_t>(n)];
  if (t.empty()) t = upper_tail(binomial_pmf(n, channels_.beta(l)));
  return t;
}

double BoundEvaluator::prob_ge(ChannelIndex l, int n, const Ratio& x) {
  if (n == 0) return compare(kUnobservedRatio, x) >= 0 ? 1.0 : 0.0;
  // k/n >= a/b  <=>  k >= ceil(a n / b)
  const std::int64_t j = (x.num * n + x.den - 1) / x.den;
  return tail(l, n)[static_cast<std::size_t>(std::clamp<std::int64_t>(j, 0, n + 1))];
}

double BoundEvaluator::prob_gt(ChannelIndex l, int n, const Ratio& x) {
  if (n == 0) return compare(kUnobservedRatio, x) > 0 ? 1.0 : 0.0;
  // k/n > a/b  <=>  k >= floor(a n / b) + 1
  const std::int64_t j = x.num * n / x.den + 1;
  return tail(l, n)[static_cast<std::size_t>(std::clamp<std::int64_t>(j, 0, n + 1))];
}

SuccessBounds BoundEvaluator::evaluate(std::span<const int> cumulative) {
  check_allocation(channels_, cumulative);
  const auto& opt = channels_.optimal_set();
  const auto& wrong = channels_.wrong_set();
  if (wrong.empty()) return SuccessBounds{1.0, 1.0, 1.0, 0.0, 0.0};

  // Support of b: every attainable value of an optimal channel's estimate.
  auto& support = support_scratch_;
  support.clear();
  for (ChannelIndex l : opt) {
    const int n = cumulative[l];
    if (n == 0) {
      support.push_back(kUnobservedRatio);
      continue;
    }
    const auto& t = tail(l, n);
    for (int q = 0; q <= n; ++q) {
      if (t[q] - t[q + 1] > 0.0) support.push_back(Ratio{q, n});
    }
  }
  if (opt.size() > 1) {
    std::sort(support.begin(), support.end(), ratio_less);
    support.erase(std::unique(support.begin(), support.end(), ratio_equal), support.end());
  }

  KahanSum strict;
  KahanSum equal;
  for (const Ratio& x : support) {
    double b_ge = 1.0;
    double b_gt = 1.0;
    for (ChannelIndex l : opt) {
      b_ge *= prob_ge(l, cumulative[l], x);
      b_gt *= prob_gt(l, cumulative[l], x);
    }
    const double mass_b = b_ge - b_gt;
    if (mass_b <= 0.0) continue;
    double c_ge = 1.0;
    double c_gt = 1.0;
    for (ChannelIndex l : wrong) {
      c_ge *= prob_ge(l, cumulative[l], x);
      c_gt *= prob_gt(l, cumulative[l], x);
    }
    strict += mass_b * c_gt;
    equal += mass_b * std::max(0.0, c_ge - c_gt);
  }

  SuccessBounds out;
  out.p_strict = strict.value();
  out.p_equal = equal.value();
  out.p_greater = std::max(0.0, 1.0 - out.p_strict - out.p_equal);
  const double o = static_cast<double>(opt.size());
  const double w = static_cast<double>(wrong.size());
  out.lower = out.p_strict + out.p_equal / (w + 1.0);
  out.upper = out.p_strict + out.p_equal * o / (o + 1.0);
  return out;
}

double brute_force_success(const ChannelSet& channels, std::span<const int> cumulative,
                           std::uint64_t guard) {
  check_allocation(channels, cumulative);
  const std::size_t L = channels.size();
  std::uint64_t outcomes = 1;
  for (int n : cumulative) {
    outcomes *= static_cast<std::uint64_t>(n) + 1;
    if (outcomes > guard) {
      throw CapacityError("brute-force enumeration exceeds guard of " + std::to_string(guard) +
                          " joint outcomes");
    }
  }

  std::vector<std::vector<double>> pmf(L);
  for (ChannelIndex l = 0; l < L; ++l) pmf[l] = binomial_pmf(cumulative[l], channels.beta(l));

  auto estimate_of = [&](ChannelIndex l, int k) {
    return cumulative[l] > 0 ? Ratio{k, cumulative[l]} : kUnobservedRatio;
  };

  std::vector<int> k(L, 0);
  KahanSum success;
  while (true) {
    double p = 1.0;
    for (ChannelIndex l = 0; l < L && p > 0.0; ++l) p *= pmf[l][k[l]];
    if (p > 0.0) {
      Ratio best = estimate_of(0, k[0]);
      for (ChannelIndex l = 1; l < L; ++l) {
        if (ratio_less(estimate_of(l, k[l]), best)) best = estimate_of(l, k[l]);
      }
      int minimizers = 0;
      int optimal_minimizers = 0;
      for (ChannelIndex l = 0; l < L; ++l) {
        if (ratio_equal(estimate_of(l, k[l]), best)) {
          ++minimizers;
          if (channels.is_optimal(l)) ++optimal_minimizers;
        }
      }
      success += p * optimal_minimizers / minimizers;
    }
    // odometer over k_l in [0, N_l]
    std::size_t l = 0;
    while (l < L && k[l] == cumulative[l]) k[l++] = 0;
    if (l == L) break;
    ++k[l];
  }
  return success.value();
}

}  // namespace vdsa
