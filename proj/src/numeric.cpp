#include "vdsa/numeric.hpp"

#include <cmath>
#include <limits>

namespace vdsa {

std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p <= 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(n + 1.0);
  for (int q = 0; q <= n; ++q) {
    const double log_mass = log_n_fact - std::lgamma(q + 1.0) - std::lgamma(n - q + 1.0) +
                            q * log_p + (n - q) * log_q;
    const double mass = std::exp(log_mass);
    pmf[static_cast<std::size_t>(q)] = mass < kMassFloor ? 0.0 : mass;
  }
  return pmf;
}

std::vector<double> upper_tail(const std::vector<double>& pmf) {
  std::vector<double> tail(pmf.size() + 1, 0.0);
  KahanSum acc;
  for (std::size_t j = pmf.size(); j-- > 0;) {
    acc += pmf[j];
    tail[j] = acc.value();
  }
  // The full sum is 1 up to rounding; pin it so that Pr{X >= 0} is exact.
  tail[0] = 1.0;
  return tail;
}

std::uint64_t composition_count(std::uint64_t total, std::uint64_t parts) {
  if (parts == 0) return total == 0 ? 1 : 0;
  // C(total + parts - 1, parts - 1) via the multiplicative formula.
  const std::uint64_t k = parts - 1;
  const std::uint64_t n = total + k;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  __extension__ using u128 = unsigned __int128;
  u128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace vdsa
