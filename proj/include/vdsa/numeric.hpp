#pragma once

#include <cstdint>
#include <vector>

namespace vdsa {

/// Kahan-compensated accumulator.
class KahanSum {
 public:
  KahanSum& operator+=(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
    return *this;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Masses below this are dropped from binomial tables.
inline constexpr double kMassFloor = 1e-300;

/// Binomial(n, p) probability mass for q = 0..n, computed in log space.
/// Exact point masses for p = 0 and p = 1.
std::vector<double> binomial_pmf(int n, double p);

/// Pr{X >= j} for j = 0..n+1 from a pmf of length n+1 (suffix sums).
std::vector<double> upper_tail(const std::vector<double>& pmf);

/// C(n + k - 1, k - 1), saturating at UINT64_MAX.
std::uint64_t composition_count(std::uint64_t total, std::uint64_t parts);

}  // namespace vdsa
