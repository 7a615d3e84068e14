#include "vdsa/random.hpp"

namespace vdsa {

int draw_binomial(int n, double p, Rng& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n <= 64) {
    int k = 0;
    for (int j = 0; j < n; ++j) k += uniform01(rng) < p ? 1 : 0;
    return k;
  }
  std::binomial_distribution<int> dist(n, p);
  return dist(rng);
}

}  // namespace vdsa
