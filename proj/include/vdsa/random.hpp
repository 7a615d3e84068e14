#pragma once

#include <cstdint>
#include <random>

namespace vdsa {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to turn counters into well-mixed seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed derivation shared by every experiment and the CLI.
///
/// A run is identified by (base seed, stream, index): `stream` names the
/// consumer (strategy, configuration, ...) and `index` the run within it.
/// The result depends only on those three counters, so work can be split
/// across any number of workers without changing outcomes.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(base) ^ stream) ^ (index * 0xd6e8feb86659fd93ULL));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Binomial(n, p) draw. Small n uses a Bernoulli count so the stream
/// consumption is independent of the standard library's algorithm choice.
int draw_binomial(int n, double p, Rng& rng);

}  // namespace vdsa
