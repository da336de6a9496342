#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace celldtx {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// One seedable random stream. Samplers are inverted by hand instead of using
// std::*_distribution so that sequences depend only on the engine state:
// mt19937_64 output is pinned by the standard, the distributions are not,
// and reruns must be bit-identical.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // exponential with the given mean, in the same unit as the mean
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  template <typename T>
  const T& pick(const std::vector<T>& values) {
    if (values.empty()) throw std::invalid_argument("pick: empty value set");
    return values[static_cast<std::size_t>(uniform_int(values.size()))];
  }

  // Knuth product-of-uniforms Poisson; fine for the small means used here.
  int poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// Purpose tags for stream derivation. Runs that must consume identical
// randomness (agent vs baseline vs oracle traffic) share a tag; everything
// else gets its own so extra draws in one mode never shift another.
enum class StreamPurpose : std::uint64_t {
  net_init = 1,
  trainer = 2,
  train_deployment = 3,
  train_traffic = 4,
  train_policy = 5,
  eval_deployment = 6,
  eval_traffic = 7,
  eval_offset = 8,
  probe_deployment = 9,
  probe_traffic = 10,
};

inline std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(master ^ 0x517cc1b727220a95ull);
  s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return s;
}

inline RngStream derive_stream(std::uint64_t master, StreamPurpose purpose,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
  return RngStream(derive_seed(master, purpose, a, b));
}

}  // namespace celldtx
