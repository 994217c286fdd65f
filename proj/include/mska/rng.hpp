#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mska {

// splitmix64: the stated 64-bit PRNG used for every seeded choice in the
// library (weight init, shuffles, dropout masks, synthetic noise) so that
// datasets and runs are portable across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one value per call, deterministic.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n); modulo reduction (documented convention).
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Derives an independent stream; used to give each record/class its own
  // deterministic sub-seed.
  SplitMix64 fork(std::uint64_t tag) {
    SplitMix64 mix(state_ ^ (0xA3EC647659359ACDULL * (tag + 1)));
    return SplitMix64(mix.next_u64());
  }

  // Fisher-Yates, high index down.
  template <typename V>
  void shuffle(V& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace mska
