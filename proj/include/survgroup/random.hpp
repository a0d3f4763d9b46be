#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace survgroup {

// splitmix64-style finalizer; used to derive independent sub-seeds from one
// master seed so each component (forest, learner, permutation run, ...) gets
// its own reproducible stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 is bit-exact per the standard; the draw functions below are coded
// by hand because std::uniform_real_distribution and friends are
// implementation-defined and would break byte-identical outputs across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double prob) { return uniform() < prob; }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % bound + 1) % bound;  // 2^64 mod bound
    const std::uint64_t threshold = max - rem;            // accept x <= threshold
    std::uint64_t x = gen_();
    while (x > threshold) x = gen_();
    return x % bound;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace survgroup
