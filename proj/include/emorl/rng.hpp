#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace emorl {

// Named stream ids so every consumer of randomness draws from its own
// substream of the master seed. Adding a stream never perturbs the others.
enum class RngStream : std::uint64_t {
  kPrototypes = 1,
  kEpisodes = 2,
  kSampler = 3,
};

namespace detail {

// SplitMix64 finalizer; used to derive child seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic, seedable, splittable generator. The engine is mt19937_64;
// the floating-point transforms are written out here so draws do not depend
// on implementation-defined std::*_distribution behaviour.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(detail::mix64(seed)) {}

  // Independent child stream. Children with distinct ids never collide with
  // each other or with the parent's own draw sequence.
  [[nodiscard]] Rng split(std::uint64_t stream) const {
    return Rng(detail::mix64(seed_ ^ detail::mix64(stream + 0x51ED2701FD4C12E5ULL)));
  }
  [[nodiscard]] Rng split(RngStream stream) const {
    return split(static_cast<std::uint64_t>(stream));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Draw an index from an explicit probability vector (sums to ~1).
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace emorl
