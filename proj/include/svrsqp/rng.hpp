#pragma once

#include <cstdint>
#include <cmath>

namespace svrsqp {

// Counter-based pseudo-random generator: the splitmix64 finalizer applied to a
// key xored with a linearly advancing counter. Substreams are derived by
// hashing (lane_a, lane_b) into a fresh key, so the solver can hand every
// (outer, inner) iteration its own stream and the draw sequence stays
// reproducible under reordering or parallel execution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kKeySalt)), counter_(0) {}

  std::uint64_t next_u64() {
    std::uint64_t v = mix(key_ ^ (counter_ * kGamma + kGamma));
    ++counter_;
    return v;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n >= 1. Rejection-sampled, so unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      __uint128_t wide = static_cast<__uint128_t>(r) * n;
      if (static_cast<std::uint64_t>(wide) >= threshold) {
        return static_cast<std::uint64_t>(wide >> 64);
      }
    }
  }

  /// Standard normal via Box-Muller. Pairs of draws are generated together
  /// and the spare is cached, so consumption stays deterministic per stream.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = next_unit();
    } while (u1 <= 0.0);
    u2 = next_unit();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Independent substream identified by (a, b) relative to this stream's key.
  /// Splitting does not consume or perturb this stream.
  Rng split(std::uint64_t a, std::uint64_t b = 0) const {
    std::uint64_t child = mix(key_ ^ mix(a + kLaneSaltA)) ^ mix(b + kLaneSaltB);
    return Rng(child, 0);
  }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kKeySalt = 0x5851F42D4C957F2Dull;
  static constexpr std::uint64_t kLaneSaltA = 0x14057B7EF767814Full;
  static constexpr std::uint64_t kLaneSaltB = 0x27BB2EE687B0B0FDull;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  std::uint64_t key_;
  std::uint64_t counter_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream lanes used by the solver and harness. Every consumer derives its
// generator as run_rng.split(lane, index) so streams never collide.
enum StreamLane : std::uint64_t {
  kStreamInit = 1,        // starting point draws
  kStreamBatch = 2,       // minibatch index sampling, index packs (outer, inner)
  kStreamConstraint = 3,  // random constraint data
  kStreamLipschitz = 4,   // probe directions for the Lipschitz estimate
};

/// Packs an (outer, inner) iteration pair into one substream index.
inline std::uint64_t pack_iteration(std::uint64_t outer, std::uint64_t inner) {
  return (outer << 32) | (inner & 0xFFFFFFFFull);
}

}  // namespace svrsqp
