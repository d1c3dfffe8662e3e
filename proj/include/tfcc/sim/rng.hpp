#pragma once

#include <cmath>
#include <cstdint>

namespace tfcc::sim {

// SplitMix64: tiny, fast, statistically solid for simulation use, and fully
// reproducible across platforms (pure 64-bit integer arithmetic).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Exponential inter-arrival time for a Poisson process of the given rate.
  double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

 private:
  std::uint64_t state_;
};

// Derives an independent stream from (seed, purpose, entity). Purposes keep
// subsystems decoupled so protocol ablations under one seed share placement,
// behaviors, and arrival processes exactly.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t entity = 0) {
  SplitMix64 scrambler(seed);
  std::uint64_t state = scrambler.next_u64();
  state ^= SplitMix64(purpose * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL).next_u64();
  state ^= SplitMix64(entity * 0x2545F4914F6CDD1DULL + 0x9E6C63D0876A9F4BULL).next_u64();
  return SplitMix64(state);
}

namespace stream {
inline constexpr std::uint64_t kPlacement = 1;
inline constexpr std::uint64_t kBehavior = 2;
inline constexpr std::uint64_t kTraffic = 3;
inline constexpr std::uint64_t kDropCoin = 4;
}  // namespace stream

}  // namespace tfcc::sim
