#pragma once

#include <cmath>
#include <cstdint>

namespace msmac {

// SplitMix64, used as a counter-based stream: output(i) = mix(key + i * gamma).
// Per-device substreams are keyed from (seed, device id), so adding a device
// never perturbs another device's draws.
class SplitMix64 {
 public:
  SplitMix64() : state_(0) {}
  explicit SplitMix64(std::uint64_t key) : state_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t stream_key(std::uint64_t seed, std::uint64_t substream) {
    return mix(seed) ^ mix(~substream * 0xda942042e4dd58b5ULL);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate (per tick); rate must be > 0.
  double next_exponential(double rate) { return -std::log1p(-next_unit()) / rate; }

 private:
  std::uint64_t state_;
};

}  // namespace msmac
