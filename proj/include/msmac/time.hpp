#pragma once

#include <cstdint>

namespace msmac {

// All protocol durations are exact integer nanosecond ticks.
using Tick = std::int64_t;

constexpr Tick kTicksPerUs = 1000;

constexpr Tick us_to_ticks(double us) {
  return static_cast<Tick>(us * static_cast<double>(kTicksPerUs) + (us >= 0 ? 0.5 : -0.5));
}

constexpr double ticks_to_us(Tick t) { return static_cast<double>(t) / static_cast<double>(kTicksPerUs); }

}  // namespace msmac
