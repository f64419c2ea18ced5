#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "msmac/time.hpp"

namespace msmac {

enum class Priority : int { HP = 0, RP = 1, LP = 2 };

inline const char* to_string(Priority p) {
  switch (p) {
    case Priority::HP: return "HP";
    case Priority::RP: return "RP";
    default: return "LP";
  }
}

// Slot/mini-slot geometry, per-class cycle lengths and feature switches.
// A slot is n_m mini-slots of T_m each followed by a transmission span T_x.
struct ProtocolParams {
  int n_m = 1;           // mini-slots per slot
  Tick t_m = 0;          // mini-slot length
  Tick t_x = 0;          // packet transmission duration
  int r_h = 1;           // slots per HP assignment cycle
  int r_r = 1;           // slots per RP assignment cycle
  int r_l = 1;           // slots per LP assignment cycle
  bool synccs = false;   // idle slots truncated to n_m * T_m
  bool buffered = false; // false = single waiting packet with replacement
  bool smsa = false;     // shared mini-slot cells allowed

  Tick slot_ticks() const { return static_cast<Tick>(n_m) * t_m + t_x; }
  Tick sensing_span_ticks() const { return static_cast<Tick>(n_m) * t_m; }
  int cycle_slots(Priority p) const {
    switch (p) {
      case Priority::HP: return r_h;
      case Priority::RP: return r_r;
      default: return r_l;
    }
  }
  // Nominal (full-length-slot) logical frame of a class.
  Tick frame_ticks(Priority p) const { return static_cast<Tick>(cycle_slots(p)) * slot_ticks(); }
};

struct PoissonTraffic {};  // rate taken from the device's lambda

struct BernoulliPerFrameTraffic {
  double p = 0.0;  // arrival probability per logical frame
};

struct DeterministicTraffic {
  Tick period = 0;
  Tick phase = 0;
};

struct TraceTraffic {
  std::vector<Tick> ticks;  // strictly increasing
};

using TrafficProcess =
    std::variant<PoissonTraffic, BernoulliPerFrameTraffic, DeterministicTraffic, TraceTraffic>;

struct DeviceSpec {
  int id = 0;
  Priority priority = Priority::LP;
  double lambda_per_tick = 0.0;  // packets per nanosecond
  double lambda_per_s = 0.0;     // rate as written in the scenario file; 0 = derived
  TrafficProcess traffic = PoissonTraffic{};
};

// One mini-slot of one class-cycle slot per device; SMsA allows several
// same-class devices to share one (slot, mini-slot) cell.
struct AssignmentEntry {
  int device = 0;
  int slot = 1;      // slot index within the device's class cycle, 1-based
  int minislot = 1;  // 1-based
};

struct Assignment {
  std::vector<AssignmentEntry> entries;
};

struct QosSpec {
  std::array<Tick, 3> delta = {us_to_ticks(1e3), us_to_ticks(1e4), us_to_ticks(1e5)};
  std::array<double, 3> rho = {1e-3, 1e-2, 1e-1};

  Tick delta_for(Priority p) const { return delta[static_cast<int>(p)]; }
  double rho_for(Priority p) const { return rho[static_cast<int>(p)]; }
};

struct RunControls {
  std::uint64_t seed = 1;
  std::int64_t horizon_slots = 0;
  int replications = 1;
  double warmup_fraction = 0.1;
};

struct Scenario {
  ProtocolParams params;
  std::vector<DeviceSpec> devices;
  Assignment assignment;
  QosSpec qos;
  RunControls run;

  const DeviceSpec* find_device(int id) const {
    for (const auto& d : devices)
      if (d.id == id) return &d;
    return nullptr;
  }
};

}  // namespace msmac
