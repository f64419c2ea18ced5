#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "msmac/model.hpp"

namespace msmac {

// Expansion of the per-class assignment cycles onto the r_L-slot super-cycle.
// Global slot g (1-based) holds every device whose class-cycle slot l satisfies
// (g - 1) == (l - 1) mod r_class; the table repeats with period r_L.
struct GlobalSlotTable {
  struct Occupant {
    int minislot = 1;  // 1-based
    int device = 0;    // index into Scenario::devices
  };

  int super_cycle = 1;  // r_L
  int n_m = 1;
  // slots[s] = occupants of global slot s+1, sorted by (minislot, device id).
  std::vector<std::vector<Occupant>> slots;
  bool has_shared_cell = false;

  struct DeviceGeometry {
    int cycle = 1;      // r_class
    int class_slot = 1; // 1-based slot within the class cycle
    int minislot = 1;
  };
  std::vector<DeviceGeometry> geometry;  // by device index

  const std::vector<Occupant>& occupants_of(std::int64_t global_slot) const {
    return slots[static_cast<std::size_t>((global_slot - 1) % super_cycle)];
  }

  std::int64_t occupant_entries() const {
    std::int64_t n = 0;
    for (const auto& s : slots) n += static_cast<std::int64_t>(s.size());
    return n;
  }
};

// Deterministic and idempotent; total occupant entries are
// sum over devices of r_L / r_class.
inline GlobalSlotTable expand_schedule(const Scenario& sc) {
  const auto& p = sc.params;
  GlobalSlotTable table;
  table.super_cycle = p.r_l;
  table.n_m = p.n_m;
  table.slots.assign(static_cast<std::size_t>(p.r_l), {});
  table.geometry.resize(sc.devices.size());

  for (const auto& e : sc.assignment.entries) {
    std::size_t dev_index = sc.devices.size();
    for (std::size_t i = 0; i < sc.devices.size(); ++i)
      if (sc.devices[i].id == e.device) { dev_index = i; break; }
    if (dev_index == sc.devices.size())
      throw std::invalid_argument("assignment refers to unknown device id " + std::to_string(e.device));
    const int cycle = p.cycle_slots(sc.devices[dev_index].priority);
    table.geometry[dev_index] = {cycle, e.slot, e.minislot};
    for (int g = e.slot; g <= p.r_l; g += cycle)
      table.slots[static_cast<std::size_t>(g - 1)].push_back(
          {e.minislot, static_cast<int>(dev_index)});
  }

  for (auto& slot : table.slots) {
    std::sort(slot.begin(), slot.end(), [&](const auto& a, const auto& b) {
      if (a.minislot != b.minislot) return a.minislot < b.minislot;
      return sc.devices[a.device].id < sc.devices[b.device].id;
    });
    for (std::size_t i = 1; i < slot.size(); ++i)
      if (slot[i].minislot == slot[i - 1].minislot) table.has_shared_cell = true;
  }
  return table;
}

}  // namespace msmac
