#pragma once

#include <algorithm>
#include <vector>

#include "msmac/engine.hpp"
#include "msmac/schedule.hpp"

namespace msmac {

struct AdfSample {
  int device = -1;          // device index
  std::int64_t slot = 0;    // slot ordinal of the transmission
  Tick arrival = 0;
  std::int64_t adf = 1;     // usable occurrences in (arrival, transmission]
  Tick ad = 0;              // first usable opportunity to transmission end
  bool collision = false;
};

// Recovers per-packet AD-F and AD from an exported event log alone, without
// queue reconstruction: a packet's AD-F is the number of its device's
// occurrences whose sensing window opened strictly after the arrival, up to
// and including the transmission slot (minimum 1 when it was transmitted at
// an occurrence it could not formally use).
inline std::vector<AdfSample> measure_adf(const EventLog& log, const Scenario& sc,
                                          const GlobalSlotTable& table) {
  struct Occurrence {
    Tick window;
    Tick tx_instant;
    std::int64_t slot;
  };
  std::vector<std::vector<Occurrence>> occ(sc.devices.size());
  std::vector<AdfSample> samples;
  std::vector<int> open_sample(sc.devices.size(), -1);

  const auto& p = sc.params;
  for (const auto& e : log) {
    switch (e.kind) {
      case EventKind::SlotStart: {
        for (const auto& o : table.occupants_of(e.slot)) {
          const Tick window = e.tick + static_cast<Tick>(std::max(0, o.minislot - 2)) * p.t_m;
          const Tick tx_instant = e.tick + static_cast<Tick>(o.minislot - 1) * p.t_m;
          occ[static_cast<std::size_t>(o.device)].push_back({window, tx_instant, e.slot});
        }
        break;
      }
      case EventKind::TxStart: {
        const auto& v = occ[static_cast<std::size_t>(e.device)];
        const auto first_usable =
            std::upper_bound(v.begin(), v.end(), e.aux,
                             [](Tick a, const Occurrence& o) { return a < o.window; });
        AdfSample s;
        s.device = e.device;
        s.slot = e.slot;
        s.arrival = e.aux;
        const auto usable = static_cast<std::int64_t>(v.end() - first_usable);
        s.adf = usable > 0 ? usable : 1;
        s.ad = (e.tick + p.t_x) - (usable > 0 ? first_usable->tx_instant : e.tick);
        open_sample[static_cast<std::size_t>(e.device)] = static_cast<int>(samples.size());
        samples.push_back(s);
        break;
      }
      case EventKind::TxCollision:
      case EventKind::TxSuccess: {
        const int idx = open_sample[static_cast<std::size_t>(e.device)];
        if (idx >= 0) samples[static_cast<std::size_t>(idx)].collision =
            e.kind == EventKind::TxCollision;
        break;
      }
      default:
        break;
    }
  }
  return samples;
}

}  // namespace msmac
