#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "msmac/model.hpp"
#include "msmac/rng.hpp"
#include "msmac/schedule.hpp"
#include "msmac/traffic.hpp"

namespace msmac {

enum class EventKind : std::uint8_t {
  SlotStart,
  Arrival,
  Replaced,
  TxStart,
  TxSuccess,
  TxCollision,
  RunEnd,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::SlotStart: return "slot";
    case EventKind::Arrival: return "arrival";
    case EventKind::Replaced: return "replaced";
    case EventKind::TxStart: return "tx_start";
    case EventKind::TxSuccess: return "success";
    case EventKind::TxCollision: return "collision";
    default: return "run_end";
  }
}

// Append-only, tick-ordered record of a run. aux carries the arrival tick of
// the packet concerned (tx/replaced events) or the super-cycle slot index
// (slot events).
struct Event {
  Tick tick = 0;
  EventKind kind = EventKind::SlotStart;
  std::int32_t device = -1;
  std::int64_t slot = 0;
  Tick aux = -1;
};

using EventLog = std::vector<Event>;

struct SlotResolution {
  std::int64_t ordinal = 0;
  Tick start = 0;
  Tick duration = 0;
  int winner_minislot = 0;  // 0 = idle
  bool collision = false;
  std::vector<int> transmitters;  // device indices
};

struct DeviceCounters {
  std::int64_t arrivals = 0;
  std::int64_t replaced = 0;
  std::int64_t tx_success = 0;
  std::int64_t tx_collision = 0;
  std::int64_t left_in_system = 0;
  // Post-warmup measurement window:
  std::int64_t measured_tx = 0;
  std::int64_t measured_success = 0;
  std::int64_t measured_collision = 0;
  std::int64_t adf_sum = 0;
  double ad_sum_ticks = 0.0;
};

struct RawCounters {
  std::vector<DeviceCounters> devices;
  std::int64_t slots_total = 0;
  std::int64_t slots_idle = 0;
  std::int64_t slots_busy = 0;
  std::int64_t collision_slots = 0;
  std::int64_t measured_slots = 0;
  std::int64_t measured_idle = 0;
  std::int64_t measured_collision_slots = 0;
  // Post-warmup idle/busy occurrence counts per super-cycle slot index.
  std::vector<std::array<std::int64_t, 2>> per_cycle_slot;
  std::vector<Tick> frame_boundaries;  // wall tick after each full super-cycle
  Tick final_tick = 0;
  std::int64_t horizon_slots = 0;
  std::int64_t warmup_slots = 0;
};

struct RunOptions {
  std::uint64_t seed = 1;
  std::int64_t horizon_slots = 0;
  std::int64_t warmup_slots = 0;
  bool log_events = false;
  // Optional per-slot observer; called after each slot is resolved.
  std::function<void(const SlotResolution&)> on_slot;
};

struct RunResult {
  RawCounters counters;
  EventLog log;
};

struct Packet {
  Tick arrival = 0;
  std::int64_t occurrences = 0;   // usable occurrences seen so far
  Tick first_opportunity = -1;    // transmission instant of the first usable occurrence
};

// Waiting packets only; an in-flight packet has already left the queue.
// No-buffer mode therefore never holds more than one entry.
using DeviceQueue = std::deque<Packet>;

struct AdmissionOutcome {
  bool replaced = false;
  Tick dropped_arrival = -1;
};

// No buffer: a waiting packet is displaced by the new arrival; a packet
// already in transmission is not (the new packet simply waits). Buffered:
// FIFO append.
inline AdmissionOutcome arrival_admission(DeviceQueue& queue, Tick arrival, bool buffered) {
  if (queue.empty() || buffered) {
    queue.push_back({arrival, 0, -1});
    return {};
  }
  AdmissionOutcome out{true, queue.front().arrival};
  queue.front() = {arrival, 0, -1};
  return out;
}

namespace detail {

struct EngineDevice {
  DeviceQueue queue;
  ArrivalStream stream;
  Tick next_arrival = -1;
};

}  // namespace detail

// Deterministic seeded simulation of the full protocol. Slots are resolved
// mini-slot by mini-slot: the lowest occupied mini-slot whose occupants hold
// a packet that arrived strictly before their sensing window transmits;
// two or more simultaneous starters collide and their packets leave the
// system. SyncCS truncates idle slots to n_m * T_m.
inline RunResult run(const Scenario& sc, const GlobalSlotTable& table, const RunOptions& opt) {
  const auto& p = sc.params;
  const Tick full_slot = p.slot_ticks();
  const Tick idle_slot = p.synccs ? p.sensing_span_ticks() : full_slot;

  RunResult result;
  RawCounters& counters = result.counters;
  counters.devices.resize(sc.devices.size());
  counters.per_cycle_slot.assign(static_cast<std::size_t>(table.super_cycle), {0, 0});
  counters.horizon_slots = opt.horizon_slots;
  counters.warmup_slots = opt.warmup_slots;

  std::vector<detail::EngineDevice> devs(sc.devices.size());
  using HeapItem = std::pair<Tick, int>;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> pending;
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const auto& spec = sc.devices[i];
    const auto& geom = table.geometry[i];
    devs[i].stream = ArrivalStream(spec.traffic, spec.lambda_per_tick,
                                   frame_geometry(p, geom.cycle, geom.class_slot, geom.minislot),
                                   SplitMix64::stream_key(opt.seed, static_cast<std::uint64_t>(spec.id)));
    devs[i].next_arrival = devs[i].stream.next();
    if (devs[i].next_arrival >= 0) pending.push({devs[i].next_arrival, static_cast<int>(i)});
  }

  std::int64_t current_slot = 0;
  const auto log = [&](Tick tick, EventKind kind, int device, Tick aux) {
    if (opt.log_events)
      result.log.push_back({tick, kind, static_cast<std::int32_t>(device), current_slot, aux});
  };

  const auto admit_until = [&](Tick bound) {
    while (!pending.empty() && pending.top().first < bound) {
      const auto [tick, dev_index] = pending.top();
      pending.pop();
      auto& dev = devs[static_cast<std::size_t>(dev_index)];
      auto& cnt = counters.devices[static_cast<std::size_t>(dev_index)];
      ++cnt.arrivals;
      log(tick, EventKind::Arrival, dev_index, -1);
      const AdmissionOutcome admitted = arrival_admission(dev.queue, tick, p.buffered);
      if (admitted.replaced) {
        log(tick, EventKind::Replaced, dev_index, admitted.dropped_arrival);
        ++cnt.replaced;
      }
      dev.next_arrival = dev.stream.next();
      if (dev.next_arrival >= 0) pending.push({dev.next_arrival, dev_index});
    }
  };

  std::vector<std::pair<int, Packet>> transmitting;
  Tick now = 0;
  for (std::int64_t g = 1; g <= opt.horizon_slots; ++g) {
    current_slot = g;
    const bool measured = g > opt.warmup_slots;
    const std::size_t cycle_index = static_cast<std::size_t>((g - 1) % table.super_cycle);
    const auto& occupants = table.slots[cycle_index];

    admit_until(now);
    log(now, EventKind::SlotStart, -1, static_cast<Tick>(cycle_index + 1));

    int winner_minislot = 0;
    Tick tx_start = 0;
    bool collision = false;
    transmitting.clear();
    std::size_t i = 0;
    while (i < occupants.size()) {
      const int m = occupants[i].minislot;
      const Tick window = now + static_cast<Tick>(std::max(0, m - 2)) * p.t_m;
      // Until the winners' packets are popped at tx_start, admissions must
      // not advance past it: a later arrival would replace a packet that is
      // already committed to transmit.
      admit_until(window);
      std::size_t j = i;
      for (; j < occupants.size() && occupants[j].minislot == m; ++j) {
        auto& dev = devs[static_cast<std::size_t>(occupants[j].device)];
        // A usable occurrence (arrival strictly before the sensing window)
        // counts toward AD-F whether or not the device ends up transmitting.
        for (auto& pkt : dev.queue) {
          if (pkt.arrival >= window) continue;
          ++pkt.occurrences;
          if (pkt.occurrences == 1)
            pkt.first_opportunity = now + static_cast<Tick>(m - 1) * p.t_m;
        }
        if (winner_minislot == 0 && !dev.queue.empty())
          transmitting.push_back({occupants[j].device, {}});
      }
      if (winner_minislot == 0 && !transmitting.empty()) {
        winner_minislot = m;
        tx_start = now + static_cast<Tick>(m - 1) * p.t_m;
        admit_until(tx_start);
        collision = transmitting.size() >= 2;
        if (collision && !table.has_shared_cell)
          throw std::logic_error("engine invariant violated: collision without SMsA at slot " +
                                 std::to_string(g));
        for (auto& [dev_index, pkt] : transmitting) {
          auto& dev = devs[static_cast<std::size_t>(dev_index)];
          pkt = dev.queue.front();
          dev.queue.pop_front();
          log(tx_start, EventKind::TxStart, dev_index, pkt.arrival);
        }
      }
      i = j;
    }

    Tick duration;
    if (winner_minislot > 0) {
      const Tick tx_end = tx_start + p.t_x;
      admit_until(tx_end);
      for (const auto& [dev_index, pkt] : transmitting) {
        auto& cnt = counters.devices[static_cast<std::size_t>(dev_index)];
        log(tx_end, collision ? EventKind::TxCollision : EventKind::TxSuccess, dev_index,
            pkt.arrival);
        if (collision)
          ++cnt.tx_collision;
        else
          ++cnt.tx_success;
        if (measured) {
          ++cnt.measured_tx;
          if (collision)
            ++cnt.measured_collision;
          else
            ++cnt.measured_success;
          cnt.adf_sum += pkt.occurrences > 0 ? pkt.occurrences : 1;
          const Tick t0 = pkt.first_opportunity >= 0 ? pkt.first_opportunity : tx_start;
          cnt.ad_sum_ticks += static_cast<double>(tx_end - t0);
        }
      }
      duration = full_slot;
      ++counters.slots_busy;
      if (collision) ++counters.collision_slots;
      if (measured) {
        ++counters.per_cycle_slot[cycle_index][1];
        if (collision) ++counters.measured_collision_slots;
      }
    } else {
      duration = idle_slot;
      ++counters.slots_idle;
      if (measured) {
        ++counters.measured_idle;
        ++counters.per_cycle_slot[cycle_index][0];
      }
    }
    ++counters.slots_total;
    if (measured) ++counters.measured_slots;

    if (opt.on_slot) {
      SlotResolution res;
      res.ordinal = g;
      res.start = now;
      res.duration = duration;
      res.winner_minislot = winner_minislot;
      res.collision = collision;
      for (const auto& [dev_index, pkt] : transmitting) res.transmitters.push_back(dev_index);
      opt.on_slot(res);
    }

    now += duration;
    if (g % table.super_cycle == 0) counters.frame_boundaries.push_back(now);
  }

  admit_until(now);
  current_slot = opt.horizon_slots;
  log(now, EventKind::RunEnd, -1, -1);
  counters.final_tick = now;

  for (std::size_t d = 0; d < devs.size(); ++d) {
    auto& cnt = counters.devices[d];
    cnt.left_in_system = static_cast<std::int64_t>(devs[d].queue.size());
    if (cnt.arrivals != cnt.tx_success + cnt.tx_collision + cnt.replaced + cnt.left_in_system)
      throw std::logic_error("engine conservation violated for device " +
                             std::to_string(sc.devices[d].id));
  }
  return result;
}

// Line-delimited export with a stable field order; byte-identical for
// identical (scenario, seed).
inline std::string export_log(const EventLog& log) {
  std::string out;
  out.reserve(log.size() * 32);
  for (const auto& e : log) {
    out += std::to_string(e.tick);
    out += ' ';
    out += to_string(e.kind);
    out += ' ';
    out += std::to_string(e.device);
    out += ' ';
    out += std::to_string(e.slot);
    out += ' ';
    out += std::to_string(e.aux);
    out += '\n';
  }
  return out;
}

}  // namespace msmac
