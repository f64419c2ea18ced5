#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "msmac/model.hpp"
#include "msmac/rng.hpp"

namespace msmac {

// Nominal occurrence geometry of a device: sensing-window start of its k-th
// occurrence is first_window + k * period (full-length slots), and its
// transmission instant follows tx_offset later. Bernoulli arrivals for
// logical frame k are placed in [tx instant of occurrence k, window start of
// occurrence k+1), so a frame-k arrival is usable exactly at occurrence k+1
// and never lands inside a sensing gap where replacement could divert the
// frame semantics.
struct FrameGeometry {
  Tick period = 1;
  Tick first_window = 0;
  Tick tx_offset = 0;  // window start -> transmission instant
};

inline FrameGeometry frame_geometry(const ProtocolParams& p, int class_cycle, int class_slot,
                                    int minislot) {
  FrameGeometry g;
  g.period = static_cast<Tick>(class_cycle) * p.slot_ticks();
  g.first_window = static_cast<Tick>(class_slot - 1) * p.slot_ticks() +
                   static_cast<Tick>(std::max(0, minislot - 2)) * p.t_m;
  g.tx_offset = minislot > 1 ? p.t_m : 0;
  return g;
}

// Reproducible lazy arrival stream; ticks are strictly increasing for every
// process kind except traces, which are taken verbatim.
class ArrivalStream {
 public:
  ArrivalStream() = default;
  ArrivalStream(const TrafficProcess& process, double lambda_per_tick, FrameGeometry geom,
                std::uint64_t stream_key)
      : process_(process), lambda_(lambda_per_tick), geom_(geom), rng_(stream_key) {}

  // Next arrival tick, or -1 when the stream is exhausted (traces run out,
  // degenerate zero-rate processes never fire).
  Tick next() {
    if (const auto* po = std::get_if<PoissonTraffic>(&process_)) {
      (void)po;
      if (!(lambda_ > 0.0)) return -1;
      const double gap = rng_.next_exponential(lambda_);
      const Tick step = std::max<Tick>(1, static_cast<Tick>(std::llround(gap)));
      cursor_ += step;
      return cursor_;
    }
    if (const auto* be = std::get_if<BernoulliPerFrameTraffic>(&process_)) {
      if (!(be->p > 0.0)) return -1;
      for (;;) {
        const double draw = rng_.next_unit();
        const double phase = rng_.next_unit();
        const Tick span_start = geom_.first_window + frame_index_ * geom_.period + geom_.tx_offset;
        const Tick span = geom_.period - geom_.tx_offset;
        ++frame_index_;
        if (draw < be->p) {
          const Tick offset =
              std::min<Tick>(span - 1, static_cast<Tick>(phase * static_cast<double>(span)));
          return span_start + offset;
        }
      }
    }
    if (const auto* de = std::get_if<DeterministicTraffic>(&process_)) {
      if (de->period <= 0) return -1;
      const Tick t = de->phase + frame_index_ * de->period;
      ++frame_index_;
      return t;
    }
    const auto& tr = std::get<TraceTraffic>(process_);
    if (trace_pos_ >= tr.ticks.size()) return -1;
    return tr.ticks[trace_pos_++];
  }

 private:
  TrafficProcess process_ = PoissonTraffic{};
  double lambda_ = 0.0;
  FrameGeometry geom_;
  SplitMix64 rng_;
  Tick cursor_ = 0;
  Tick frame_index_ = 0;
  std::size_t trace_pos_ = 0;
};

// All arrival ticks strictly below `horizon_ticks`.
inline std::vector<Tick> generate_traffic(const TrafficProcess& process, double lambda_per_tick,
                                          FrameGeometry geom, std::uint64_t seed,
                                          std::uint64_t device_id, Tick horizon_ticks) {
  ArrivalStream stream(process, lambda_per_tick, geom, SplitMix64::stream_key(seed, device_id));
  std::vector<Tick> out;
  for (;;) {
    const Tick t = stream.next();
    if (t < 0 || t >= horizon_ticks) break;
    out.push_back(t);
  }
  return out;
}

}  // namespace msmac
