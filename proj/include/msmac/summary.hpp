#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msmac/engine.hpp"
#include "msmac/model.hpp"
#include "msmac/schedule.hpp"

namespace msmac {

// Replication estimate: mean of per-replication means with normal-theory
// half-widths (the shipped defaults run >= 20 replications).
struct Estimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  double half_width_99 = 0.0;
  int replications = 0;
  bool reliable = true;

  double lo95() const { return mean - half_width_95; }
  double hi95() const { return mean + half_width_95; }
};

namespace detail {

constexpr double kZ95 = 1.959963985;
constexpr double kZ99 = 2.575829304;

inline Estimate make_estimate(const std::vector<double>& per_rep) {
  Estimate e;
  e.replications = static_cast<int>(per_rep.size());
  if (per_rep.empty()) {
    e.reliable = false;
    return e;
  }
  double sum = 0.0;
  for (double v : per_rep) sum += v;
  e.mean = sum / static_cast<double>(per_rep.size());
  if (per_rep.size() < 2) {
    e.reliable = false;
    return e;
  }
  double ss = 0.0;
  for (double v : per_rep) ss += (v - e.mean) * (v - e.mean);
  const double se = std::sqrt(ss / static_cast<double>(per_rep.size() - 1) /
                              static_cast<double>(per_rep.size()));
  e.half_width_95 = kZ95 * se;
  e.half_width_99 = kZ99 * se;
  return e;
}

}  // namespace detail

struct DeviceSim {
  int id = 0;
  Estimate adf;
  Estimate ad_us;
  Estimate q_coll;            // conditional collision probability
  double replacement_rate = 0.0;  // replaced / arrivals over all replications
  std::int64_t tx_total = 0;      // measured transmissions pooled over replications
};

struct SlotSim {
  Estimate idle;
  Estimate throughput;
};

struct SimReport {
  std::vector<DeviceSim> devices;
  std::vector<SlotSim> slots;  // per super-cycle slot
  Estimate idle_overall;
  Estimate frame_length_us;
  std::int64_t collision_slots_total = 0;
  std::int64_t horizon_slots = 0;
  int replications = 0;
  std::string scenario_hash;
};

// Runs `scenario.run.replications` independent replications (seed = base
// seed + index) and returns their raw counters.
inline std::vector<RawCounters> run_replications(const Scenario& sc, const GlobalSlotTable& table,
                                                 bool log_events = false) {
  std::vector<RawCounters> reps;
  const std::int64_t warmup = static_cast<std::int64_t>(
      std::llround(sc.run.warmup_fraction * static_cast<double>(sc.run.horizon_slots)));
  for (int r = 0; r < sc.run.replications; ++r) {
    RunOptions opt;
    opt.seed = sc.run.seed + static_cast<std::uint64_t>(r);
    opt.horizon_slots = sc.run.horizon_slots;
    opt.warmup_slots = warmup;
    opt.log_events = log_events;
    reps.push_back(run(sc, table, opt).counters);
  }
  return reps;
}

// Point estimates with confidence intervals from independent replications;
// the engine already discarded the warm-up window from measured counters.
inline SimReport summarize(const std::vector<RawCounters>& reps, const Scenario& sc,
                           const GlobalSlotTable& table) {
  SimReport rep;
  rep.replications = static_cast<int>(reps.size());
  rep.horizon_slots = sc.run.horizon_slots;
  if (reps.empty()) return rep;

  rep.devices.resize(sc.devices.size());
  for (std::size_t d = 0; d < sc.devices.size(); ++d) {
    auto& out = rep.devices[d];
    out.id = sc.devices[d].id;
    std::vector<double> adf, ad_us, qc;
    std::int64_t arrivals = 0, replaced = 0;
    for (const auto& r : reps) {
      const auto& c = r.devices[d];
      arrivals += c.arrivals;
      replaced += c.replaced;
      out.tx_total += c.measured_tx;
      if (c.measured_tx > 0) {
        adf.push_back(static_cast<double>(c.adf_sum) / static_cast<double>(c.measured_tx));
        ad_us.push_back(c.ad_sum_ticks / static_cast<double>(c.measured_tx) /
                        static_cast<double>(kTicksPerUs));
        qc.push_back(static_cast<double>(c.measured_collision) /
                     static_cast<double>(c.measured_tx));
      }
    }
    out.adf = detail::make_estimate(adf);
    out.ad_us = detail::make_estimate(ad_us);
    out.q_coll = detail::make_estimate(qc);
    out.replacement_rate = arrivals > 0 ? static_cast<double>(replaced) /
                                              static_cast<double>(arrivals)
                                        : 0.0;
    if (out.tx_total < 30) {
      out.adf.reliable = false;
      out.ad_us.reliable = false;
      out.q_coll.reliable = false;
    }
  }

  rep.slots.resize(static_cast<std::size_t>(table.super_cycle));
  for (std::size_t s = 0; s < rep.slots.size(); ++s) {
    std::vector<double> idle;
    for (const auto& r : reps) {
      const auto& c = r.per_cycle_slot[s];
      const std::int64_t n = c[0] + c[1];
      if (n > 0) idle.push_back(static_cast<double>(c[0]) / static_cast<double>(n));
    }
    rep.slots[s].idle = detail::make_estimate(idle);
    std::vector<double> thru;
    for (double v : idle) thru.push_back(1.0 - v);
    rep.slots[s].throughput = detail::make_estimate(thru);
  }

  std::vector<double> idle_overall, frame_us;
  for (const auto& r : reps) {
    if (r.measured_slots > 0)
      idle_overall.push_back(static_cast<double>(r.measured_idle) /
                             static_cast<double>(r.measured_slots));
    rep.collision_slots_total += r.measured_collision_slots;
    // Frame length over post-warmup super-cycles.
    const auto& fb = r.frame_boundaries;
    const std::size_t skip = static_cast<std::size_t>(
        (r.warmup_slots + table.super_cycle - 1) / table.super_cycle);
    if (fb.size() > skip) {
      const Tick t0 = skip == 0 ? 0 : fb[skip - 1];
      const double n_frames = static_cast<double>(fb.size() - skip);
      frame_us.push_back(static_cast<double>(fb.back() - t0) / n_frames /
                         static_cast<double>(kTicksPerUs));
    }
  }
  rep.idle_overall = detail::make_estimate(idle_overall);
  rep.frame_length_us = detail::make_estimate(frame_us);
  return rep;
}

}  // namespace msmac
