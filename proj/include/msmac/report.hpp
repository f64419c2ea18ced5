#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "msmac/analytic.hpp"
#include "msmac/schedule.hpp"
#include "msmac/smsa.hpp"

namespace msmac {

struct AnalyticOptions {
  BufferedPrefactor prefactor = BufferedPrefactor::SensedRate;
  CollisionRateConvention collision_conv = CollisionRateConvention::PartnerRate;
  FixedPointOptions fixed_point;
};

struct DeviceAnalytics {
  int id = 0;
  double adf = 1.0;        // mean over the device's occurrence slots
  double adf_spread = 0.0; // max-min across occurrence slots
  Tick ad = 0;
  double q_coll = 0.0;
  double lambda_norm = 0.0;  // lambda * class logical frame
};

struct SlotAnalytics {
  double idle = 1.0;
  double throughput = 0.0;  // exactly 1 - idle
  bool shared = false;
};

struct AnalyticReport {
  std::vector<DeviceAnalytics> devices;  // by device index
  std::vector<SlotAnalytics> slots;      // super-cycle slots
  double super_cycle_ticks = 0.0;        // expected wall length of r_L slots
  double busy_slots = 0.0;               // expected busy slots per super-cycle
  std::array<double, 3> class_frame_ticks = {0.0, 0.0, 0.0};
  std::vector<std::string> warnings;
  std::string scenario_hash;
};

namespace detail {

// Builds one slot's load with per-device rates normalized by the device's
// class logical frame (lambda_i * r_class * mean slot length).
inline SlotLoad slot_load_for(const Scenario& sc, const GlobalSlotTable& table, int slot_index,
                              double mean_slot_ticks) {
  SlotLoad load;
  load.cells.resize(static_cast<std::size_t>(table.n_m));
  for (const auto& o : table.slots[static_cast<std::size_t>(slot_index)]) {
    const auto& dev = sc.devices[static_cast<std::size_t>(o.device)];
    const double frame =
        static_cast<double>(sc.params.cycle_slots(dev.priority)) * mean_slot_ticks;
    load.cells[static_cast<std::size_t>(o.minislot - 1)].push_back(
        {o.device, dev.lambda_per_tick * frame});
  }
  return load;
}

// Busy-event rate of one slot (normalized, per super-cycle occurrence):
// effective rates without buffers, raw rates with buffers, and
// collision-folded aggregates for shared cells.
inline double slot_busy_rate(const Scenario& sc, const SlotLoad& load, const AnalyticOptions& opt,
                             const std::string& ctx) {
  const bool buffered = sc.params.buffered;
  bool shared = !load.is_exclusive();
  double busy = 0.0;
  if (!shared) {
    if (buffered) {
      for (std::size_t m = 0; m < load.n_m(); ++m) busy += load.cell_rate(m);
    } else {
      const AdfVector adf = adf_no_buffer(load, ctx);
      for (double le : adf.lambda_eff) busy += le;
    }
  } else {
    const SmsaSolution sol =
        buffered ? smsa_solve_buffered(load, opt.fixed_point, opt.prefactor, opt.collision_conv, ctx)
                 : smsa_solve_no_buffer(load, opt.fixed_point, opt.collision_conv, ctx);
    for (double a : sol.agg_rate) busy += a;
  }
  return busy;
}

// Expected super-cycle length under SyncCS, generalized over buffering and
// SMsA: r_L * n_m * T_m plus T_x per expected busy event.
inline double synccs_super_cycle(const Scenario& sc, const GlobalSlotTable& table,
                                 const AnalyticOptions& opt) {
  const auto& p = sc.params;
  const int r_l = p.r_l;
  if (p.buffered && !table.has_shared_cell) {
    std::vector<std::vector<double>> rates(static_cast<std::size_t>(r_l));
    for (int g = 0; g < r_l; ++g)
      for (const auto& o : table.slots[static_cast<std::size_t>(g)]) {
        const auto& dev = sc.devices[static_cast<std::size_t>(o.device)];
        const double scale = static_cast<double>(p.cycle_slots(dev.priority)) / r_l;
        rates[static_cast<std::size_t>(g)].push_back(dev.lambda_per_tick * scale);
      }
    return synccs_frame_length_buffered(rates, p).frame_ticks;
  }
  const double idle_cycle = static_cast<double>(r_l) * static_cast<double>(p.sensing_span_ticks());
  double cycle = idle_cycle + static_cast<double>(r_l) * 0.5 * static_cast<double>(p.t_x);
  for (int it = 0; it < opt.fixed_point.max_iter; ++it) {
    double busy = 0.0;
    for (int g = 0; g < r_l; ++g) {
      const SlotLoad load = slot_load_for(sc, table, g, cycle / r_l);
      busy += slot_busy_rate(sc, load, opt, "slot " + std::to_string(g + 1));
    }
    const double next = idle_cycle + busy * static_cast<double>(p.t_x);
    const double updated = cycle + opt.fixed_point.damping * (next - cycle);
    const double rel = std::abs(updated - cycle) / std::max(1.0, cycle);
    cycle = updated;
    if (rel < opt.fixed_point.tol) return cycle;
  }
  throw NonConvergenceError("SyncCS expected frame length did not converge");
}

}  // namespace detail

// Full analytic pass over a validated scenario: dispatches each super-cycle
// slot to the matching recursion/solver, substituting the SyncCS expected
// frame length into every normalization when SyncCS is on.
inline AnalyticReport analytic_report(const Scenario& sc, const GlobalSlotTable& table,
                                      const AnalyticOptions& opt = {}) {
  const auto& p = sc.params;
  AnalyticReport rep;
  rep.slots.resize(static_cast<std::size_t>(table.super_cycle));

  rep.super_cycle_ticks = p.synccs ? detail::synccs_super_cycle(sc, table, opt)
                                   : static_cast<double>(p.r_l) * static_cast<double>(p.slot_ticks());
  const double mean_slot = rep.super_cycle_ticks / static_cast<double>(p.r_l);
  for (int c = 0; c < 3; ++c)
    rep.class_frame_ticks[static_cast<std::size_t>(c)] =
        static_cast<double>(p.cycle_slots(static_cast<Priority>(c))) * mean_slot;

  struct Accum {
    double tau_sum = 0.0, tau_min = 0.0, tau_max = 0.0, q_sum = 0.0;
    int slots = 0;
  };
  std::vector<Accum> acc(sc.devices.size());

  double busy_total = 0.0;
  for (int g = 0; g < table.super_cycle; ++g) {
    const std::string ctx = "slot " + std::to_string(g + 1);
    const SlotLoad load = detail::slot_load_for(sc, table, g, mean_slot);
    auto& slot_out = rep.slots[static_cast<std::size_t>(g)];
    slot_out.shared = !load.is_exclusive();

    std::map<int, double> tau_dev, q_dev;
    if (!slot_out.shared) {
      const AdfVector adf = p.buffered ? adf_buffered(load, opt.prefactor, ctx)
                                       : adf_no_buffer(load, ctx);
      slot_out.idle = slot_idle_probability(load, p.buffered, adf, ctx);
      for (std::size_t m = 0; m < load.n_m(); ++m)
        for (const auto& e : load.cells[m]) {
          tau_dev[e.device] = adf.tau[m];
          q_dev[e.device] = 0.0;
        }
    } else {
      const SmsaSolution sol =
          p.buffered
              ? smsa_solve_buffered(load, opt.fixed_point, opt.prefactor, opt.collision_conv, ctx)
              : smsa_solve_no_buffer(load, opt.fixed_point, opt.collision_conv, ctx);
      slot_out.idle = sol.eta;
      tau_dev = sol.tau_dev;
      q_dev = sol.q_coll;
      for (const auto& w : sol.warnings) rep.warnings.push_back(ctx + ": " + w);
    }
    slot_out.throughput = 1.0 - slot_out.idle;
    busy_total += slot_out.throughput;

    for (const auto& [dev, tau] : tau_dev) {
      auto& a = acc[static_cast<std::size_t>(dev)];
      if (a.slots == 0) {
        a.tau_min = a.tau_max = tau;
      } else {
        a.tau_min = std::min(a.tau_min, tau);
        a.tau_max = std::max(a.tau_max, tau);
      }
      a.tau_sum += tau;
      a.q_sum += q_dev[dev];
      ++a.slots;
    }
  }
  rep.busy_slots = busy_total;

  rep.devices.resize(sc.devices.size());
  for (std::size_t i = 0; i < sc.devices.size(); ++i) {
    const auto& dev = sc.devices[i];
    auto& out = rep.devices[i];
    out.id = dev.id;
    const double frame = rep.class_frame_ticks[static_cast<std::size_t>(dev.priority)];
    out.lambda_norm = dev.lambda_per_tick * frame;
    if (acc[i].slots > 0) {
      out.adf = acc[i].tau_sum / acc[i].slots;
      out.adf_spread = acc[i].tau_max - acc[i].tau_min;
      out.q_coll = acc[i].q_sum / acc[i].slots;
      if (out.adf_spread > 1e-6 * out.adf)
        rep.warnings.push_back("device " + std::to_string(dev.id) +
                               ": AD-F differs across its occurrence slots (spread " +
                               std::to_string(out.adf_spread) + ")");
      out.ad = adf_to_delay(out.adf, static_cast<Tick>(std::llround(frame)), p.t_x);
    }
  }
  return rep;
}

}  // namespace msmac
