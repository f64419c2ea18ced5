#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "msmac/errors.hpp"
#include "msmac/report.hpp"
#include "msmac/summary.hpp"

namespace msmac {

// Tolerance profiles are data, not code. Relative tolerances reflect that
// the closed forms are first-order approximations; the collision estimate
// carries the widest band.
struct Tolerance {
  enum class Mode { Relative, Absolute };
  Mode mode = Mode::Relative;
  double value = 0.1;
  bool mandatory = true;
};

struct ToleranceProfile {
  std::map<std::string, Tolerance> rules;

  static ToleranceProfile defaults() {
    ToleranceProfile p;
    p.rules["adf"] = {Tolerance::Mode::Relative, 0.10, true};
    // The time-domain delay inherits AD-F's band but stays informational:
    // its (adf - 1) * T_f component is sample-starved for low-rate devices.
    p.rules["ad_us"] = {Tolerance::Mode::Relative, 0.10, false};
    p.rules["collision_prob"] = {Tolerance::Mode::Relative, 0.25, true};
    p.rules["slot_idle"] = {Tolerance::Mode::Absolute, 0.02, true};
    p.rules["slot_throughput"] = {Tolerance::Mode::Absolute, 0.02, true};
    p.rules["frame_length_us"] = {Tolerance::Mode::Relative, 0.01, true};
    return p;
  }
};

struct ComparisonRow {
  std::string quantity;
  std::string where;  // "dev:<id>", "slot:<n>" or "global"
  double analytic = 0.0;
  double simulated = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool pass = true;
  bool mandatory = true;
  bool reliable = true;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  bool overall_pass = true;
  std::string scenario_hash;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += !r.pass && r.mandatory;
    return n;
  }
  std::size_t warnings() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += !r.pass && !r.mandatory;
    return n;
  }
};

namespace detail {

inline ComparisonRow make_row(const std::string& quantity, const std::string& where,
                              double analytic, const Estimate& sim, const ToleranceProfile& prof) {
  ComparisonRow row;
  row.quantity = quantity;
  row.where = where;
  row.analytic = analytic;
  row.simulated = sim.mean;
  row.ci_low = sim.lo95();
  row.ci_high = sim.hi95();
  row.reliable = sim.reliable;
  row.abs_err = std::abs(analytic - sim.mean);
  row.rel_err = analytic != 0.0 ? row.abs_err / std::abs(analytic)
                                : (row.abs_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  Tolerance tol;
  const auto it = prof.rules.find(quantity);
  if (it != prof.rules.end()) tol = it->second;
  row.mandatory = tol.mandatory;
  row.pass = tol.mode == Tolerance::Mode::Relative ? row.rel_err <= tol.value
                                                   : row.abs_err <= tol.value;
  return row;
}

}  // namespace detail

// Per-quantity verdicts of analytic predictions against simulation
// estimates; overall pass iff every mandatory quantity passes.
inline ComparisonReport compare(const AnalyticReport& analytic, const SimReport& sim,
                                const ToleranceProfile& profile = ToleranceProfile::defaults()) {
  if (!analytic.scenario_hash.empty() && !sim.scenario_hash.empty() &&
      analytic.scenario_hash != sim.scenario_hash)
    throw ScenarioMismatch("analytic report hash " + analytic.scenario_hash +
                           " != sim report hash " + sim.scenario_hash);

  ComparisonReport rep;
  rep.scenario_hash = analytic.scenario_hash;

  for (std::size_t d = 0; d < analytic.devices.size() && d < sim.devices.size(); ++d) {
    const auto& a = analytic.devices[d];
    const auto& s = sim.devices[d];
    const std::string where = "dev:" + std::to_string(a.id);
    if (s.tx_total > 0) {
      rep.rows.push_back(detail::make_row("adf", where, a.adf, s.adf, profile));
      rep.rows.push_back(detail::make_row(
          "ad_us", where, ticks_to_us(a.ad), s.ad_us, profile));
      rep.rows.push_back(detail::make_row("collision_prob", where, a.q_coll, s.q_coll, profile));
    }
  }
  for (std::size_t i = 0; i < analytic.slots.size() && i < sim.slots.size(); ++i) {
    if (sim.slots[i].idle.replications == 0) continue;
    const std::string where = "slot:" + std::to_string(i + 1);
    rep.rows.push_back(
        detail::make_row("slot_idle", where, analytic.slots[i].idle, sim.slots[i].idle, profile));
    rep.rows.push_back(detail::make_row("slot_throughput", where, analytic.slots[i].throughput,
                                        sim.slots[i].throughput, profile));
  }
  if (sim.frame_length_us.replications > 0)
    rep.rows.push_back(detail::make_row("frame_length_us", "global",
                                        analytic.super_cycle_ticks / kTicksPerUs,
                                        sim.frame_length_us, profile));

  rep.overall_pass = true;
  for (const auto& r : rep.rows)
    if (r.mandatory && !r.pass) rep.overall_pass = false;
  return rep;
}

}  // namespace msmac
