#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msmac/model.hpp"
#include "msmac/schedule.hpp"

namespace msmac {

enum class Severity { Error, Warning };

struct Finding {
  Severity severity = Severity::Error;
  std::string code;
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  // Load of each super-cycle slot: sum over occupants of lambda_i * r_L * T_s.
  std::vector<double> slot_load;

  bool ok() const {
    for (const auto& f : findings)
      if (f.severity == Severity::Error) return false;
    return true;
  }
  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& f : findings) n += f.severity == Severity::Error;
    return n;
  }
  void add(Severity s, std::string code, std::string where, std::string message) {
    findings.push_back({s, std::move(code), std::move(where), std::move(message)});
  }
};

namespace detail {
inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}
}  // namespace detail

// Structural and load validation. per_device_adf, when provided (by the
// analytic pass), enables the soft per-device check tau_i <= 1 / lambda_i.
inline ValidationReport validate_scenario(const Scenario& sc,
                                          const std::vector<double>* per_device_adf = nullptr) {
  const auto& p = sc.params;
  ValidationReport rep;

  if (p.n_m < 1) rep.add(Severity::Error, "geometry", "protocol", "n_m must be >= 1");
  if (p.t_m <= 0) rep.add(Severity::Error, "geometry", "protocol", "T_m must be positive");
  if (p.t_x <= 0) rep.add(Severity::Error, "geometry", "protocol", "T_x must be positive");
  if (p.n_m >= 1 && p.t_m > 0 && p.t_x > 0 && p.sensing_span_ticks() >= p.t_x)
    rep.add(Severity::Error, "geometry", "protocol",
            "n_m*T_m (" + detail::fmt_double(ticks_to_us(p.sensing_span_ticks())) +
                "us) must be less than T_x (" + detail::fmt_double(ticks_to_us(p.t_x)) + "us)");

  if (p.r_h < 1 || p.r_r < 1 || p.r_l < 1)
    rep.add(Severity::Error, "cycles", "protocol", "cycle lengths must be >= 1");
  else {
    if (!(p.r_h <= p.r_r && p.r_r <= p.r_l))
      rep.add(Severity::Error, "cycles", "protocol", "require r_H <= r_R <= r_L");
    if (p.r_r % p.r_h != 0)
      rep.add(Severity::Error, "cycles", "protocol", "r_R must be divisible by r_H");
    if (p.r_l % p.r_r != 0)
      rep.add(Severity::Error, "cycles", "protocol", "r_L must be divisible by r_R");
  }

  if (!(sc.qos.delta[0] < sc.qos.delta[1] && sc.qos.delta[1] < sc.qos.delta[2]))
    rep.add(Severity::Error, "qos", "qos", "require delta_H < delta_R < delta_L");
  if (!(sc.qos.rho[0] < sc.qos.rho[1] && sc.qos.rho[1] < sc.qos.rho[2]))
    rep.add(Severity::Error, "qos", "qos", "require rho_H < rho_R < rho_L");

  std::set<int> ids;
  for (const auto& d : sc.devices) {
    const std::string where = "device " + std::to_string(d.id);
    if (!ids.insert(d.id).second) rep.add(Severity::Error, "device", where, "duplicate device id");
    if (!(d.lambda_per_tick > 0))
      rep.add(Severity::Error, "device", where, "lambda must be positive");
    else if (1.0 / d.lambda_per_tick <= static_cast<double>(sc.qos.delta_for(d.priority)))
      rep.add(Severity::Warning, "rate-vs-delay", where,
              "mean inter-arrival 1/lambda does not exceed the class delay bound");
    if (const auto* b = std::get_if<BernoulliPerFrameTraffic>(&d.traffic)) {
      if (b->p < 0.0 || b->p > 1.0)
        rep.add(Severity::Error, "traffic", where, "Bernoulli p must be in [0, 1]");
    } else if (const auto* t = std::get_if<TraceTraffic>(&d.traffic)) {
      for (std::size_t i = 1; i < t->ticks.size(); ++i)
        if (t->ticks[i] <= t->ticks[i - 1]) {
          rep.add(Severity::Error, "traffic", where, "trace ticks must be strictly increasing");
          break;
        }
    } else if (const auto* dt = std::get_if<DeterministicTraffic>(&d.traffic)) {
      if (dt->period <= 0) rep.add(Severity::Error, "traffic", where, "period must be positive");
    }
  }

  // Assignment: exactly one entry per device, indices in range.
  std::map<int, int> entry_count;
  for (const auto& e : sc.assignment.entries) {
    const std::string where = "device " + std::to_string(e.device);
    const DeviceSpec* dev = sc.find_device(e.device);
    if (!dev) {
      rep.add(Severity::Error, "assignment", where, "assignment for unknown device");
      continue;
    }
    ++entry_count[e.device];
    const int cycle = p.cycle_slots(dev->priority);
    if (e.slot < 1 || e.slot > cycle)
      rep.add(Severity::Error, "assignment", where,
              "slot " + std::to_string(e.slot) + " outside class cycle 1.." + std::to_string(cycle));
    if (e.minislot < 1 || e.minislot > p.n_m)
      rep.add(Severity::Error, "assignment", where,
              "minislot " + std::to_string(e.minislot) + " outside 1.." + std::to_string(p.n_m));
  }
  for (const auto& d : sc.devices) {
    auto it = entry_count.find(d.id);
    if (it == entry_count.end())
      rep.add(Severity::Error, "assignment", "device " + std::to_string(d.id), "device has no assignment");
    else if (it->second > 1)
      rep.add(Severity::Error, "assignment", "device " + std::to_string(d.id),
              "device has multiple assignments (one mini-slot of one slot per cycle)");
  }

  if (!rep.ok()) return rep;  // expansion needs structurally sound input

  const GlobalSlotTable table = expand_schedule(sc);

  // Cell exclusivity / SMsA class rule.
  for (int g = 1; g <= table.super_cycle; ++g) {
    const auto& occ = table.slots[static_cast<std::size_t>(g - 1)];
    for (std::size_t i = 1; i < occ.size(); ++i) {
      if (occ[i].minislot != occ[i - 1].minislot) continue;
      const std::string where = "slot " + std::to_string(g) + " minislot " + std::to_string(occ[i].minislot);
      if (!p.smsa)
        rep.add(Severity::Error, "exclusivity", where,
                "mini-slot shared by devices " + std::to_string(sc.devices[occ[i - 1].device].id) +
                    " and " + std::to_string(sc.devices[occ[i].device].id) +
                    " but SMsA is disabled");
      else if (sc.devices[occ[i].device].priority != sc.devices[occ[i - 1].device].priority)
        rep.add(Severity::Error, "smsa-class", where,
                "SMsA sharing across priority classes is not allowed");
    }
  }

  // Slot load bound: expected arrivals of a slot's devices per r_L*T_s frame
  // must stay below 1.
  const double frame = static_cast<double>(p.r_l) * static_cast<double>(p.slot_ticks());
  rep.slot_load.assign(static_cast<std::size_t>(table.super_cycle), 0.0);
  for (int g = 1; g <= table.super_cycle; ++g) {
    double load = 0.0;
    for (const auto& o : table.slots[static_cast<std::size_t>(g - 1)])
      load += sc.devices[o.device].lambda_per_tick * frame;
    rep.slot_load[static_cast<std::size_t>(g - 1)] = load;
    if (load >= 1.0)
      rep.add(Severity::Error, "overload", "slot " + std::to_string(g),
              "slot load " + detail::fmt_double(load) + " violates the < 1 per-frame bound");
  }

  if (per_device_adf) {
    for (std::size_t i = 0; i < sc.devices.size() && i < per_device_adf->size(); ++i) {
      const auto& d = sc.devices[i];
      const double frame_d = static_cast<double>(p.frame_ticks(d.priority));
      const double tau_time = (*per_device_adf)[i] * frame_d;  // coarse upper proxy for the delay
      if (tau_time > 1.0 / d.lambda_per_tick)
        rep.add(Severity::Warning, "delay-vs-rate", "device " + std::to_string(d.id),
                "analytic access delay exceeds mean inter-arrival time");
    }
  }

  if (sc.run.horizon_slots <= 0)
    rep.add(Severity::Error, "run", "run", "horizon_slots must be positive");
  if (sc.run.replications < 1)
    rep.add(Severity::Error, "run", "run", "replications must be >= 1");
  if (sc.run.warmup_fraction < 0.0 || sc.run.warmup_fraction >= 1.0)
    rep.add(Severity::Error, "run", "run", "warmup_fraction must be in [0, 1)");

  return rep;
}

}  // namespace msmac
