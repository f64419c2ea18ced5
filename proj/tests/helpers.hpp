#pragma once

#include <vector>

#include "msmac/model.hpp"

namespace msmac::test {

// Uniform-cycle scenario: one slot per frame unless n_s is given, devices
// placed by (slot, minislot) with per-frame normalized rates.
struct ScenarioBuilder {
  Scenario sc;

  explicit ScenarioBuilder(int n_m = 10, double t_m_us = 9, double t_x_us = 100, int n_s = 1) {
    sc.params.n_m = n_m;
    sc.params.t_m = us_to_ticks(t_m_us);
    sc.params.t_x = us_to_ticks(t_x_us);
    sc.params.r_h = sc.params.r_r = sc.params.r_l = n_s;
    sc.run.seed = 1;
    sc.run.horizon_slots = 10000;
    sc.run.replications = 1;
    sc.run.warmup_fraction = 0.1;
  }

  ScenarioBuilder& cycles(int r_h, int r_r, int r_l) {
    sc.params.r_h = r_h;
    sc.params.r_r = r_r;
    sc.params.r_l = r_l;
    return *this;
  }
  ScenarioBuilder& synccs(bool on = true) {
    sc.params.synccs = on;
    return *this;
  }
  ScenarioBuilder& buffered(bool on = true) {
    sc.params.buffered = on;
    return *this;
  }
  ScenarioBuilder& smsa(bool on = true) {
    sc.params.smsa = on;
    return *this;
  }
  ScenarioBuilder& run(std::uint64_t seed, std::int64_t horizon, int reps = 1,
                       double warmup = 0.1) {
    sc.run = {seed, horizon, reps, warmup};
    return *this;
  }

  // Rate given as lambda * class-frame (dimensionless per-frame expectation).
  ScenarioBuilder& poisson(int id, int slot, int minislot, double lambda_norm,
                           Priority cls = Priority::HP) {
    DeviceSpec d;
    d.id = id;
    d.priority = cls;
    d.traffic = PoissonTraffic{};
    d.lambda_per_tick = lambda_norm / static_cast<double>(sc.params.frame_ticks(cls));
    sc.devices.push_back(d);
    sc.assignment.entries.push_back({id, slot, minislot});
    return *this;
  }

  ScenarioBuilder& bernoulli(int id, int slot, int minislot, double p,
                             Priority cls = Priority::HP) {
    DeviceSpec d;
    d.id = id;
    d.priority = cls;
    d.traffic = BernoulliPerFrameTraffic{p};
    d.lambda_per_tick = p / static_cast<double>(sc.params.frame_ticks(cls));
    sc.devices.push_back(d);
    sc.assignment.entries.push_back({id, slot, minislot});
    return *this;
  }

  ScenarioBuilder& trace(int id, int slot, int minislot, std::vector<Tick> ticks,
                         Priority cls = Priority::HP) {
    DeviceSpec d;
    d.id = id;
    d.priority = cls;
    d.traffic = TraceTraffic{std::move(ticks)};
    d.lambda_per_tick = 1e-12;
    sc.devices.push_back(d);
    sc.assignment.entries.push_back({id, slot, minislot});
    return *this;
  }

  ScenarioBuilder& deterministic(int id, int slot, int minislot, Tick period, Tick phase,
                                 Priority cls = Priority::HP) {
    DeviceSpec d;
    d.id = id;
    d.priority = cls;
    d.traffic = DeterministicTraffic{period, phase};
    d.lambda_per_tick = 1.0 / static_cast<double>(period);
    sc.devices.push_back(d);
    sc.assignment.entries.push_back({id, slot, minislot});
    return *this;
  }
};

}  // namespace msmac::test
