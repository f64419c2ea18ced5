#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "msmac/compare.hpp"
#include "msmac/report.hpp"
#include "msmac/summary.hpp"

using namespace msmac;
using test::ScenarioBuilder;
using Catch::Matchers::WithinAbs;

TEST_CASE("uncontended deterministic traffic: AD-F exactly one, zero-width CI") {
  ScenarioBuilder b(10, 9, 100);
  b.deterministic(1, 1, 1, 5 * 190000, 1000);
  b.run(1, 20000, 20);
  const auto table = expand_schedule(b.sc);
  const SimReport rep = summarize(run_replications(b.sc, table), b.sc, table);
  REQUIRE(rep.devices.size() == 1);
  CHECK(rep.devices[0].adf.mean == 1.0);
  CHECK(rep.devices[0].adf.half_width_95 == 0.0);
  CHECK(rep.devices[0].tx_total > 30);
}

TEST_CASE("confidence interval shrinks with the replication count") {
  ScenarioBuilder b(10, 9, 100);
  b.poisson(1, 1, 1, 0.2);
  b.poisson(2, 1, 2, 0.2);
  b.run(5, 5000, 20);
  const auto table = expand_schedule(b.sc);
  const SimReport r20 = summarize(run_replications(b.sc, table), b.sc, table);
  b.run(5, 5000, 5);
  const SimReport r5 = summarize(run_replications(b.sc, table), b.sc, table);
  REQUIRE(r20.devices[1].adf.half_width_95 > 0.0);
  const double ratio = r20.devices[1].adf.half_width_95 / r5.devices[1].adf.half_width_95;
  // Expected sqrt(5/20) = 0.5 up to sampling noise.
  CHECK(ratio > 0.2);
  CHECK(ratio < 0.9);
}

TEST_CASE("empty scenario produces an empty report without errors") {
  ScenarioBuilder b(10, 9, 100);
  b.run(1, 100, 2);
  const auto table = expand_schedule(b.sc);
  const SimReport rep = summarize(run_replications(b.sc, table), b.sc, table);
  CHECK(rep.devices.empty());
  CHECK(rep.idle_overall.mean == 1.0);
}

TEST_CASE("device below the sample floor is flagged unreliable") {
  ScenarioBuilder b(10, 9, 100);
  b.poisson(1, 1, 1, 1e-4);
  b.run(2, 2000, 3);
  const auto table = expand_schedule(b.sc);
  const SimReport rep = summarize(run_replications(b.sc, table), b.sc, table);
  CHECK(rep.devices[0].tx_total < 30);
  CHECK_FALSE(rep.devices[0].adf.reliable);
}

namespace {

// A comparison fixture around the canonical two-device slot.
struct ComparePair {
  Scenario sc;
  AnalyticReport analytic;
  SimReport sim;

  ComparePair() {
    ScenarioBuilder b(10, 9, 100);
    b.poisson(1, 1, 1, 0.1);
    b.poisson(2, 1, 2, 0.1);
    b.run(3, 20000, 10);
    sc = b.sc;
    const auto table = expand_schedule(sc);
    analytic = analytic_report(sc, table);
    analytic.scenario_hash = "h";
    sim = summarize(run_replications(sc, table), sc, table);
    sim.scenario_hash = "h";
  }
};

}  // namespace

TEST_CASE("compare: healthy pair passes the default profile") {
  ComparePair fx;
  const ComparisonReport rep = compare(fx.analytic, fx.sim);
  CHECK(rep.overall_pass);
  CHECK(rep.failures() == 0);
  bool saw_adf = false, saw_idle = false;
  for (const auto& r : rep.rows) {
    if (r.quantity == "adf" && r.where == "dev:2") {
      saw_adf = true;
      CHECK_THAT(r.analytic, WithinAbs(1.1176470588, 1e-9));
    }
    if (r.quantity == "slot_idle") saw_idle = true;
  }
  CHECK(saw_adf);
  CHECK(saw_idle);
}

TEST_CASE("compare: corrupted analytic value fails the verdict") {
  ComparePair fx;
  fx.analytic.devices[1].adf *= 2.0;
  const ComparisonReport rep = compare(fx.analytic, fx.sim);
  CHECK_FALSE(rep.overall_pass);
  CHECK(rep.failures() >= 1);
}

TEST_CASE("compare: error magnitudes are symmetric in report order") {
  ComparePair fx;
  const ComparisonReport rep = compare(fx.analytic, fx.sim);
  for (const auto& r : rep.rows)
    CHECK_THAT(std::abs(r.analytic - r.simulated), WithinAbs(r.abs_err, 1e-15));
}

TEST_CASE("compare: scenario hash mismatch throws") {
  ComparePair fx;
  fx.sim.scenario_hash = "other";
  CHECK_THROWS_AS(compare(fx.analytic, fx.sim), ScenarioMismatch);
}

TEST_CASE("compare: exclusive devices have zero collision probability on both sides") {
  ComparePair fx;
  const ComparisonReport rep = compare(fx.analytic, fx.sim);
  for (const auto& r : rep.rows)
    if (r.quantity == "collision_prob") {
      CHECK(r.analytic == 0.0);
      CHECK(r.simulated == 0.0);
      CHECK(r.pass);
    }
}

TEST_CASE("analytic report: throughput is exactly one minus idle") {
  ScenarioBuilder b(10, 9, 100, 2);
  b.buffered();
  b.poisson(1, 1, 1, 0.2);
  b.poisson(2, 2, 3, 0.3);
  const auto table = expand_schedule(b.sc);
  const AnalyticReport rep = analytic_report(b.sc, table);
  for (const auto& s : rep.slots) CHECK(s.throughput == 1.0 - s.idle);
  CHECK_THAT(rep.slots[0].idle, WithinAbs(0.8, 1e-12));
  CHECK_THAT(rep.slots[1].idle, WithinAbs(0.7, 1e-12));
}

TEST_CASE("analytic report: SyncCS substitutes the expected frame length") {
  ScenarioBuilder b(5, 9, 100, 10);
  b.buffered().synccs();
  // One device per slot, lambda * T_x = 0.02 each: expected frame 562.5us.
  for (int s = 1; s <= 10; ++s) {
    DeviceSpec d;
    d.id = s;
    d.priority = Priority::HP;
    d.traffic = PoissonTraffic{};
    d.lambda_per_tick = 0.02 / 100000.0;
    b.sc.devices.push_back(d);
    b.sc.assignment.entries.push_back({s, s, 1});
  }
  const auto table = expand_schedule(b.sc);
  const AnalyticReport rep = analytic_report(b.sc, table);
  CHECK_THAT(rep.super_cycle_ticks, WithinAbs(562500.0, 1e-6));
  // AD conversion uses the SyncCS frame: tau = 1 + lam/(2(2-lam)) with
  // lam = lambda * T_f^e.
  const double lam = 0.02 / 100000.0 * 562500.0;
  const double tau = 1.0 + lam / (2.0 * (2.0 - lam));
  CHECK_THAT(rep.devices[0].adf, WithinAbs(tau, 1e-9));
}
