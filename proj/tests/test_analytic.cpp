#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "msmac/analytic.hpp"

using namespace msmac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("effective rate discounts replaced packets") {
  CHECK_THAT(effective_rate(0.2, 1.0), WithinAbs(0.1818181818, 1e-9));
  CHECK(effective_rate(0.0, 5.0) == 0.0);
  CHECK_THAT(effective_rate(0.1, 3.0), WithinAbs(0.08, 1e-12));
}

TEST_CASE("effective rate never exceeds the raw rate") {
  for (double lam : {1e-6, 0.01, 0.2, 0.5, 0.9})
    for (double tau : {1.0, 1.3, 2.0, 5.0})
      CHECK(effective_rate(lam, tau) < lam);
}

TEST_CASE("no-buffer AD-F: first mini-slot transmits immediately") {
  const AdfVector adf = adf_no_buffer(SlotLoad::exclusive({0.37}));
  REQUIRE(adf.tau.size() == 1);
  CHECK(adf.tau[0] == 1.0);
}

TEST_CASE("no-buffer AD-F: two equal devices") {
  const AdfVector adf = adf_no_buffer(SlotLoad::exclusive({0.1, 0.1}));
  CHECK(adf.tau[0] == 1.0);
  CHECK_THAT(adf.tau[1], WithinAbs(1.1176470588, 1e-9));
  CHECK_THAT(adf.lambda_eff[0], WithinAbs(0.0952380952, 1e-9));
  CHECK_THAT(adf.gamma[0], WithinAbs(0.0952380952, 1e-9));
}

TEST_CASE("no-buffer AD-F: empty cells do not add blocking") {
  // The device after an empty mini-slot sees exactly the blocking of the
  // last occupied one: {0.1, _, 0.1, _} gives the same tau sequence as
  // {0.1, 0.1} stretched over the gap.
  const AdfVector adf = adf_no_buffer(SlotLoad::exclusive({0.1, 0.0, 0.1, 0.0}));
  CHECK(adf.tau[0] == 1.0);
  CHECK_THAT(adf.tau[1], WithinAbs(1.1176470588, 1e-9));  // step over the occupied cell
  CHECK(adf.tau[2] == adf.tau[1]);                        // empty step is the identity
  const AdfVector dense = adf_no_buffer(SlotLoad::exclusive({0.1, 0.1}));
  CHECK_THAT(adf.tau[2], WithinAbs(dense.tau[1], 1e-12));
}

TEST_CASE("no-buffer AD-F: saturated slot leaves the validity region") {
  CHECK_THROWS_AS(adf_no_buffer(SlotLoad::exclusive({0.99, 0.0099})), OverloadError);
}

TEST_CASE("buffered AD-F base case") {
  const AdfVector adf = adf_buffered(SlotLoad::exclusive({0.1}));
  CHECK_THAT(adf.tau[0], WithinAbs(1.0263157895, 1e-9));
}

TEST_CASE("buffered AD-F vanishes to one with the load") {
  const AdfVector adf = adf_buffered(SlotLoad::exclusive({1e-9, 1e-9, 1e-9}));
  for (double t : adf.tau) CHECK_THAT(t, WithinAbs(1.0, 1e-7));
}

TEST_CASE("buffered AD-F: two equal devices under both prefactor conventions") {
  // Equal rates make the two prefactor conventions coincide.
  const AdfVector a = adf_buffered(SlotLoad::exclusive({0.1, 0.1}), BufferedPrefactor::SensedRate);
  const AdfVector l = adf_buffered(SlotLoad::exclusive({0.1, 0.1}), BufferedPrefactor::OwnRate);
  CHECK_THAT(a.tau[1], WithinAbs(1.1742571625, 1e-9));
  CHECK_THAT(l.tau[1], WithinAbs(a.tau[1], 1e-12));
}

TEST_CASE("buffered AD-F: unequal rates distinguish the conventions") {
  const AdfVector a = adf_buffered(SlotLoad::exclusive({0.3, 0.05}), BufferedPrefactor::SensedRate);
  const AdfVector l = adf_buffered(SlotLoad::exclusive({0.3, 0.05}), BufferedPrefactor::OwnRate);
  CHECK(a.tau[1] != l.tau[1]);
  CHECK(a.tau[1] > 1.0);
  CHECK(l.tau[1] > 1.0);
}

TEST_CASE("buffered AD-F: lone device at a high mini-slot gets the base case") {
  const AdfVector adf = adf_buffered(SlotLoad::exclusive({0.0, 0.0, 0.1}));
  CHECK_THAT(adf.tau[2], WithinAbs(1.0263157895, 1e-9));
}

TEST_CASE("slot idle probability") {
  SECTION("buffered uses raw rates") {
    const SlotLoad load = SlotLoad::exclusive({0.1, 0.1});
    const AdfVector adf = adf_buffered(load);
    CHECK_THAT(slot_idle_probability(load, true, adf), WithinAbs(0.8, 1e-12));
  }
  SECTION("empty slot is always idle") {
    const SlotLoad load = SlotLoad::exclusive({});
    const AdfVector adf = adf_no_buffer(load);
    CHECK(slot_idle_probability(load, false, adf) == 1.0);
  }
  SECTION("no-buffer uses effective rates") {
    const SlotLoad load = SlotLoad::exclusive({0.2});
    const AdfVector adf = adf_no_buffer(load);
    CHECK_THAT(slot_idle_probability(load, false, adf), WithinAbs(0.8181818182, 1e-9));
  }
}

TEST_CASE("AD-F to access delay conversion") {
  CHECK(adf_to_delay(1.0, us_to_ticks(1450), us_to_ticks(100)) == us_to_ticks(100));
  // (1.117647 - 1) * 1450us + 100us = 270.588us
  CHECK(adf_to_delay(1.117647, us_to_ticks(1450), us_to_ticks(100)) == 270588);
  CHECK(adf_to_delay(2.0, us_to_ticks(1000), us_to_ticks(100)) == us_to_ticks(1100));
}

TEST_CASE("SyncCS buffered expected frame length: closed form") {
  ProtocolParams p;
  p.n_m = 5;
  p.t_m = us_to_ticks(9);
  p.t_x = us_to_ticks(100);
  // 10 slots, one device each, lambda * T_x = 0.02 per device.
  std::vector<std::vector<double>> rates(10, std::vector<double>{0.02 / 100000.0});
  const SyncFrameResult res = synccs_frame_length_buffered(rates, p);
  CHECK_THAT(res.frame_ticks, WithinRel(562500.0, 1e-12));
  CHECK_THAT(res.busy_slots, WithinRel(562500.0 * 10 * 0.02 / 100000.0, 1e-12));

  SECTION("zero traffic collapses to the sensing-only frame") {
    std::vector<std::vector<double>> none(10);
    CHECK_THAT(synccs_frame_length_buffered(none, p).frame_ticks, WithinRel(450000.0, 1e-12));
  }
  SECTION("aggregate load at the pole is an overload") {
    std::vector<std::vector<double>> hot(10, std::vector<double>{0.1 / 100000.0});
    CHECK_THROWS_AS(synccs_frame_length_buffered(hot, p), OverloadError);
  }
}

TEST_CASE("SyncCS no-buffer expected frame length: fixed point") {
  ProtocolParams p;
  p.n_m = 5;
  p.t_m = us_to_ticks(9);
  p.t_x = us_to_ticks(100);

  SECTION("zero traffic is the closed-form fixed point") {
    std::vector<std::vector<double>> none(10);
    const auto [res, adf] = synccs_frame_length_no_buffer(none, p);
    CHECK_THAT(res.frame_ticks, WithinRel(450000.0, 1e-9));
    CHECK(res.busy_slots == 0.0);
  }
  SECTION("solution satisfies the coupled equations") {
    std::vector<std::vector<double>> rates(10, std::vector<double>{2e-10});
    FixedPointOptions opts;
    const auto [res, adf] = synccs_frame_length_no_buffer(rates, p, opts);
    double busy = 0.0;
    for (const auto& v : adf)
      for (double le : v.lambda_eff) busy += le;
    const double reconstructed = 10.0 * 45000.0 + busy * 100000.0;
    CHECK_THAT(res.frame_ticks, WithinRel(reconstructed, 1e-6));
  }
  SECTION("buffered and no-buffer lengths agree as the load vanishes") {
    std::vector<std::vector<double>> tiny(10, std::vector<double>{1e-15});
    const auto [res, adf] = synccs_frame_length_no_buffer(tiny, p);
    const auto buf = synccs_frame_length_buffered(tiny, p);
    CHECK_THAT(res.frame_ticks, WithinRel(buf.frame_ticks, 1e-9));
  }
}

TEST_CASE("monotonicity and limits over random feasible loads") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_m = 2 + static_cast<int>(unit(rng) * 8);
    std::vector<double> lam(static_cast<std::size_t>(n_m), 0.0);
    double budget = 0.85 * unit(rng);
    for (auto& l : lam) {
      l = budget * unit(rng) / n_m;
      budget -= l;
    }
    const SlotLoad load = SlotLoad::exclusive(lam);
    const AdfVector nb = adf_no_buffer(load);
    const AdfVector bf = adf_buffered(load);
    for (std::size_t m = 1; m < nb.tau.size(); ++m) {
      CHECK(nb.tau[m] >= nb.tau[m - 1] - 1e-12);
      CHECK(bf.tau[m] >= bf.tau[m - 1] - 1e-12);
    }
    for (std::size_t m = 0; m < lam.size(); ++m)
      if (lam[m] > 0.0) CHECK(nb.lambda_eff[m] < lam[m]);
  }
}
