#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "msmac/errors.hpp"
#include "msmac/model.hpp"

namespace msmac {

// Per-slot load, indexed by mini-slot (0-based internally, mini-slot 1 first).
// lambda_norm is the dimensionless per-logical-frame arrival expectation
// lambda_i * T_f of the entry's device.
struct SlotLoad {
  struct Entry {
    int device = -1;
    double lambda_norm = 0.0;
  };
  std::vector<std::vector<Entry>> cells;

  static SlotLoad exclusive(const std::vector<double>& lambda_norm) {
    SlotLoad l;
    l.cells.resize(lambda_norm.size());
    for (std::size_t m = 0; m < lambda_norm.size(); ++m)
      if (lambda_norm[m] > 0.0) l.cells[m].push_back({static_cast<int>(m), lambda_norm[m]});
    return l;
  }

  std::size_t n_m() const { return cells.size(); }

  bool is_exclusive() const {
    for (const auto& c : cells)
      if (c.size() > 1) return false;
    return true;
  }

  double cell_rate(std::size_t m) const {
    double r = 0.0;
    for (const auto& e : cells[m]) r += e.lambda_norm;
    return r;
  }
};

// Per-mini-slot AD-F vector for one slot, plus the effective rates and
// cumulative-rate prefixes the recursion ran on.
struct AdfVector {
  std::vector<double> tau;         // average AD-F per mini-slot, >= 1
  std::vector<double> lambda_eff;  // effective rate * T_f per mini-slot (no-buffer mode)
  std::vector<double> gamma;       // cumulative rate prefix through mini-slot m
};

// Index convention for the buffered chain's combination prefactor: the
// denominator 1 - gamma_m - rate subtracts either the sensed (mini-slot m)
// device's rate or the waiting device's own rate.
enum class BufferedPrefactor { SensedRate, OwnRate };

// Which rate enters each factor of the collision-probability product: the
// partner's rate (the event is "some other sharer also holds a packet") or,
// reproducing the printed formula, the tagged device's own rate.
enum class CollisionRateConvention { PartnerRate, OwnRate };

struct FixedPointOptions {
  double tol = 1e-9;
  int max_iter = 10000;
  double damping = 0.5;
};

// Effective per-frame arrival rate of a no-buffer device: packets are dropped
// by replacement while one waits, which discounts the raw rate.
// Returns lambda' * T_f = lambda_norm / (1 + lambda_norm * (tau - 1/2)).
inline double effective_rate(double lambda_norm, double tau) {
  return lambda_norm / (1.0 + lambda_norm * (tau - 0.5));
}

namespace detail {

// Core AD-F step shared by every variant: given the previous mini-slot's
// AD-F tau, its rate a (already effective where applicable) and the
// cumulative prefix g, returns the next mini-slot's pre-combination AD-F.
inline double adf_step(double tau, double a, double g, const std::string& ctx) {
  const double denom = 1.0 - g - a;
  if (denom <= 0.0)
    throw OverloadError(ctx + ": recursion denominator 1-gamma-rate = " + std::to_string(denom) +
                        " is not positive");
  const double num = -0.5 * (1.0 - g) * a * tau * tau + (1.0 - g + a) * tau - 0.5 * a * (1.0 + g);
  return num / denom;
}

// Buffered AD-F of a device never blocked by earlier mini-slots.
inline double buffered_base(double lambda_norm, const std::string& ctx) {
  const double denom = 2.0 * (2.0 - lambda_norm);
  if (denom <= 0.0) throw OverloadError(ctx + ": buffered base case needs lambda*T_f < 2");
  return 1.0 + lambda_norm / denom;
}

}  // namespace detail

// AD-F recursion for an exclusively assigned slot without buffers.
// tau[0] = 1; each later mini-slot is derived from the previous one using the
// previous device's effective rate and the cumulative effective-rate prefix.
inline AdfVector adf_no_buffer(const SlotLoad& load, const std::string& ctx = "slot") {
  const std::size_t n = load.n_m();
  AdfVector out;
  out.tau.assign(n, 1.0);
  out.lambda_eff.assign(n, 0.0);
  out.gamma.assign(n, 0.0);
  double gamma = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (load.cells[m].size() > 1)
      throw std::invalid_argument(ctx + ": adf_no_buffer requires exclusive assignment");
    if (m > 0) {
      const double a_prev = out.lambda_eff[m - 1];
      out.tau[m] = detail::adf_step(out.tau[m - 1], a_prev, out.gamma[m - 1],
                                    ctx + " minislot " + std::to_string(m + 1));
    }
    const double lam = load.cell_rate(m);
    out.lambda_eff[m] = lam > 0.0 ? effective_rate(lam, out.tau[m]) : 0.0;
    gamma += out.lambda_eff[m];
    out.gamma[m] = gamma;
  }
  return out;
}

// AD-F recursion for an exclusively assigned slot with buffers. Uses raw
// rates throughout (no replacement exists) and the closed-form base case at
// the first occupied mini-slot. Empty cells carry tau through unchanged; the
// combination prefactor follows `variant`.
inline AdfVector adf_buffered(const SlotLoad& load,
                              BufferedPrefactor variant = BufferedPrefactor::SensedRate,
                              const std::string& ctx = "slot") {
  const std::size_t n = load.n_m();
  AdfVector out;
  out.tau.assign(n, 1.0);
  out.gamma.assign(n, 0.0);
  double gamma = 0.0;

  bool have_prev = false;
  double prev_tau = 1.0, prev_lam = 0.0, prev_gamma = 0.0;
  double carry = 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (load.cells[m].size() > 1)
      throw std::invalid_argument(ctx + ": adf_buffered requires exclusive assignment");
    const double lam = load.cell_rate(m);
    const std::string where = ctx + " minislot " + std::to_string(m + 1);
    if (lam > 0.0) {
      if (!have_prev) {
        carry = detail::buffered_base(lam, where);
      } else {
        const double hat = detail::adf_step(prev_tau, prev_lam, prev_gamma, where);
        double denom;
        if (variant == BufferedPrefactor::SensedRate)
          denom = 1.0 - prev_gamma - prev_lam;
        else
          denom = 1.0 - prev_gamma - lam;
        if (denom <= 0.0)
          throw OverloadError(where + ": buffered prefactor denominator is not positive");
        carry = (1.0 - prev_gamma) / denom * (hat - 1.0) + 1.0;
      }
      have_prev = true;
      prev_tau = carry;
      prev_lam = lam;
      gamma += lam;
      prev_gamma = gamma;
    }
    out.tau[m] = carry;
    out.gamma[m] = gamma;
  }
  return out;
}

// Probability that no occupant of the slot transmits in it. Buffered slots
// use raw rates, no-buffer slots the effective rates from the recursion.
inline double slot_idle_probability(const SlotLoad& load, bool buffered, const AdfVector& adf,
                                    const std::string& ctx = "slot") {
  double sum = 0.0;
  for (std::size_t m = 0; m < load.n_m(); ++m)
    sum += buffered ? load.cell_rate(m) : adf.lambda_eff[m];
  const double eta = 1.0 - sum;
  if (eta < 0.0)
    throw OverloadError(ctx + ": idle probability " + std::to_string(eta) +
                        " negative; slot violates the load condition");
  return eta;
}

// Exact affine conversion from AD-F (frames) to access delay (time).
inline Tick adf_to_delay(double tau, Tick frame_ticks, Tick t_x) {
  return static_cast<Tick>(std::llround((tau - 1.0) * static_cast<double>(frame_ticks))) + t_x;
}

struct SyncFrameResult {
  double frame_ticks = 0.0;  // expected frame length
  double busy_slots = 0.0;   // expected busy slots per frame
};

// Expected frame length under SyncCS with buffers: closed form
// n_s*n_m*T_m / (1 - sum lambda*T_x), rates per tick summed over every
// (slot, occupant) of the frame.
inline SyncFrameResult synccs_frame_length_buffered(
    const std::vector<std::vector<double>>& rates_per_tick, const ProtocolParams& p) {
  double sum_rate = 0.0;
  for (const auto& slot : rates_per_tick)
    for (double r : slot) sum_rate += r;
  const double denom = 1.0 - sum_rate * static_cast<double>(p.t_x);
  if (denom <= 0.0)
    throw OverloadError("SyncCS frame length: aggregate rate * T_x = " +
                        std::to_string(sum_rate * static_cast<double>(p.t_x)) + " must be < 1");
  SyncFrameResult res;
  const double n_s = static_cast<double>(rates_per_tick.size());
  res.frame_ticks = n_s * static_cast<double>(p.sensing_span_ticks()) / denom;
  res.busy_slots = res.frame_ticks * sum_rate;
  return res;
}

// Expected frame length under SyncCS without buffers. The effective rates
// depend on the AD-F recursion, which depends on the frame length, so the
// coupled system is solved by damped fixed-point iteration.
inline std::pair<SyncFrameResult, std::vector<AdfVector>> synccs_frame_length_no_buffer(
    const std::vector<std::vector<double>>& rates_per_tick, const ProtocolParams& p,
    FixedPointOptions opts = {}) {
  const double n_s = static_cast<double>(rates_per_tick.size());
  const double idle_frame = n_s * static_cast<double>(p.sensing_span_ticks());
  double frame = idle_frame + n_s * 0.5 * static_cast<double>(p.t_x);  // mid-range start
  std::vector<AdfVector> adf;
  for (int it = 0; it < opts.max_iter; ++it) {
    adf.clear();
    double busy = 0.0;
    for (std::size_t l = 0; l < rates_per_tick.size(); ++l) {
      std::vector<double> norm(rates_per_tick[l].size());
      for (std::size_t m = 0; m < norm.size(); ++m) norm[m] = rates_per_tick[l][m] * frame;
      adf.push_back(adf_no_buffer(SlotLoad::exclusive(norm), "slot " + std::to_string(l + 1)));
      for (double le : adf.back().lambda_eff) busy += le;
    }
    const double next = idle_frame + busy * static_cast<double>(p.t_x);
    const double updated = frame + opts.damping * (next - frame);
    const double rel = std::abs(updated - frame) / std::max(1.0, frame);
    frame = updated;
    if (rel < opts.tol) {
      SyncFrameResult res;
      res.frame_ticks = frame;
      res.busy_slots = busy;
      return {res, adf};
    }
  }
  throw NonConvergenceError("SyncCS no-buffer frame length did not converge in " +
                            std::to_string(opts.max_iter) + " iterations");
}

}  // namespace msmac
