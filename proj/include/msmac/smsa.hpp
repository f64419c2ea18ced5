#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "msmac/analytic.hpp"
#include "msmac/errors.hpp"

namespace msmac {

// Solution of the shared-mini-slot coupled system for one slot. Rates are
// dimensionless lambda * T_f values throughout.
struct SmsaSolution {
  std::vector<double> tau;        // shared AD-F per mini-slot (buffered: mini-slot mean)
  std::vector<double> agg_rate;   // collision-folded aggregate rate per mini-slot
  std::vector<double> gamma;      // cumulative aggregate prefix
  std::map<int, double> tau_dev;  // per device; no-buffer: its mini-slot's value
  std::map<int, double> q_coll;   // conditional collision probability per device
  std::map<int, double> n_coll;   // expected simultaneous transmitters given the device transmits
  std::map<int, double> lambda_eff;  // per device (no-buffer mode)
  double eta = 1.0;               // slot idle probability with collision folding
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline double collision_product(const std::vector<SlotLoad::Entry>& cell, std::size_t self,
                                double tau, CollisionRateConvention conv) {
  double prod = 1.0;
  for (std::size_t j = 0; j < cell.size(); ++j) {
    if (j == self) continue;
    const double rate = conv == CollisionRateConvention::PartnerRate ? cell[j].lambda_norm
                                                                     : cell[self].lambda_norm;
    prod *= 1.0 - tau * rate;
  }
  return 1.0 - prod;
}

inline double expected_colliders(const std::vector<SlotLoad::Entry>& cell, std::size_t self,
                                 double tau) {
  double n = 1.0;
  for (std::size_t j = 0; j < cell.size(); ++j)
    if (j != self) n += tau * cell[j].lambda_norm;
  return n;
}

inline void check_dominant_sharer(const SlotLoad& load, SmsaSolution& sol) {
  double cumulative = 0.0;
  for (std::size_t m = 0; m < load.n_m(); ++m) {
    cumulative += load.cell_rate(m);
    if (load.cells[m].size() < 2) continue;
    for (const auto& e : load.cells[m])
      if (e.lambda_norm > 0.1 * cumulative)
        sol.warnings.push_back("device " + std::to_string(e.device) + " at minislot " +
                               std::to_string(m + 1) +
                               " dominates the cumulative slot rate; equal-AD-F "
                               "approximation may be inaccurate");
  }
}

}  // namespace detail

// Shared-mini-slot AD-F and collision probabilities without buffers.
// Fixed point over {tau via the aggregated recursion, effective rates,
// conditional collision probability q^c, expected colliders n^c}; the
// aggregate rate folds collisions by counting simultaneous packets once.
inline SmsaSolution smsa_solve_no_buffer(const SlotLoad& load, FixedPointOptions opts = {},
                                         CollisionRateConvention conv = CollisionRateConvention::PartnerRate,
                                         const std::string& ctx = "slot") {
  const std::size_t n = load.n_m();
  SmsaSolution sol;
  sol.tau.assign(n, 1.0);
  sol.agg_rate.assign(n, 0.0);
  sol.gamma.assign(n, 0.0);
  for (const auto& cell : load.cells)
    for (const auto& e : cell) {
      sol.q_coll[e.device] = 0.0;
      sol.n_coll[e.device] = 1.0;
    }

  for (int it = 1; it <= opts.max_iter; ++it) {
    double residual = 0.0;
    // Aggregate rates from the current tau/q/n estimates.
    std::vector<double> agg(n, 0.0);
    for (std::size_t m = 0; m < n; ++m)
      for (const auto& e : load.cells[m]) {
        const double le = effective_rate(e.lambda_norm, sol.tau[m]);
        sol.lambda_eff[e.device] = le;
        agg[m] += le * (1.0 - sol.q_coll[e.device] / sol.n_coll[e.device]);
      }
    std::vector<double> gamma(n, 0.0);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      acc += agg[m];
      gamma[m] = acc;
    }
    // Recursion on the aggregated rates.
    std::vector<double> tau_new(n, 1.0);
    for (std::size_t m = 1; m < n; ++m)
      tau_new[m] = detail::adf_step(tau_new[m - 1], agg[m - 1], gamma[m - 1],
                                    ctx + " minislot " + std::to_string(m + 1));
    for (std::size_t m = 0; m < n; ++m) {
      const double updated = sol.tau[m] + opts.damping * (tau_new[m] - sol.tau[m]);
      residual = std::max(residual, std::abs(updated - sol.tau[m]));
      sol.tau[m] = updated;
      sol.agg_rate[m] = agg[m];
      sol.gamma[m] = gamma[m];
    }
    // Collision estimates from the updated tau.
    for (std::size_t m = 0; m < n; ++m) {
      const auto& cell = load.cells[m];
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const double q = detail::collision_product(cell, i, sol.tau[m], conv);
        const double nc = detail::expected_colliders(cell, i, sol.tau[m]);
        auto& qr = sol.q_coll[cell[i].device];
        auto& nr = sol.n_coll[cell[i].device];
        const double qn = qr + opts.damping * (q - qr);
        const double nn = nr + opts.damping * (nc - nr);
        residual = std::max(residual, std::max(std::abs(qn - qr), std::abs(nn - nr)));
        qr = qn;
        nr = nn;
      }
    }
    sol.iterations = it;
    sol.residual = residual;
    if (residual < opts.tol) {
      sol.converged = true;
      break;
    }
  }
  if (!sol.converged)
    throw NonConvergenceError(ctx + ": SMsA no-buffer fixed point did not converge (residual " +
                              std::to_string(sol.residual) + ")");

  for (std::size_t m = 0; m < n; ++m)
    for (const auto& e : load.cells[m]) sol.tau_dev[e.device] = sol.tau[m];
  double busy = 0.0;
  for (double a : sol.agg_rate) busy += a;
  sol.eta = 1.0 - busy;
  if (sol.eta < 0.0) throw OverloadError(ctx + ": SMsA idle probability negative");
  detail::check_dominant_sharer(load, sol);
  return sol;
}

// Shared-mini-slot AD-F and collision probabilities with buffers. Raw rates
// replace effective ones; the recursion runs on mini-slot mean AD-Fs and the
// per-device combination applies the selected prefactor convention.
inline SmsaSolution smsa_solve_buffered(const SlotLoad& load, FixedPointOptions opts = {},
                                        BufferedPrefactor variant = BufferedPrefactor::SensedRate,
                                        CollisionRateConvention conv = CollisionRateConvention::PartnerRate,
                                        const std::string& ctx = "slot") {
  const std::size_t n = load.n_m();
  SmsaSolution sol;
  sol.tau.assign(n, 1.0);
  sol.agg_rate.assign(n, 0.0);
  sol.gamma.assign(n, 0.0);
  for (const auto& cell : load.cells)
    for (const auto& e : cell) {
      sol.q_coll[e.device] = 0.0;
      sol.n_coll[e.device] = 1.0;
      sol.tau_dev[e.device] = 1.0;
    }

  for (int it = 1; it <= opts.max_iter; ++it) {
    double residual = 0.0;
    std::vector<double> agg(n, 0.0);
    for (std::size_t m = 0; m < n; ++m)
      for (const auto& e : load.cells[m])
        agg[m] += e.lambda_norm * (1.0 - sol.q_coll[e.device] / sol.n_coll[e.device]);
    std::vector<double> gamma(n, 0.0);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      acc += agg[m];
      gamma[m] = acc;
    }

    // Chain over occupied mini-slots; empty cells carry the mean through.
    std::vector<double> tau_mean(n, 1.0);
    std::map<int, double> tau_dev_new;
    bool have_prev = false;
    double prev_tau = 1.0, prev_agg = 0.0, prev_gamma = 0.0;
    double carry = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      const auto& cell = load.cells[m];
      const std::string where = ctx + " minislot " + std::to_string(m + 1);
      if (!cell.empty()) {
        if (!have_prev) {
          double mean = 0.0;
          for (const auto& e : cell) {
            const double t = detail::buffered_base(e.lambda_norm, where);
            tau_dev_new[e.device] = t;
            mean += t;
          }
          carry = mean / static_cast<double>(cell.size());
        } else {
          const double hat = detail::adf_step(prev_tau, prev_agg, prev_gamma, where);
          double mean = 0.0;
          for (const auto& e : cell) {
            double denom;
            if (variant == BufferedPrefactor::SensedRate)
              denom = 1.0 - prev_gamma - prev_agg;
            else
              denom = 1.0 - prev_gamma - e.lambda_norm;
            if (denom <= 0.0)
              throw OverloadError(where + ": buffered prefactor denominator is not positive");
            const double t = (1.0 - prev_gamma) / denom * (hat - 1.0) + 1.0;
            tau_dev_new[e.device] = t;
            mean += t;
          }
          carry = mean / static_cast<double>(cell.size());
        }
        have_prev = true;
        prev_tau = carry;
        prev_agg = agg[m];
        prev_gamma = gamma[m];
      }
      tau_mean[m] = carry;
    }

    for (std::size_t m = 0; m < n; ++m) {
      const double updated = sol.tau[m] + opts.damping * (tau_mean[m] - sol.tau[m]);
      residual = std::max(residual, std::abs(updated - sol.tau[m]));
      sol.tau[m] = updated;
      sol.agg_rate[m] = agg[m];
      sol.gamma[m] = gamma[m];
    }
    for (auto& [dev, t] : tau_dev_new) {
      auto& cur = sol.tau_dev[dev];
      const double updated = cur + opts.damping * (t - cur);
      residual = std::max(residual, std::abs(updated - cur));
      cur = updated;
    }
    for (std::size_t m = 0; m < n; ++m) {
      const auto& cell = load.cells[m];
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const double q = detail::collision_product(cell, i, sol.tau[m], conv);
        const double nc = detail::expected_colliders(cell, i, sol.tau[m]);
        auto& qr = sol.q_coll[cell[i].device];
        auto& nr = sol.n_coll[cell[i].device];
        const double qn = qr + opts.damping * (q - qr);
        const double nn = nr + opts.damping * (nc - nr);
        residual = std::max(residual, std::max(std::abs(qn - qr), std::abs(nn - nr)));
        qr = qn;
        nr = nn;
      }
    }
    sol.iterations = it;
    sol.residual = residual;
    if (residual < opts.tol) {
      sol.converged = true;
      break;
    }
  }
  if (!sol.converged)
    throw NonConvergenceError(ctx + ": SMsA buffered fixed point did not converge (residual " +
                              std::to_string(sol.residual) + ")");

  double busy = 0.0;
  for (double a : sol.agg_rate) busy += a;
  sol.eta = 1.0 - busy;
  if (sol.eta < 0.0) throw OverloadError(ctx + ": SMsA idle probability negative");
  detail::check_dominant_sharer(load, sol);
  return sol;
}

}  // namespace msmac
