#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "msmac/errors.hpp"
#include "msmac/model.hpp"

namespace msmac {

struct OracleResult {
  std::vector<double> adf;  // by device index, exact stationary mean over transmitted packets
  double idle_probability = 1.0;
  std::size_t state_count = 0;
};

namespace detail {

// Dense Gaussian elimination with partial pivoting; a is row-major n x n.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-14)
      throw std::runtime_error("oracle linear system is singular");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

}  // namespace detail

// Exact per-frame Markov chain for tiny Bernoulli scenarios: at most three
// devices sharing one slot exclusively, no SyncCS. Queue state is a single
// waiting flag (no buffer) or a FIFO depth capped at 4 (buffered; a reachable
// transition past the cap raises StateSpaceOverflow). Yields the exact
// stationary slot idle probability and, via tagged-packet absorption
// systems, the exact mean AD-F under the simulator's occurrence-counting
// definition.
inline OracleResult brute_force_oracle(const Scenario& sc) {
  const auto& params = sc.params;
  const std::size_t n_dev = sc.devices.size();
  if (n_dev == 0 || n_dev > 3)
    throw std::invalid_argument("oracle supports 1..3 devices");
  if (params.synccs) throw std::invalid_argument("oracle requires SyncCS off");
  if (!(params.r_h == params.r_r && params.r_r == params.r_l))
    throw std::invalid_argument("oracle requires uniform assignment cycles");

  std::vector<double> p(n_dev);  // per-frame arrival probability
  std::vector<int> minislot(n_dev, 0);
  int common_slot = -1;
  for (std::size_t i = 0; i < n_dev; ++i) {
    const auto* be = std::get_if<BernoulliPerFrameTraffic>(&sc.devices[i].traffic);
    if (!be) throw std::invalid_argument("oracle requires Bernoulli-per-frame traffic");
    p[i] = be->p;
  }
  for (const auto& e : sc.assignment.entries) {
    std::size_t idx = 0;
    while (idx < n_dev && sc.devices[idx].id != e.device) ++idx;
    if (idx == n_dev) throw std::invalid_argument("assignment names unknown device");
    minislot[idx] = e.minislot;
    if (common_slot < 0) common_slot = e.slot;
    if (e.slot != common_slot)
      throw std::invalid_argument("oracle requires all devices in one slot");
  }
  for (std::size_t i = 0; i < n_dev; ++i)
    for (std::size_t j = i + 1; j < n_dev; ++j)
      if (minislot[i] == minislot[j])
        throw std::invalid_argument("oracle requires exclusive mini-slot assignment");

  const int cap = params.buffered ? 4 : 1;
  using State = std::vector<int>;

  const auto transmitter = [&](const State& q) {
    int t = -1;
    for (std::size_t i = 0; i < n_dev; ++i)
      if (q[i] > 0 && (t < 0 || minislot[i] < minislot[static_cast<std::size_t>(t)]))
        t = static_cast<int>(i);
    return t;
  };
  // One frame forward: serve the transmitter, then apply the arrival mask.
  const auto step = [&](State q, int served, unsigned mask) {
    if (served >= 0) {
      if (params.buffered)
        --q[static_cast<std::size_t>(served)];
      else
        q[static_cast<std::size_t>(served)] = 0;
    }
    for (std::size_t i = 0; i < n_dev; ++i) {
      if (!(mask >> i & 1u)) continue;
      if (params.buffered) {
        if (q[i] == cap)
          throw StateSpaceOverflow("oracle queue cap " + std::to_string(cap) +
                                   " exceeded for device " + std::to_string(sc.devices[i].id));
        ++q[i];
      } else {
        q[i] = 1;  // fills an empty queue or replaces the waiting packet
      }
    }
    return q;
  };
  const unsigned n_masks = 1u << n_dev;
  const auto mask_prob = [&](unsigned mask, int skip) {
    double prob = 1.0;
    for (std::size_t i = 0; i < n_dev; ++i) {
      if (static_cast<int>(i) == skip) continue;
      prob *= (mask >> i & 1u) ? p[i] : 1.0 - p[i];
    }
    return prob;
  };

  // Reachable states from the empty system.
  std::vector<State> states;
  std::map<State, std::size_t> state_id;
  states.push_back(State(n_dev, 0));
  state_id[states[0]] = 0;
  for (std::size_t head = 0; head < states.size(); ++head) {
    const State q = states[head];
    const int served = transmitter(q);
    for (unsigned mask = 0; mask < n_masks; ++mask) {
      if (mask_prob(mask, -1) == 0.0) continue;
      const State nxt = step(q, served, mask);
      if (state_id.emplace(nxt, states.size()).second) states.push_back(nxt);
    }
  }
  const std::size_t n_states = states.size();

  // Stationary distribution: (P^T - I) pi = 0 with a normalization row.
  std::vector<double> a(n_states * n_states, 0.0);
  std::vector<double> b(n_states, 0.0);
  for (std::size_t s = 0; s < n_states; ++s) {
    const int served = transmitter(states[s]);
    for (unsigned mask = 0; mask < n_masks; ++mask) {
      const double prob = mask_prob(mask, -1);
      if (prob == 0.0) continue;
      a[state_id.at(step(states[s], served, mask)) * n_states + s] += prob;
    }
    a[s * n_states + s] -= 1.0;
  }
  for (std::size_t c = 0; c < n_states; ++c) a[(n_states - 1) * n_states + c] = 1.0;
  b[n_states - 1] = 1.0;
  const std::vector<double> pi = detail::solve_linear(std::move(a), b);

  OracleResult res;
  res.state_count = n_states;
  res.idle_probability = pi[state_id.at(State(n_dev, 0))];
  res.adf.assign(n_dev, 0.0);

  for (std::size_t dev = 0; dev < n_dev; ++dev) {
    if (!params.buffered) {
      // Tagged packet held by `dev`: W = P(transmitted before replacement),
      // V = E[AD-F * transmitted], over joint states with the tag in place.
      std::vector<std::size_t> held;
      std::vector<int> held_pos(n_states, -1);
      for (std::size_t s = 0; s < n_states; ++s)
        if (states[s][dev] == 1) {
          held_pos[s] = static_cast<int>(held.size());
          held.push_back(s);
        }
      const std::size_t nh = held.size();
      std::vector<double> wmat(nh * nh, 0.0), wrhs(nh, 0.0);
      std::vector<double> vmat(nh * nh, 0.0), vrhs_w(nh, 0.0);
      for (std::size_t r = 0; r < nh; ++r) {
        const State& q = states[held[r]];
        const int served = transmitter(q);
        wmat[r * nh + r] = 1.0;
        vmat[r * nh + r] = 1.0;
        if (served == static_cast<int>(dev)) {
          wrhs[r] = 1.0;
          continue;
        }
        const double survive = 1.0 - p[dev];
        for (unsigned mask = 0; mask < n_masks; ++mask) {
          if (mask >> dev & 1u) continue;  // replacement kills the tag
          const double prob = survive * mask_prob(mask, static_cast<int>(dev));
          if (prob == 0.0) continue;
          const std::size_t k =
              static_cast<std::size_t>(held_pos[state_id.at(step(q, served, mask))]);
          wmat[r * nh + k] -= prob;
          vmat[r * nh + k] -= prob;
        }
      }
      const std::vector<double> w = detail::solve_linear(wmat, wrhs);
      std::vector<double> vrhs(nh, 0.0);
      for (std::size_t r = 0; r < nh; ++r) {
        const State& q = states[held[r]];
        const int served = transmitter(q);
        if (served == static_cast<int>(dev)) {
          vrhs[r] = 1.0;
          continue;
        }
        const double survive = 1.0 - p[dev];
        double acc = 0.0;
        for (unsigned mask = 0; mask < n_masks; ++mask) {
          if (mask >> dev & 1u) continue;
          const double prob = survive * mask_prob(mask, static_cast<int>(dev));
          if (prob == 0.0) continue;
          acc += prob * w[static_cast<std::size_t>(held_pos[state_id.at(step(q, served, mask))])];
        }
        vrhs[r] = acc;
      }
      const std::vector<double> v = detail::solve_linear(vmat, vrhs);

      // Entry: stationary state, one frame with the tagged arrival forced.
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < n_states; ++s) {
        if (pi[s] <= 0.0) continue;
        const int served = transmitter(states[s]);
        for (unsigned mask = 0; mask < n_masks; ++mask) {
          if (!(mask >> dev & 1u)) continue;
          const double prob = pi[s] * mask_prob(mask, static_cast<int>(dev));
          if (prob == 0.0) continue;
          const std::size_t k =
              static_cast<std::size_t>(held_pos[state_id.at(step(states[s], served, mask))]);
          num += prob * v[k];
          den += prob * w[k];
        }
      }
      res.adf[dev] = den > 0.0 ? num / den : 1.0;
    } else {
      // Buffered tagged packet: augmented state (other queues, tag position);
      // arrivals of the tagged device land behind the tag and cannot affect
      // it. Explored lazily from the entry states so that unreachable
      // over-cap corners cannot trip the overflow check.
      std::vector<std::size_t> other;
      for (std::size_t i = 0; i < n_dev; ++i)
        if (i != dev) other.push_back(i);
      using Aug = std::pair<std::vector<int>, int>;  // (other queues, position)
      const auto aug_transmitter = [&](const std::vector<int>& qo) {
        int t = static_cast<int>(dev);
        for (std::size_t i = 0; i < other.size(); ++i)
          if (qo[i] > 0 && minislot[other[i]] < minislot[static_cast<std::size_t>(t)])
            t = static_cast<int>(other[i]);
        return t;
      };
      const unsigned n_omask = 1u << other.size();
      const auto omask_prob = [&](unsigned mask) {
        double prob = 1.0;
        for (std::size_t i = 0; i < other.size(); ++i)
          prob *= (mask >> i & 1u) ? p[other[i]] : 1.0 - p[other[i]];
        return prob;
      };
      const auto ostep = [&](std::vector<int> qo, int served, unsigned mask) {
        for (std::size_t i = 0; i < other.size(); ++i) {
          if (static_cast<int>(other[i]) == served) --qo[i];
          if (mask >> i & 1u) {
            if (qo[i] == cap)
              throw StateSpaceOverflow("oracle queue cap exceeded for device " +
                                       std::to_string(sc.devices[other[i]].id));
            ++qo[i];
          }
        }
        return qo;
      };

      // Entry distribution over augmented states.
      std::map<Aug, double> entry;
      for (std::size_t s = 0; s < n_states; ++s) {
        if (pi[s] <= 0.0) continue;
        const State& q = states[s];
        const int served = transmitter(q);
        const int pos = q[dev] - (served == static_cast<int>(dev) ? 1 : 0) + 1;
        if (pos > cap)
          throw StateSpaceOverflow("oracle tagged position exceeds cap for device " +
                                   std::to_string(sc.devices[dev].id));
        std::vector<int> qo(other.size());
        for (std::size_t i = 0; i < other.size(); ++i) qo[i] = q[other[i]];
        for (unsigned mask = 0; mask < n_omask; ++mask) {
          const double prob = pi[s] * omask_prob(mask);
          if (prob == 0.0) continue;
          entry[{ostep(qo, served, mask), pos}] += prob;
        }
      }

      // Lazy exploration of the augmented chain.
      std::vector<Aug> augs;
      std::map<Aug, std::size_t> aug_id;
      for (const auto& [s0, prob] : entry) {
        (void)prob;
        if (aug_id.emplace(s0, augs.size()).second) augs.push_back(s0);
      }
      for (std::size_t head = 0; head < augs.size(); ++head) {
        const Aug cur = augs[head];
        const int served = aug_transmitter(cur.first);
        if (served == static_cast<int>(dev) && cur.second == 1) continue;  // absorbed
        const int pos_next = cur.second - (served == static_cast<int>(dev) ? 1 : 0);
        for (unsigned mask = 0; mask < n_omask; ++mask) {
          if (omask_prob(mask) == 0.0) continue;
          const Aug nxt{ostep(cur.first, served, mask), pos_next};
          if (aug_id.emplace(nxt, augs.size()).second) augs.push_back(nxt);
        }
      }
      const std::size_t n_aug = augs.size();
      std::vector<double> vmat(n_aug * n_aug, 0.0), vrhs(n_aug, 1.0);
      for (std::size_t r = 0; r < n_aug; ++r) {
        vmat[r * n_aug + r] = 1.0;
        const Aug& cur = augs[r];
        const int served = aug_transmitter(cur.first);
        if (served == static_cast<int>(dev) && cur.second == 1) continue;  // V = 1
        const int pos_next = cur.second - (served == static_cast<int>(dev) ? 1 : 0);
        for (unsigned mask = 0; mask < n_omask; ++mask) {
          const double prob = omask_prob(mask);
          if (prob == 0.0) continue;
          vmat[r * n_aug + aug_id.at({ostep(cur.first, served, mask), pos_next})] -= prob;
        }
      }
      const std::vector<double> v = detail::solve_linear(std::move(vmat), vrhs);
      double mean = 0.0;
      for (const auto& [s0, prob] : entry) mean += prob * v[aug_id.at(s0)];
      res.adf[dev] = mean;
    }
  }
  return res;
}

}  // namespace msmac
