#include "semeq/allocator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace semeq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cpu_freq(double Z, double cycles, double kappa, double V, double f_min, double f_max) {
  if (!(kappa > 0.0)) throw InvalidInput("cpu frequency: kappa must be positive");
  if (!(f_max >= f_min)) throw InvalidInput("cpu frequency: f_max < f_min");
  const double num = Z * cycles;
  if (!(num > 0.0)) return f_min;
  if (!(V > 0.0)) return f_max;
  return std::clamp(std::pow(num / (3.0 * kappa * V), 0.25), f_min, f_max);
}

}  // namespace

double ue_cpu_freq(double Z, double cycles, double kappa, double V, double f_min, double f_max) {
  return cpu_freq(Z, cycles, kappa, V, f_min, f_max);
}

double meh_cpu_freq(double Z, double cycles, double kappa, double V, double f_min, double f_max) {
  return cpu_freq(Z, cycles, kappa, V, f_min, f_max);
}

std::vector<double> bandwidth_split(std::span<const Index> coeffs, std::span<const int> bits,
                                    double alpha, double beta, double total, double min_share) {
  const std::size_t k = coeffs.size();
  if (k == 0 || bits.size() != k) throw InvalidInput("bandwidth_split: need matching non-empty N and q");
  if (!(total > 0.0) || min_share < 0.0) throw InvalidInput("bandwidth_split: bad totals");
  if (total < static_cast<double>(k) * min_share) {
    throw Infeasible("bandwidth_split: B = " + std::to_string(total) + " < K * B_min = " +
                     std::to_string(static_cast<double>(k) * min_share));
  }
  std::vector<double> weight(k);
  for (std::size_t i = 0; i < k; ++i) {
    weight[i] = std::pow(static_cast<double>(coeffs[i]), alpha) * std::pow(static_cast<double>(bits[i]), beta);
    if (!(weight[i] > 0.0) || !std::isfinite(weight[i])) {
      throw InvalidInput("bandwidth_split: weight of user " + std::to_string(i) + " is not positive");
    }
  }
  std::vector<double> share(k, min_share);
  std::vector<bool> floored(k, false);
  for (;;) {
    double free_band = total;
    double free_weight = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (floored[i]) {
        free_band -= min_share;
      } else {
        free_weight += weight[i];
      }
    }
    if (free_weight == 0.0) break;
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (floored[i]) continue;
      share[i] = free_band * weight[i] / free_weight;
      if (share[i] < min_share) {
        floored[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
    for (std::size_t i = 0; i < k; ++i) {
      if (floored[i]) share[i] = min_share;
    }
  }
  return share;
}

double lambert_w0(double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("lambert_w0: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  double w = std::log1p(x);
  for (int it = 0; it < 50; ++it) {
    // f / e^w with f = w e^w - x, kept in this form so large x cannot overflow.
    const double r = w - x * std::exp(-w);
    const double step = r / ((w + 1.0) - (w + 2.0) * r / (2.0 * w + 2.0));
    w -= step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(w))) break;
  }
  return w;
}

std::optional<double> optimal_rate(double Z, Index coeffs, int bits, double gain, double bandwidth,
                                   double V, double n0, double r_min, double r_max) {
  if (r_max < r_min) return std::nullopt;
  if (!(gain > 0.0) || !(bandwidth > 0.0) || !(n0 > 0.0)) {
    throw InvalidInput("optimal_rate: gain, bandwidth and N0 must be positive");
  }
  const double load = Z * static_cast<double>(coeffs) * bits;
  if (!(load > 0.0)) return r_min;
  if (!(V > 0.0)) return r_max;
  const double x = std::sqrt(load * gain * std::numbers::ln2 / (V * n0)) / (2.0 * bandwidth);
  const double r = 2.0 * bandwidth / std::numbers::ln2 * lambert_w0(x);
  return std::clamp(r, r_min, r_max);
}

double SlotProblem::effective_min_bandwidth() const noexcept {
  if (min_bandwidth > 0.0) return min_bandwidth;
  return radio.bandwidth / (10.0 * static_cast<double>(users()));
}

void SlotProblem::validate() const {
  radio.validate();
  compute.validate();
  const std::size_t k = users();
  if (compute.users.size() != k || table.users() != k) {
    throw DimensionMismatch("slot problem: radio (" + std::to_string(k) + "), compute (" +
                            std::to_string(compute.users.size()) + ") and table (" +
                            std::to_string(table.users()) + ") user counts differ");
  }
  if (V < 0.0 || !std::isfinite(V)) throw InvalidInput("V must be finite and >= 0");
  if (radio.bandwidth < static_cast<double>(k) * effective_min_bandwidth()) {
    throw Infeasible("total bandwidth below K * B_min");
  }
}

Evaluation evaluate_assignment(const SlotProblem& problem, const QueueState& state,
                               const ChannelState& channel, std::span<const Choice> choice) {
  const std::size_t k = problem.users();
  if (choice.size() != k || channel.gain.size() != k || state.Q.size() != k) {
    throw DimensionMismatch("evaluate_assignment: user counts differ");
  }
  const AccuracyTable& table = problem.table;
  Evaluation e;
  e.choice.assign(choice.begin(), choice.end());
  std::vector<Index> n(k);
  std::vector<int> q(k);
  e.accuracy.resize(k);
  double rx_cycles = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    n[i] = table.coeffs().at(choice[i].n_idx);
    q[i] = table.bits().at(choice[i].q_idx);
    e.accuracy[i] = table.at_index(i, choice[i].n_idx, choice[i].q_idx);
    rx_cycles += problem.compute.server.rx_cycles(n[i]);
  }
  const std::vector<double> band = bandwidth_split(n, q, problem.alpha, problem.beta,
                                                   problem.radio.bandwidth,
                                                   problem.effective_min_bandwidth());
  const ServerCompute& server = problem.compute.server;
  e.decision.server_freq =
      meh_cpu_freq(state.Z, rx_cycles, server.kappa, problem.V, server.f_min, server.f_max);
  e.decision.users.resize(k);
  const double n0 = problem.radio.n0();
  for (std::size_t i = 0; i < k; ++i) {
    const UserCompute& cpu = problem.compute.users[i];
    const UserRadio& link = problem.radio.users[i];
    UserDecision& d = e.decision.users[i];
    d.coeffs = n[i];
    d.bits = q[i];
    d.bandwidth = band[i];
    d.cpu_freq = ue_cpu_freq(state.Z, cpu.tx_cycles(n[i]), cpu.kappa, problem.V, cpu.f_min, cpu.f_max);
    const double r_max = max_rate(band[i], link.max_power, channel.gain[i], n0);
    const std::optional<double> r =
        optimal_rate(state.Z, n[i], q[i], channel.gain[i], band[i], problem.V, n0, link.min_rate, r_max);
    if (r) {
      d.rate = *r;
    } else {
      d.rate = r_max;
      e.feasible = false;
      e.rate_infeasible_users.push_back(i);
    }
  }
  e.metrics = realize(e.decision, channel, problem.radio, problem.compute);
  e.cost = e.feasible ? dpp_cost(state, e.metrics, e.accuracy, problem.V) : kInf;
  return e;
}

Selection greedy_select(const SlotProblem& problem, const QueueState& state,
                        const ChannelState& channel, std::span<const Choice> incumbent) {
  const std::size_t k = problem.users();
  if (incumbent.size() != k) throw DimensionMismatch("greedy_select: incumbent size differs");
  const std::size_t n_count = problem.table.coeffs().size();
  const std::size_t q_count = problem.table.bits().size();
  Selection out;
  std::vector<Choice> current(incumbent.begin(), incumbent.end());
  for (std::size_t user = 0; user < k; ++user) {
    double best_cost = kInf;
    std::optional<Choice> best;
    std::vector<Choice> trial = current;
    for (std::size_t ni = 0; ni < n_count; ++ni) {
      for (std::size_t qi = 0; qi < q_count; ++qi) {
        trial[user] = {ni, qi};
        const Evaluation e = evaluate_assignment(problem, state, channel, trial);
        ++out.evaluations;
        if (e.feasible && e.cost < best_cost) {
          best_cost = e.cost;
          best = trial[user];
        }
      }
    }
    if (best) {
      current[user] = *best;
    } else {
      out.fallback_users.push_back(user);
      spdlog::warn("greedy_select: no feasible (N, q) for user {}; keeping the previous choice", user);
    }
    out.cost_after_user.push_back(best_cost);
  }
  out.best = evaluate_assignment(problem, state, channel, current);
  ++out.evaluations;
  return out;
}

Selection exhaustive_select(const SlotProblem& problem, const QueueState& state,
                            const ChannelState& channel) {
  const std::size_t k = problem.users();
  const std::size_t n_count = problem.table.coeffs().size();
  const std::size_t q_count = problem.table.bits().size();
  const std::size_t per_user = n_count * q_count;
  const double space = std::pow(static_cast<double>(per_user), static_cast<double>(k));
  if (space > kExhaustiveLimit) {
    throw InvalidInput("exhaustive_select: " + std::to_string(per_user) + "^" + std::to_string(k) +
                       " assignments exceed the limit of 1e6");
  }
  Selection out;
  std::vector<std::size_t> digit(k, 0);
  std::vector<Choice> trial(k);
  std::optional<Evaluation> best;
  // Odometer over joint assignments; the last user's digit turns fastest.
  bool done = k == 0;
  while (!done) {
    for (std::size_t i = 0; i < k; ++i) trial[i] = {digit[i] / q_count, digit[i] % q_count};
    Evaluation e = evaluate_assignment(problem, state, channel, trial);
    ++out.evaluations;
    if (e.feasible && (!best || e.cost < best->cost)) best = std::move(e);
    std::size_t pos = k;
    for (;;) {
      if (pos == 0) {
        done = true;
        break;
      }
      --pos;
      if (++digit[pos] < per_user) break;
      digit[pos] = 0;
    }
  }
  if (!best) throw Infeasible("exhaustive_select: no feasible assignment");
  out.best = std::move(*best);
  return out;
}

}  // namespace semeq
