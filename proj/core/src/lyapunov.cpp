#include "semeq/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semeq {

void QueueState::validate() const {
  if (!(eps_z > 0.0) || !(eps_q > 0.0)) throw InvalidInput("queue step sizes must be positive");
  if (!(latency_target > 0.0)) throw InvalidInput("latency target must be positive");
  if (accuracy_target.size() != Q.size()) {
    throw DimensionMismatch("accuracy targets (" + std::to_string(accuracy_target.size()) +
                            ") and queues (" + std::to_string(Q.size()) + ") differ");
  }
  if (Z < 0.0 || std::any_of(Q.begin(), Q.end(), [](double q) { return q < 0.0; })) {
    throw InvalidInput("queues must be non-negative");
  }
}

QueueState initial_queues(double latency_target, std::vector<double> accuracy_target, double eps_z,
                          double eps_q) {
  QueueState s;
  s.Q.assign(accuracy_target.size(), 0.0);
  s.eps_z = eps_z;
  s.eps_q = eps_q;
  s.latency_target = latency_target;
  s.accuracy_target = std::move(accuracy_target);
  s.validate();
  return s;
}

QueueState update_queues(const QueueState& state, double latency, std::span<const double> accuracy) {
  if (accuracy.size() != state.Q.size()) {
    throw DimensionMismatch("update_queues: expected " + std::to_string(state.Q.size()) +
                            " accuracies, got " + std::to_string(accuracy.size()));
  }
  QueueState next = state;
  next.Z = std::max(0.0, state.Z + state.eps_z * (latency - state.latency_target));
  for (std::size_t k = 0; k < state.Q.size(); ++k) {
    next.Q[k] = std::max(0.0, state.Q[k] + state.eps_q * (state.accuracy_target[k] - accuracy[k]));
  }
  return next;
}

double lyapunov_value(const QueueState& state) {
  double s = state.Z * state.Z;
  for (double q : state.Q) s += q * q;
  return 0.5 * s;
}

double dpp_cost(const QueueState& state, const SlotMetrics& metrics,
                std::span<const double> accuracy, double V) {
  const std::size_t k = state.Q.size();
  if (accuracy.size() != k || metrics.tx_latency.size() != k) {
    throw DimensionMismatch("dpp_cost: user counts differ");
  }
  double cost = V * metrics.server_power + state.Z * metrics.server_latency;
  for (std::size_t i = 0; i < k; ++i) {
    cost += state.Z * metrics.tx_latency[i] - state.Q[i] * accuracy[i] +
            V * (metrics.uplink_power[i] + metrics.compute_power[i]);
  }
  return cost;
}

double xi_constant(double eps_z, double eps_q, double max_latency, double latency_target,
                   std::span<const double> accuracy_target, std::span<const double> max_accuracy) {
  if (accuracy_target.size() != max_accuracy.size()) {
    throw DimensionMismatch("xi_constant: target and max accuracy sizes differ");
  }
  const double dl = max_latency - latency_target;
  double xi = 0.5 * eps_z * eps_z * dl * dl;
  for (std::size_t k = 0; k < accuracy_target.size(); ++k) {
    const double dg = accuracy_target[k] - max_accuracy[k];
    xi += 0.5 * eps_q * eps_q * dg * dg;
  }
  return xi;
}

double xi_constant(const QueueState& state, double max_latency) {
  const std::vector<double> ones(state.Q.size(), 1.0);
  return xi_constant(state.eps_z, state.eps_q, max_latency, state.latency_target,
                     state.accuracy_target, ones);
}

BoundCheck verify_appendix_bound(const SlotRecord& record, double V, double xi, double slack) {
  const QueueState& before = record.before;
  const QueueState expected = update_queues(before, record.metrics.latency, record.accuracy);
  const auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
  };
  bool consistent = close(record.after.Z, expected.Z) && record.after.Q.size() == expected.Q.size();
  for (std::size_t k = 0; consistent && k < expected.Q.size(); ++k) {
    consistent = close(record.after.Q[k], expected.Q[k]);
  }
  if (!consistent) {
    throw InvalidInput("verify_appendix_bound: record at t=" + std::to_string(record.t) +
                       " has queues that do not follow from its metrics");
  }

  const double penalty = V * record.metrics.power;
  BoundCheck out;
  out.lhs = lyapunov_value(record.after) - lyapunov_value(before) + penalty;
  // Linear terms carry eps; at eps = 1 this is the plain form.
  out.rhs = xi +
            before.eps_z * before.Z *
                (record.metrics.server_latency + record.metrics.tx_latency_sum() -
                 before.latency_target) +
            penalty;
  for (std::size_t k = 0; k < before.Q.size(); ++k) {
    out.rhs += before.eps_q * before.Q[k] * (before.accuracy_target[k] - record.accuracy[k]);
  }
  out.holds = out.lhs <= out.rhs + slack * std::max(1.0, std::abs(out.rhs));
  return out;
}

}  // namespace semeq
