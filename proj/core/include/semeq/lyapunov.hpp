#pragma once

#include "semeq/decision.hpp"
#include "semeq/phy.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace semeq {

/// Phi(t): latency queue Z, accuracy queues Q_k, and the constants that
/// drive their updates.
struct QueueState {
  double Z = 0.0;
  std::vector<double> Q;
  double eps_z = 1.0;
  double eps_q = 1.0;
  double latency_target = 0.04;         // L-bar, s
  std::vector<double> accuracy_target;  // G-bar_k

  std::size_t users() const noexcept { return Q.size(); }
  void validate() const;
};

/// Zero queues for K users.
QueueState initial_queues(double latency_target, std::vector<double> accuracy_target,
                          double eps_z = 1.0, double eps_q = 1.0);

/// Z <- max(0, Z + eps_z (L - L-bar)), Q_k <- max(0, Q_k + eps_q (G-bar_k - G_k)).
QueueState update_queues(const QueueState& state, double latency, std::span<const double> accuracy);

/// 1/2 (Z^2 + sum Q_k^2).
double lyapunov_value(const QueueState& state);

/// Gamma = sum_k [Z L_k^TX - Q_k G_k + V (p_u + p_c)] + V p_r + Z L_r.
double dpp_cost(const QueueState& state, const SlotMetrics& metrics,
                std::span<const double> accuracy, double V);

/// 1/2 eps_z^2 (L_max - L-bar)^2 + 1/2 sum eps_q^2 (G-bar_k - G_k^max)^2.
double xi_constant(double eps_z, double eps_q, double max_latency, double latency_target,
                   std::span<const double> accuracy_target, std::span<const double> max_accuracy);

/// xi for a queue state with G_k^max = 1.
double xi_constant(const QueueState& state, double max_latency);

struct SlotRecord {
  std::int64_t t = 0;
  ChannelState channel;
  SlotDecision decision;
  SlotMetrics metrics;
  std::vector<double> accuracy;  // G_k(t)
  double cost = 0.0;             // Gamma at the chosen decision
  QueueState before;
  QueueState after;
};

struct BoundCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Realized per-slot drift-plus-penalty bound, evaluated with the pre-update
/// queues in `record.before`. Throws InvalidInput if `record.after` is not the
/// update of `record.before` under the recorded metrics.
BoundCheck verify_appendix_bound(const SlotRecord& record, double V, double xi,
                                 double slack = 1e-9);

}  // namespace semeq
