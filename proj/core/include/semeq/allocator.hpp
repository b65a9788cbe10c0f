#pragma once

#include "semeq/decision.hpp"
#include "semeq/latent_world.hpp"
#include "semeq/lyapunov.hpp"
#include "semeq/phy.hpp"

#include <optional>
#include <span>
#include <vector>

namespace semeq {

/// argmin_f Z C / f + V kappa f^3 projected on [f_min, f_max]:
/// clamp((Z C / (3 kappa V))^(1/4)).
double ue_cpu_freq(double Z, double cycles, double kappa, double V, double f_min, double f_max);
/// Same closed form for the edge host, with C = sum_k C_k^RX.
double meh_cpu_freq(double Z, double cycles, double kappa, double V, double f_min, double f_max);

/// Proportional split with weights N^alpha q^beta; shares under `min_share`
/// are raised to it and the rest re-split until no share is below the floor.
std::vector<double> bandwidth_split(std::span<const Index> coeffs, std::span<const int> bits,
                                    double alpha, double beta, double total, double min_share);

/// Principal branch of the Lambert W function on [0, inf).
double lambert_w0(double x);

/// Minimizer of Z N q / R + V (B N0 / h^2)(2^(R/B) - 1) clamped to
/// [r_min, r_max]; nullopt when r_max < r_min.
std::optional<double> optimal_rate(double Z, Index coeffs, int bits, double gain, double bandwidth,
                                   double V, double n0, double r_min, double r_max);

/// Indices into the accuracy table grid.
struct Choice {
  std::size_t n_idx = 0;
  std::size_t q_idx = 0;

  friend bool operator==(const Choice&, const Choice&) = default;
};

/// Everything fixed during one slot's optimization.
struct SlotProblem {
  const RadioConfig& radio;
  const ComputeConfig& compute;
  const AccuracyTable& table;
  double V = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  /// B_min; zero or negative selects B / (10 K).
  double min_bandwidth = 0.0;

  std::size_t users() const noexcept { return radio.users.size(); }
  double effective_min_bandwidth() const noexcept;
  void validate() const;
};

/// A joint discrete assignment with its continuous sub-solutions.
struct Evaluation {
  std::vector<Choice> choice;
  SlotDecision decision;
  SlotMetrics metrics;
  std::vector<double> accuracy;
  double cost = 0.0;
  /// False when some user's rate window is empty; such users transmit at
  /// R_max and `cost` is +inf.
  bool feasible = true;
  std::vector<std::size_t> rate_infeasible_users;
};

Evaluation evaluate_assignment(const SlotProblem& problem, const QueueState& state,
                               const ChannelState& channel, std::span<const Choice> choice);

struct Selection {
  Evaluation best;
  /// Users for which no candidate was feasible; they kept their incumbent.
  std::vector<std::size_t> fallback_users;
  /// Gamma of the incumbent after each user's turn (greedy only).
  std::vector<double> cost_after_user;
  std::size_t evaluations = 0;
};

/// One pass over users in index order. User k scans N ascending then q
/// ascending with the other users frozen and keeps the first strict minimum.
Selection greedy_select(const SlotProblem& problem, const QueueState& state,
                        const ChannelState& channel, std::span<const Choice> incumbent);

inline constexpr double kExhaustiveLimit = 1e6;

/// Global minimizer over all joint assignments; throws InvalidInput when the
/// search space exceeds kExhaustiveLimit.
Selection exhaustive_select(const SlotProblem& problem, const QueueState& state,
                            const ChannelState& channel);

}  // namespace semeq
