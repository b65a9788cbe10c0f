#pragma once

#include "semeq/allocator.hpp"
#include "semeq/config.hpp"
#include "semeq/latent_world.hpp"
#include "semeq/lyapunov.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace semeq {

/// A config with everything resolved: radio/compute views and the accuracy table.
struct Scenario {
  ScenarioConfig config;
  RadioConfig radio;
  ComputeConfig compute;
  AccuracyTable table;

  SlotProblem problem() const;
  QueueState initial_queues() const;
  /// Worst admissible latency over the grid, the L_max inside xi.
  double max_latency() const;
  double xi() const;
};

struct WorldBundle {
  std::vector<LatentWorld> worlds;
  std::vector<CentroidDecoder> decoders;
};

/// One world and one RX decoder per user, generated or ingested.
WorldBundle build_worlds(const ScenarioConfig& config);
AccuracyTable build_scenario_table(const ScenarioConfig& config);

/// Loads `config.accuracy_table` when set, otherwise builds the table.
Scenario prepare_scenario(ScenarioConfig config);
Scenario prepare_scenario(ScenarioConfig config, AccuracyTable table);

struct TraceSummary {
  std::int64_t slots = 0;
  double mean_latency = 0.0;
  std::vector<double> mean_accuracy;
  double mean_power = 0.0;
  /// Mean power over the last `power_window` slots.
  double window_power = 0.0;
  std::vector<double> mean_bitload;  // per user mean N q
  double final_Z = 0.0;
  std::vector<double> final_Q;
  /// Targets no decision sequence can meet (checked before the run).
  bool constraint_infeasible = false;
  std::vector<std::string> infeasibility;
  /// Time averages at the end of the run within 2% of the targets.
  bool constraints_met = false;
  std::int64_t fallback_slots = 0;
};

struct Trace {
  std::vector<SlotRecord> records;
  TraceSummary summary;
};

/// Slot loop: channel, decision from the current queues, realization,
/// queue update. Deterministic in `config.seed`.
Trace run_simulation(const Scenario& scenario);

TraceSummary summarize(std::span<const SlotRecord> records, const Scenario& scenario);

/// Every user at (N_max, q_max, f_min, R_min) and the server at its f_min.
SlotDecision worst_case_decision(const Scenario& scenario, const ChannelState& channel);

struct BoundReport {
  std::int64_t slots = 0;
  std::int64_t violations = 0;
  std::int64_t first_violation = -1;
  double max_excess = 0.0;  // max(lhs - rhs)
  double xi = 0.0;
};

BoundReport verify_trace(std::span<const SlotRecord> records, double V, double xi);

struct DecisionHistogram {
  std::vector<Index> coeffs;
  std::vector<int> bits;
  std::vector<std::vector<double>> coeff_freq;  // [user][n_idx]
  std::vector<std::vector<double>> bit_freq;    // [user][q_idx]
  std::vector<double> mean_bitload;
};

DecisionHistogram decision_histogram(std::span<const SlotRecord> records,
                                     std::span<const Index> coeffs, std::span<const int> bits);
void write_histogram_csv(const std::filesystem::path& path, const DecisionHistogram& h);

struct SweepCell {
  double latency_target = 0.0;
  double accuracy_target = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  TraceSummary summary;
};

/// One run per (L-bar, G-bar) pair; G-bar applies to every user. Cell seeds
/// depend only on the grid position.
std::vector<SweepCell> sweep(const Scenario& scenario, std::span<const double> latency_targets,
                             std::span<const double> accuracy_targets);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells);

struct TuneRow {
  double V = 0.0;
  bool ok = false;
  std::string error;
  TraceSummary summary;
};

/// Coarse search over V; `best` indexes the lowest-power row that meets the
/// constraints, or -1.
struct TuneResult {
  std::vector<TuneRow> rows;
  std::ptrdiff_t best = -1;
};
TuneResult tune(const Scenario& scenario, std::span<const double> v_grid);
void write_tune_csv(const std::filesystem::path& path, const TuneResult& result);

}  // namespace semeq
