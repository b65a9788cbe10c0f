#pragma once

#include "semeq/equalize.hpp"
#include "semeq/latent_world.hpp"
#include "semeq/phy.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semeq {

/// Where a user's paired embeddings come from.
struct WorldSource {
  /// Synthetic world parameters; `params.seed` of zero means "derive from the
  /// scenario seed and the user index".
  WorldParams params;
  /// When all three are set the world is ingested from EMB1 files instead.
  std::filesystem::path tx_path;
  std::filesystem::path rx_path;
  std::filesystem::path labels_path;

  bool external() const noexcept { return !tx_path.empty(); }
};

struct UserConfig {
  WorldSource world;
  UserRadio radio;
  UserCompute compute;
  double accuracy_target = 0.7;
};

struct ScenarioConfig {
  std::vector<UserConfig> users;
  double bandwidth = 5e5;
  double carrier_ghz = 3.5;
  double temperature = 290.0;
  double noise_psd = 0.0;
  ServerCompute server;

  std::vector<Index> coeffs{32, 64, 96, 128, 192, 384, 512};
  std::vector<int> bits{2, 4, 6, 8, 12, 16, 32};
  EqualizerMethod method = EqualizerMethod::pfe;
  AnchorSpec anchors;

  double latency_target = 0.04;
  double V = 1.0;
  double eps_z = 1.0;
  double eps_q = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double min_bandwidth = 0.0;

  std::int64_t slots = 7500;
  std::uint64_t seed = 1;
  /// Slots whose decision is replaced by the worst-latency admissible one.
  std::vector<std::int64_t> worst_case_slots;
  /// Trailing window for the summary power average.
  std::int64_t power_window = 1000;
  /// Precomputed accuracy table (CSV); built from the worlds when empty.
  std::filesystem::path accuracy_table;

  std::size_t user_count() const noexcept { return users.size(); }
  RadioConfig radio() const;
  ComputeConfig compute() const;
  std::vector<double> accuracy_targets() const;
  /// Parameters of user k's synthetic world with the seed resolved.
  WorldParams world_params(std::size_t user) const;
  void validate() const;
};

/// The built-in three-user scenario.
ScenarioConfig default_scenario();

/// Keys missing from the document keep their default_scenario() values.
/// Unknown keys are rejected.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ScenarioConfig& config);
void save_config(const std::filesystem::path& path, const ScenarioConfig& config);

}  // namespace semeq
