#pragma once

#include "semeq/decision.hpp"
#include "semeq/rng.hpp"
#include "semeq/types.hpp"

#include <span>
#include <vector>

namespace semeq {

inline constexpr double kBoltzmann = 1.380649e-23;

struct UserRadio {
  double distance_km = 0.1;
  double max_power = 0.15;  // W
  double min_rate = 1e4;    // bit/s
};

struct RadioConfig {
  double bandwidth = 5e5;     // total uplink band, Hz
  double carrier_ghz = 3.5;
  double temperature = 290.0; // K
  /// Noise PSD in W/Hz; zero means derive from the temperature.
  double noise_psd = 0.0;
  std::vector<UserRadio> users;

  double n0() const noexcept { return noise_psd > 0.0 ? noise_psd : kBoltzmann * temperature; }
  void validate() const;
};

/// Cycles at a UE: C_tx(N) = c0 + c1 N.
struct UserCompute {
  double kappa = 1e-28;
  double f_min = 1e8;
  double f_max = 3.5e9;
  double c0 = 2e7;
  double c1 = 2e4;

  double tx_cycles(Index coeffs) const noexcept { return c0 + c1 * static_cast<double>(coeffs); }
};

/// Cycles at the edge host per received code: r0 + r1 N + C_pred.
struct ServerCompute {
  double kappa = 1e-28;
  double f_min = 1e8;
  double f_max = 4e9;
  double r0 = 0.0;
  double r1 = 1e4;
  double c_pred = 5e6;

  double rx_cycles(Index coeffs) const noexcept {
    return r0 + r1 * static_cast<double>(coeffs) + c_pred;
  }
};

struct ComputeConfig {
  std::vector<UserCompute> users;
  ServerCompute server;

  void validate() const;
};

/// Per-user |h_k|^2 for one slot.
struct ChannelState {
  std::vector<double> gain;
};

double path_loss_db(double distance_km, double carrier_ghz);
/// 10^(-PL/10).
double path_gain(double distance_km, double carrier_ghz);

/// Rayleigh block fading: |h|^2 = Exp(1) * path gain, i.i.d. per user.
ChannelState sample_channel(const RadioConfig& radio, Rng& rng);

double cpu_power(double kappa, double freq);
/// Power that sustains rate R on band B: (B N0 / h^2)(2^(R/B) - 1).
double tx_power(double bandwidth, double n0, double gain, double rate);
/// B log2(1 + P h^2 / (B N0)).
double max_rate(double bandwidth, double power, double gain, double n0);

/// Everything realized by a decision in one slot.
struct SlotMetrics {
  std::vector<double> compute_latency;  // L^c
  std::vector<double> uplink_latency;   // L^u
  std::vector<double> tx_latency;       // L^TX = L^c + L^u
  std::vector<double> compute_power;    // p^c
  std::vector<double> uplink_power;     // p^u
  double server_latency = 0.0;          // L^r
  double server_power = 0.0;            // p^r
  double latency = 0.0;                 // max_k L^TX + L^r
  double power = 0.0;                   // p^r + sum_k (p^u + p^c)

  double tx_latency_sum() const noexcept;
};

SlotMetrics realize(const SlotDecision& decision, const ChannelState& channel,
                    const RadioConfig& radio, const ComputeConfig& compute);

/// Largest latency any admissible decision can produce: every user at
/// (N_max, q_max, f_min, R_min), server at its f_min.
double worst_case_latency(const RadioConfig& radio, const ComputeConfig& compute,
                          Index max_coeffs, int max_bits);

}  // namespace semeq
