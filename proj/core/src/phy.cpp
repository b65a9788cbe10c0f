#include "semeq/phy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace semeq {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " must be positive and finite, got " + std::to_string(v));
  }
}

}  // namespace

void RadioConfig::validate() const {
  require_positive(bandwidth, "bandwidth");
  require_positive(carrier_ghz, "carrier frequency");
  require_positive(n0(), "noise PSD");
  if (users.empty()) throw InvalidInput("radio config has no users");
  for (const UserRadio& u : users) {
    require_positive(u.distance_km, "distance");
    require_positive(u.max_power, "max power");
    require_positive(u.min_rate, "min rate");
  }
}

void ComputeConfig::validate() const {
  if (users.empty()) throw InvalidInput("compute config has no users");
  auto check_cpu = [](double kappa, double f_min, double f_max) {
    require_positive(kappa, "kappa");
    require_positive(f_min, "f_min");
    if (!(f_max > f_min) || !std::isfinite(f_max)) throw InvalidInput("f_max must exceed f_min");
  };
  for (const UserCompute& u : users) {
    check_cpu(u.kappa, u.f_min, u.f_max);
    if (u.c0 < 0.0 || u.c1 < 0.0) throw InvalidInput("cycle coefficients must be >= 0");
  }
  check_cpu(server.kappa, server.f_min, server.f_max);
  if (server.r0 < 0.0 || server.r1 < 0.0 || server.c_pred < 0.0) {
    throw InvalidInput("server cycle coefficients must be >= 0");
  }
}

double path_loss_db(double distance_km, double carrier_ghz) {
  require_positive(distance_km, "distance");
  require_positive(carrier_ghz, "carrier frequency");
  return 20.0 * std::log10(distance_km) + 20.0 * std::log10(carrier_ghz) + 92.45;
}

double path_gain(double distance_km, double carrier_ghz) {
  return std::pow(10.0, -path_loss_db(distance_km, carrier_ghz) / 10.0);
}

ChannelState sample_channel(const RadioConfig& radio, Rng& rng) {
  std::exponential_distribution<double> fading(1.0);
  ChannelState out;
  out.gain.reserve(radio.users.size());
  for (const UserRadio& u : radio.users) {
    double e = fading(rng);
    while (!(e > 0.0)) e = fading(rng);
    out.gain.push_back(e * path_gain(u.distance_km, radio.carrier_ghz));
  }
  return out;
}

double cpu_power(double kappa, double freq) { return kappa * freq * freq * freq; }

double tx_power(double bandwidth, double n0, double gain, double rate) {
  require_positive(bandwidth, "bandwidth");
  require_positive(gain, "channel gain");
  if (rate < 0.0) throw DomainError("tx_power: negative rate");
  const double p = bandwidth * n0 / gain * std::expm1(rate / bandwidth * std::numbers::ln2);
  if (!std::isfinite(p)) {
    throw DomainError("tx_power: overflow at R/B = " + std::to_string(rate / bandwidth));
  }
  return p;
}

double max_rate(double bandwidth, double power, double gain, double n0) {
  require_positive(bandwidth, "bandwidth");
  return bandwidth * std::log2(1.0 + power * gain / (bandwidth * n0));
}

double SlotMetrics::tx_latency_sum() const noexcept {
  double s = 0.0;
  for (double l : tx_latency) s += l;
  return s;
}

SlotMetrics realize(const SlotDecision& decision, const ChannelState& channel,
                    const RadioConfig& radio, const ComputeConfig& compute) {
  const std::size_t k = decision.size();
  if (channel.gain.size() != k || compute.users.size() != k) {
    throw DimensionMismatch("realize: decision, channel and compute config disagree on user count");
  }
  if (!(decision.server_freq > 0.0)) throw DomainError("realize: server frequency must be positive");
  SlotMetrics m;
  m.compute_latency.resize(k);
  m.uplink_latency.resize(k);
  m.tx_latency.resize(k);
  m.compute_power.resize(k);
  m.uplink_power.resize(k);
  double server_cycles = 0.0;
  double max_tx = 0.0;
  double user_power = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const UserDecision& d = decision.users[i];
    const UserCompute& c = compute.users[i];
    if (!(d.cpu_freq > 0.0) || !(d.rate > 0.0)) {
      throw DomainError("realize: user " + std::to_string(i) + " has zero frequency or rate");
    }
    m.compute_latency[i] = c.tx_cycles(d.coeffs) / d.cpu_freq;
    m.uplink_latency[i] = static_cast<double>(d.coeffs) * d.bits / d.rate;
    m.tx_latency[i] = m.compute_latency[i] + m.uplink_latency[i];
    m.compute_power[i] = cpu_power(c.kappa, d.cpu_freq);
    m.uplink_power[i] = tx_power(d.bandwidth, radio.n0(), channel.gain[i], d.rate);
    server_cycles += compute.server.rx_cycles(d.coeffs);
    max_tx = std::max(max_tx, m.tx_latency[i]);
    user_power += m.compute_power[i] + m.uplink_power[i];
  }
  m.server_latency = server_cycles / decision.server_freq;
  m.server_power = cpu_power(compute.server.kappa, decision.server_freq);
  m.latency = max_tx + m.server_latency;
  m.power = m.server_power + user_power;
  return m;
}

double worst_case_latency(const RadioConfig& radio, const ComputeConfig& compute,
                          Index max_coeffs, int max_bits) {
  if (radio.users.size() != compute.users.size()) {
    throw DimensionMismatch("worst_case_latency: radio and compute user counts differ");
  }
  double worst_tx = 0.0;
  double server_cycles = 0.0;
  for (std::size_t i = 0; i < compute.users.size(); ++i) {
    const UserCompute& c = compute.users[i];
    const double tx = c.tx_cycles(max_coeffs) / c.f_min +
                      static_cast<double>(max_coeffs) * max_bits / radio.users[i].min_rate;
    worst_tx = std::max(worst_tx, tx);
    server_cycles += compute.server.rx_cycles(max_coeffs);
  }
  return worst_tx + server_cycles / compute.server.f_min;
}

}  // namespace semeq
