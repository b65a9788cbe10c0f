#include "semeq/simulation.hpp"
#include "semeq/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <string>

namespace semeq {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

SlotProblem Scenario::problem() const {
  return SlotProblem{radio, compute, table, config.V, config.alpha, config.beta, config.min_bandwidth};
}

QueueState Scenario::initial_queues() const {
  return semeq::initial_queues(config.latency_target, config.accuracy_targets(), config.eps_z,
                               config.eps_q);
}

double Scenario::max_latency() const {
  return worst_case_latency(radio, compute, config.coeffs.back(), config.bits.back());
}

double Scenario::xi() const { return xi_constant(initial_queues(), max_latency()); }

WorldBundle build_worlds(const ScenarioConfig& config) {
  WorldBundle b;
  for (std::size_t k = 0; k < config.user_count(); ++k) {
    const WorldSource& src = config.users[k].world;
    if (src.external()) {
      b.worlds.push_back(ingest_embeddings(src.tx_path, src.rx_path, src.labels_path,
                                           src.params.validation_fraction,
                                           derive_seed(config.seed, Stream::split, k)));
    } else {
      b.worlds.push_back(generate_world(config.world_params(k)));
    }
    b.decoders.push_back(train_centroid_decoder(b.worlds.back()));
  }
  return b;
}

AccuracyTable build_scenario_table(const ScenarioConfig& config) {
  const WorldBundle b = build_worlds(config);
  return build_accuracy_table(b.worlds, b.decoders, config.method, config.anchors, config.coeffs,
                              config.bits);
}

Scenario prepare_scenario(ScenarioConfig config) {
  config.validate();
  AccuracyTable table = config.accuracy_table.empty() ? build_scenario_table(config)
                                                      : AccuracyTable::read_csv(config.accuracy_table);
  return prepare_scenario(std::move(config), std::move(table));
}

Scenario prepare_scenario(ScenarioConfig config, AccuracyTable table) {
  config.validate();
  if (table.users() != config.user_count() || table.coeffs() != config.coeffs ||
      table.bits() != config.bits) {
    throw DimensionMismatch("accuracy table grid does not match the scenario (users, coeffs, bits)");
  }
  Scenario s;
  s.radio = config.radio();
  s.compute = config.compute();
  s.config = std::move(config);
  s.table = std::move(table);
  s.problem().validate();
  return s;
}

SlotDecision worst_case_decision(const Scenario& scenario, const ChannelState& channel) {
  const std::size_t k = scenario.config.user_count();
  const Index n = scenario.config.coeffs.back();
  const int q = scenario.config.bits.back();
  const std::vector<Index> ns(k, n);
  const std::vector<int> qs(k, q);
  const SlotProblem problem = scenario.problem();
  const std::vector<double> band =
      bandwidth_split(ns, qs, problem.alpha, problem.beta, scenario.radio.bandwidth,
                      problem.effective_min_bandwidth());
  SlotDecision d;
  d.server_freq = scenario.compute.server.f_min;
  for (std::size_t i = 0; i < k; ++i) {
    const UserRadio& link = scenario.radio.users[i];
    const double r_max = max_rate(band[i], link.max_power, channel.gain[i], scenario.radio.n0());
    d.users.push_back({n, q, scenario.compute.users[i].f_min, band[i], std::min(link.min_rate, r_max)});
  }
  return d;
}

Trace run_simulation(const Scenario& scenario) {
  const ScenarioConfig& cfg = scenario.config;
  const SlotProblem problem = scenario.problem();
  const std::size_t k = cfg.user_count();
  const std::set<std::int64_t> forced(cfg.worst_case_slots.begin(), cfg.worst_case_slots.end());
  const std::size_t n_last = cfg.coeffs.size() - 1;
  const std::size_t q_last = cfg.bits.size() - 1;

  QueueState state = scenario.initial_queues();
  Rng channel_rng = make_rng(cfg.seed, Stream::channel);
  std::vector<Choice> incumbent(k, Choice{0, 0});
  Trace trace;
  trace.records.reserve(static_cast<std::size_t>(cfg.slots));
  std::int64_t fallback_slots = 0;

  for (std::int64_t t = 0; t < cfg.slots; ++t) {
    SlotRecord rec;
    rec.t = t;
    rec.channel = sample_channel(scenario.radio, channel_rng);
    rec.before = state;
    if (forced.contains(t)) {
      rec.decision = worst_case_decision(scenario, rec.channel);
      rec.metrics = realize(rec.decision, rec.channel, scenario.radio, scenario.compute);
      for (std::size_t i = 0; i < k; ++i) rec.accuracy.push_back(scenario.table.at_index(i, n_last, q_last));
    } else {
      Selection sel = greedy_select(problem, state, rec.channel, incumbent);
      if (!sel.fallback_users.empty() || !sel.best.feasible) ++fallback_slots;
      incumbent = sel.best.choice;
      rec.decision = std::move(sel.best.decision);
      rec.metrics = std::move(sel.best.metrics);
      rec.accuracy = std::move(sel.best.accuracy);
    }
    rec.cost = dpp_cost(state, rec.metrics, rec.accuracy, cfg.V);
    rec.after = update_queues(state, rec.metrics.latency, rec.accuracy);
    state = rec.after;
    trace.records.push_back(std::move(rec));
  }
  trace.summary = summarize(trace.records, scenario);
  trace.summary.fallback_slots = fallback_slots;
  if (fallback_slots > 0) {
    spdlog::warn("run_simulation: {} slot(s) had a user without a feasible rate window", fallback_slots);
  }
  return trace;
}

TraceSummary summarize(std::span<const SlotRecord> records, const Scenario& scenario) {
  const ScenarioConfig& cfg = scenario.config;
  const std::size_t k = cfg.user_count();
  TraceSummary s;
  s.slots = static_cast<std::int64_t>(records.size());
  s.mean_accuracy.assign(k, 0.0);
  s.mean_bitload.assign(k, 0.0);

  const std::vector<double> targets = cfg.accuracy_targets();
  for (std::size_t i = 0; i < k; ++i) {
    if (targets[i] > scenario.table.max_for(i)) {
      s.infeasibility.push_back("user " + std::to_string(i) + ": accuracy target " +
                                fmt17(targets[i]) + " exceeds the table maximum " +
                                fmt17(scenario.table.max_for(i)));
    }
  }
  double floor_tx = 0.0;
  double floor_server = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const UserCompute& c = scenario.compute.users[i];
    floor_tx = std::max(floor_tx, c.tx_cycles(cfg.coeffs.front()) / c.f_max);
    floor_server += scenario.compute.server.rx_cycles(cfg.coeffs.front());
  }
  const double floor = floor_tx + floor_server / scenario.compute.server.f_max;
  if (cfg.latency_target < floor) {
    s.infeasibility.push_back("latency target " + fmt17(cfg.latency_target) +
                              " is below the processing floor " + fmt17(floor));
  }
  s.constraint_infeasible = !s.infeasibility.empty();
  if (records.empty()) return s;

  const std::size_t window_start =
      records.size() > static_cast<std::size_t>(cfg.power_window)
          ? records.size() - static_cast<std::size_t>(cfg.power_window)
          : 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const SlotRecord& rec = records[r];
    s.mean_latency += rec.metrics.latency;
    s.mean_power += rec.metrics.power;
    if (r >= window_start) s.window_power += rec.metrics.power;
    for (std::size_t i = 0; i < k; ++i) {
      s.mean_accuracy[i] += rec.accuracy[i];
      s.mean_bitload[i] += static_cast<double>(rec.decision.users[i].coeffs) * rec.decision.users[i].bits;
    }
  }
  const double n = static_cast<double>(records.size());
  s.mean_latency /= n;
  s.mean_power /= n;
  s.window_power /= static_cast<double>(records.size() - window_start);
  for (std::size_t i = 0; i < k; ++i) {
    s.mean_accuracy[i] /= n;
    s.mean_bitload[i] /= n;
  }
  s.final_Z = records.back().after.Z;
  s.final_Q = records.back().after.Q;
  s.constraints_met = s.mean_latency <= 1.02 * cfg.latency_target;
  for (std::size_t i = 0; i < k; ++i) {
    s.constraints_met = s.constraints_met && s.mean_accuracy[i] >= 0.98 * targets[i];
  }
  return s;
}

BoundReport verify_trace(std::span<const SlotRecord> records, double V, double xi) {
  BoundReport report;
  report.xi = xi;
  report.slots = static_cast<std::int64_t>(records.size());
  report.max_excess = -std::numeric_limits<double>::infinity();
  for (const SlotRecord& rec : records) {
    const BoundCheck c = verify_appendix_bound(rec, V, xi);
    report.max_excess = std::max(report.max_excess, c.lhs - c.rhs);
    if (!c.holds) {
      if (report.violations == 0) report.first_violation = rec.t;
      ++report.violations;
    }
  }
  return report;
}

DecisionHistogram decision_histogram(std::span<const SlotRecord> records,
                                     std::span<const Index> coeffs, std::span<const int> bits) {
  if (records.empty()) throw InvalidInput("decision_histogram: empty trace");
  const std::size_t k = records.front().decision.size();
  DecisionHistogram h;
  h.coeffs.assign(coeffs.begin(), coeffs.end());
  h.bits.assign(bits.begin(), bits.end());
  h.coeff_freq.assign(k, std::vector<double>(coeffs.size(), 0.0));
  h.bit_freq.assign(k, std::vector<double>(bits.size(), 0.0));
  h.mean_bitload.assign(k, 0.0);
  for (const SlotRecord& rec : records) {
    for (std::size_t i = 0; i < k; ++i) {
      const UserDecision& d = rec.decision.users.at(i);
      const auto n_it = std::find(coeffs.begin(), coeffs.end(), d.coeffs);
      const auto q_it = std::find(bits.begin(), bits.end(), d.bits);
      if (n_it == coeffs.end() || q_it == bits.end()) {
        throw InvalidInput("decision_histogram: slot " + std::to_string(rec.t) +
                           " uses (N, q) outside the grid");
      }
      h.coeff_freq[i][static_cast<std::size_t>(n_it - coeffs.begin())] += 1.0;
      h.bit_freq[i][static_cast<std::size_t>(q_it - bits.begin())] += 1.0;
      h.mean_bitload[i] += static_cast<double>(d.coeffs) * d.bits;
    }
  }
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (double& f : h.coeff_freq[i]) f /= n;
    for (double& f : h.bit_freq[i]) f /= n;
    h.mean_bitload[i] /= n;
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const DecisionHistogram& h) {
  std::ofstream out = open_out(path);
  out << "user,axis,value,frequency\n";
  for (std::size_t i = 0; i < h.coeff_freq.size(); ++i) {
    for (std::size_t j = 0; j < h.coeffs.size(); ++j) {
      out << i << ",N," << h.coeffs[j] << ',' << fmt17(h.coeff_freq[i][j]) << '\n';
    }
    for (std::size_t j = 0; j < h.bits.size(); ++j) {
      out << i << ",q," << h.bits[j] << ',' << fmt17(h.bit_freq[i][j]) << '\n';
    }
  }
}

std::vector<SweepCell> sweep(const Scenario& scenario, std::span<const double> latency_targets,
                             std::span<const double> accuracy_targets) {
  if (latency_targets.empty() || accuracy_targets.empty()) throw InvalidInput("sweep: empty grid");
  std::vector<SweepCell> cells(latency_targets.size() * accuracy_targets.size());
  parallel_for(cells.size(), [&](std::size_t idx) {
    SweepCell& cell = cells[idx];
    cell.latency_target = latency_targets[idx / accuracy_targets.size()];
    cell.accuracy_target = accuracy_targets[idx % accuracy_targets.size()];
    cell.seed = derive_seed(scenario.config.seed, Stream::sweep, idx);
    try {
      Scenario s = scenario;
      s.config.latency_target = cell.latency_target;
      for (UserConfig& u : s.config.users) u.accuracy_target = cell.accuracy_target;
      s.config.seed = cell.seed;
      s.config.validate();
      cell.summary = run_simulation(s).summary;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepCell> cells) {
  std::ofstream out = open_out(path);
  const std::size_t k = cells.empty() ? 0 : cells.front().summary.mean_accuracy.size();
  out << "latency_target,accuracy_target,seed,status,window_power,mean_power,mean_latency";
  for (std::size_t i = 0; i < k; ++i) out << ",G_" << i + 1;
  for (std::size_t i = 0; i < k; ++i) out << ",bitload_" << i + 1;
  out << ",final_Z,constraints_met\n";
  for (const SweepCell& c : cells) {
    out << fmt17(c.latency_target) << ',' << fmt17(c.accuracy_target) << ',' << c.seed << ','
        << (c.ok ? "ok" : "failed");
    if (!c.ok) {
      out << ",,,";
      for (std::size_t i = 0; i < 2 * k; ++i) out << ',';
      out << ",,\n";
      spdlog::error("sweep cell (L={}, G={}) failed: {}", c.latency_target, c.accuracy_target, c.error);
      continue;
    }
    const TraceSummary& s = c.summary;
    out << ',' << fmt17(s.window_power) << ',' << fmt17(s.mean_power) << ',' << fmt17(s.mean_latency);
    for (double g : s.mean_accuracy) out << ',' << fmt17(g);
    for (double b : s.mean_bitload) out << ',' << fmt17(b);
    out << ',' << fmt17(s.final_Z) << ',' << (s.constraints_met ? 1 : 0) << '\n';
  }
}

TuneResult tune(const Scenario& scenario, std::span<const double> v_grid) {
  if (v_grid.empty()) throw InvalidInput("tune: empty V grid");
  TuneResult result;
  result.rows.resize(v_grid.size());
  parallel_for(v_grid.size(), [&](std::size_t i) {
    TuneRow& row = result.rows[i];
    row.V = v_grid[i];
    try {
      Scenario s = scenario;
      s.config.V = row.V;
      s.config.validate();
      row.summary = run_simulation(s).summary;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const TuneRow& row = result.rows[i];
    if (!row.ok || !row.summary.constraints_met) continue;
    if (result.best < 0 ||
        row.summary.window_power < result.rows[static_cast<std::size_t>(result.best)].summary.window_power) {
      result.best = static_cast<std::ptrdiff_t>(i);
    }
  }
  return result;
}

void write_tune_csv(const std::filesystem::path& path, const TuneResult& result) {
  std::ofstream out = open_out(path);
  out << "V,status,window_power,mean_latency,min_mean_accuracy,constraints_met,best\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const TuneRow& r = result.rows[i];
    out << fmt17(r.V) << ',' << (r.ok ? "ok" : "failed");
    if (!r.ok) {
      out << ",,,,,0\n";
      continue;
    }
    const auto& acc = r.summary.mean_accuracy;
    out << ',' << fmt17(r.summary.window_power) << ',' << fmt17(r.summary.mean_latency) << ','
        << fmt17(acc.empty() ? 0.0 : *std::min_element(acc.begin(), acc.end()));
    out << ',' << (r.summary.constraints_met ? 1 : 0) << ','
        << (static_cast<std::ptrdiff_t>(i) == result.best ? 1 : 0) << '\n';
  }
}

}  // namespace semeq
