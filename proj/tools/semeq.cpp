// semeq: command-line front end for the semantic equalization library and
// the edge-inference resource allocation simulator.

#include "semeq/allocator.hpp"
#include "semeq/config.hpp"
#include "semeq/equalize.hpp"
#include "semeq/latent_world.hpp"
#include "semeq/simulation.hpp"
#include "semeq/trace_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace semeq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string table;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--config", c.config, "Scenario JSON (defaults to the built-in scenario)");
  cmd->add_option("--seed", c.seed, "Override the base seed");
  if (with_out) cmd->add_option("--out", c.out, "Output path");
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = c.config.empty() ? default_scenario() : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.table.empty()) cfg.accuracy_table = c.table;
  cfg.validate();
  return cfg;
}

std::string require_out(const Common& c, const char* fallback) {
  return c.out.empty() ? std::string(fallback) : c.out;
}

nlohmann::json summary_json(const TraceSummary& s) {
  return {{"slots", s.slots},
          {"mean_latency", s.mean_latency},
          {"mean_accuracy", s.mean_accuracy},
          {"mean_power", s.mean_power},
          {"window_power", s.window_power},
          {"mean_bitload", s.mean_bitload},
          {"final_Z", s.final_Z},
          {"final_Q", s.final_Q},
          {"constraints_met", s.constraints_met},
          {"constraint_infeasible", s.constraint_infeasible},
          {"infeasibility", s.infeasibility},
          {"fallback_slots", s.fallback_slots}};
}

int report_infeasible(const TraceSummary& s) {
  for (const std::string& why : s.infeasibility) spdlog::warn("constraint-infeasible: {}", why);
  return s.constraint_infeasible ? kExitInfeasible : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_gen_world(const Common& c, std::size_t user) {
  const ScenarioConfig cfg = load(c);
  if (user >= cfg.user_count()) throw InvalidInput("--user out of range");
  const LatentWorld w = generate_world(cfg.world_params(user));
  const fs::path dir = require_out(c, ".");
  fs::create_directories(dir);
  write_emb1(dir / "tx.emb1", w.tx);
  write_emb1(dir / "rx.emb1", w.rx);
  write_labels_csv(dir / "labels.csv", w.labels);
  spdlog::info("wrote {} samples (d={}, p={}, T={}) to {}", w.size(), w.tx_dim(), w.rx_dim(), w.classes,
               dir.string());
  return kExitOk;
}

int cmd_anchors(const Common& c, const std::string& input, const AnchorSpec& spec,
                const std::string& support_out) {
  const Matrix emb = read_emb1(input);
  const AnchorSelection sel = select_anchors(emb, spec);
  write_emb1(require_out(c, "anchors.emb1"), sel.anchors);
  if (!support_out.empty()) {
    std::ofstream out(support_out, std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + support_out + "'");
    out << "anchor,index\n";
    for (std::size_t a = 0; a < sel.support.size(); ++a) {
      for (Index i : sel.support[a]) out << a << ',' << i << '\n';
    }
  }
  spdlog::info("selected {} {} anchors", sel.anchors.rows(), to_string(spec.strategy));
  return kExitOk;
}

int cmd_equalize_eval(const Common& c, std::size_t user, const std::vector<std::string>& methods,
                      const std::vector<std::string>& strategies) {
  const ScenarioConfig cfg = load(c);
  if (user >= cfg.user_count()) throw InvalidInput("--user out of range");
  const WorldSource& src = cfg.users[user].world;
  const LatentWorld world = src.external()
                                ? ingest_embeddings(src.tx_path, src.rx_path, src.labels_path,
                                                    src.params.validation_fraction, cfg.seed)
                                : generate_world(cfg.world_params(user));
  const CentroidDecoder decoder = train_centroid_decoder(world);
  const double baseline = absolute_accuracy(world, decoder);

  const fs::path out_path = require_out(c, "equalize_eval.csv");
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + out_path.string() + "'");
  out << "method,strategy,N,q,compression_factor,accuracy,absolute_accuracy\n";
  char buf[160];
  for (const std::string& m : methods) {
    const EqualizerMethod method = parse_equalizer_method(m);
    for (const std::string& st : strategies) {
      AnchorSpec spec = cfg.anchors;
      spec.strategy = parse_anchor_strategy(st);
      const std::vector<LatentWorld> worlds{world};
      const std::vector<CentroidDecoder> decoders{decoder};
      spec.seed = cfg.anchors.seed;
      const AccuracyTable t = build_accuracy_table(worlds, decoders, method, spec, cfg.coeffs, cfg.bits);
      for (std::size_t n = 0; n < cfg.coeffs.size(); ++n) {
        for (std::size_t q = 0; q < cfg.bits.size(); ++q) {
          std::snprintf(buf, sizeof buf, "%s,%s,%ld,%d,%.17g,%.17g,%.17g\n", m.c_str(), st.c_str(),
                        static_cast<long>(cfg.coeffs[n]), cfg.bits[q],
                        compression_factor(cfg.coeffs[n], cfg.bits[q], world.tx_dim()),
                        t.at_index(0, n, q), baseline);
          out << buf;
        }
      }
    }
  }
  spdlog::info("absolute baseline accuracy {:.4f}; results in {}", baseline, out_path.string());
  return kExitOk;
}

int cmd_accuracy_table(const Common& c) {
  ScenarioConfig cfg = load(c);
  const AccuracyTable t = build_scenario_table(cfg);
  const std::string path = require_out(c, "accuracy_table.csv");
  t.write_csv(path);
  for (std::size_t k = 0; k < t.users(); ++k) {
    spdlog::info("user {}: accuracy in [{:.4f}, {:.4f}], target {:.4f}", k, t.min_for(k), t.max_for(k),
                 cfg.users[k].accuracy_target);
  }
  return kExitOk;
}

int cmd_simulate(const Common& c, std::optional<std::int64_t> slots, const std::string& summary_out) {
  ScenarioConfig cfg = load(c);
  if (slots) cfg.slots = *slots;
  const Scenario scenario = prepare_scenario(std::move(cfg));
  const Trace trace = run_simulation(scenario);
  write_trace_csv(fs::path(require_out(c, "trace.csv")), trace.records);
  const std::string js = summary_json(trace.summary).dump(2);
  if (!summary_out.empty()) {
    std::ofstream(summary_out, std::ios::trunc) << js << '\n';
  }
  std::cout << js << '\n';
  return report_infeasible(trace.summary);
}

int cmd_sweep(const Common& c, const std::vector<double>& latency, const std::vector<double>& accuracy,
              std::optional<std::int64_t> slots) {
  ScenarioConfig cfg = load(c);
  if (slots) cfg.slots = *slots;
  const Scenario scenario = prepare_scenario(std::move(cfg));
  const std::vector<SweepCell> cells = sweep(scenario, latency, accuracy);
  write_sweep_csv(require_out(c, "sweep.csv"), cells);
  bool failed = false;
  bool infeasible = false;
  for (const SweepCell& cell : cells) {
    failed = failed || !cell.ok;
    infeasible = infeasible || (cell.ok && cell.summary.constraint_infeasible);
  }
  if (failed) return kExitError;
  return infeasible ? kExitInfeasible : kExitOk;
}

int cmd_verify_bound(const Common& c, const std::string& trace_path, std::optional<std::int64_t> slots,
                     std::int64_t worst_every) {
  ScenarioConfig cfg = load(c);
  if (slots) cfg.slots = *slots;
  if (worst_every > 0) {
    for (std::int64_t t = worst_every - 1; t < cfg.slots; t += worst_every) cfg.worst_case_slots.push_back(t);
  }
  const Scenario scenario = prepare_scenario(std::move(cfg));
  std::vector<SlotRecord> records;
  if (trace_path.empty()) {
    records = run_simulation(scenario).records;
  } else {
    records = read_trace_csv(trace_path, scenario.initial_queues());
  }
  const BoundReport r = verify_trace(records, scenario.config.V, scenario.xi());
  const nlohmann::json js = {{"slots", r.slots},
                             {"violations", r.violations},
                             {"first_violation", r.first_violation},
                             {"max_excess", r.max_excess},
                             {"xi", r.xi},
                             {"max_latency", scenario.max_latency()}};
  std::cout << js.dump(2) << '\n';
  return r.violations == 0 ? kExitOk : kExitError;
}

int cmd_histogram(const Common& c, const std::string& trace_path) {
  const ScenarioConfig cfg = load(c);
  const QueueState params = initial_queues(cfg.latency_target, cfg.accuracy_targets(), cfg.eps_z, cfg.eps_q);
  const std::vector<SlotRecord> records = read_trace_csv(trace_path, params);
  const DecisionHistogram h = decision_histogram(records, cfg.coeffs, cfg.bits);
  write_histogram_csv(require_out(c, "histogram.csv"), h);
  for (std::size_t k = 0; k < h.mean_bitload.size(); ++k) {
    spdlog::info("user {}: mean N*q = {:.1f}", k, h.mean_bitload[k]);
  }
  return kExitOk;
}

int cmd_tune(const Common& c, const std::vector<double>& grid, std::optional<std::int64_t> slots) {
  ScenarioConfig cfg = load(c);
  if (slots) cfg.slots = *slots;
  const Scenario scenario = prepare_scenario(std::move(cfg));
  const TuneResult r = tune(scenario, grid);
  write_tune_csv(require_out(c, "tune.csv"), r);
  if (r.best < 0) {
    spdlog::warn("no V in the grid met the constraints");
    return kExitInfeasible;
  }
  spdlog::info("best V = {} (window power {:.6g} W)", r.rows[static_cast<std::size_t>(r.best)].V,
               r.rows[static_cast<std::size_t>(r.best)].summary.window_power);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic channel equalization and edge resource allocation simulator"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  Common common;
  std::size_t user = 0;
  std::optional<std::int64_t> slots;

  auto* gen = app.add_subcommand("gen-world", "Write a synthetic world as EMB1 files plus labels");
  add_common(gen, common);
  gen->add_option("--user", user, "User whose world parameters to use")->capture_default_str();

  std::string anchors_in;
  std::string support_out;
  AnchorSpec spec;
  std::string strategy = "prototypical";
  auto* anc = app.add_subcommand("anchors", "Select anchors from an EMB1 embedding file");
  add_common(anc, common);
  anc->add_option("--input", anchors_in, "EMB1 embeddings")->required();
  anc->add_option("--count", spec.count, "Number of anchors N")->required();
  anc->add_option("--per-cluster", spec.per_cluster, "Samples per cluster M")->capture_default_str();
  anc->add_option("--strategy", strategy, "prototypical|uniform")->capture_default_str();
  anc->add_option("--support-out", support_out, "Write support sets as CSV");

  std::vector<std::string> methods{"pfe", "fe", "upe"};
  std::vector<std::string> strategies{"prototypical", "uniform"};
  auto* eval = app.add_subcommand("equalize-eval", "Accuracy versus N and q for each equalizer");
  add_common(eval, common);
  eval->add_option("--user", user, "User world to evaluate")->capture_default_str();
  eval->add_option("--methods", methods, "Equalizers")->delimiter(',');
  eval->add_option("--strategies", strategies, "Anchor strategies")->delimiter(',');

  auto* table = app.add_subcommand("accuracy-table", "Build the per-user accuracy table");
  add_common(table, common);

  std::string summary_out;
  auto* sim = app.add_subcommand("simulate", "Run the slotted resource allocation loop");
  add_common(sim, common);
  sim->add_option("--table", common.table, "Precomputed accuracy table CSV");
  sim->add_option("--slots", slots, "Override the number of slots");
  sim->add_option("--summary", summary_out, "Also write the JSON summary here");

  std::vector<double> latency_grid{0.02, 0.04, 0.08};
  std::vector<double> accuracy_grid{0.65, 0.7, 0.75};
  auto* sw = app.add_subcommand("sweep", "Power versus latency and accuracy targets");
  add_common(sw, common);
  sw->add_option("--table", common.table, "Precomputed accuracy table CSV");
  sw->add_option("--slots", slots, "Override the number of slots");
  sw->add_option("--latency-targets", latency_grid, "L-bar grid")->delimiter(',');
  sw->add_option("--accuracy-targets", accuracy_grid, "G-bar grid")->delimiter(',');

  std::string trace_in;
  std::int64_t worst_every = 0;
  auto* vb = app.add_subcommand("verify-bound", "Check the per-slot drift-plus-penalty bound");
  add_common(vb, common, false);
  vb->add_option("--table", common.table, "Precomputed accuracy table CSV");
  vb->add_option("--trace", trace_in, "Verify this trace instead of running a simulation");
  vb->add_option("--slots", slots, "Override the number of slots");
  vb->add_option("--worst-case-every", worst_every, "Force a worst-latency slot every n slots");

  auto* hist = app.add_subcommand("histogram", "Per-user frequency of each N and q in a trace");
  add_common(hist, common);
  hist->add_option("--trace", trace_in, "Trace CSV")->required();

  std::vector<double> v_grid{1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3};
  auto* tn = app.add_subcommand("tune", "Coarse grid search over V");
  add_common(tn, common);
  tn->add_option("--table", common.table, "Precomputed accuracy table CSV");
  tn->add_option("--slots", slots, "Override the number of slots");
  tn->add_option("--v-grid", v_grid, "Candidate V values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  auto logger = spdlog::stderr_color_mt("semeq");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen) return cmd_gen_world(common, user);
    if (*anc) {
      spec.strategy = parse_anchor_strategy(strategy);
      spec.seed = common.seed.value_or(0);
      return cmd_anchors(common, anchors_in, spec, support_out);
    }
    if (*eval) return cmd_equalize_eval(common, user, methods, strategies);
    if (*table) return cmd_accuracy_table(common);
    if (*sim) return cmd_simulate(common, slots, summary_out);
    if (*sw) return cmd_sweep(common, latency_grid, accuracy_grid, slots);
    if (*vb) return cmd_verify_bound(common, trace_in, slots, worst_every);
    if (*hist) return cmd_histogram(common, trace_in);
    if (*tn) return cmd_tune(common, v_grid, slots);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return kExitError;
}
