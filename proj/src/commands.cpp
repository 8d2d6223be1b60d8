#include "tess/commands.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

#include "tess/error.hpp"
#include "tess/oracle.hpp"
#include "tess/parallel.hpp"

namespace tess {

namespace {

struct Input {
  LoadedData data;
  InputInfo info;
};

Input acquire(const RunOptions& opts, const std::optional<LoadedData>& data) {
  const CsvColumns columns{opts.outcome, opts.treatment, opts.covariates};
  if (data) {
    Input in{*data, {}};
    in.info.path = "(memory)";
    in.info.sha256 = sha256_hex(format_csv(in.data.schema, in.data.records, columns));
    in.info.records = in.data.records.size();
    return in;
  }
  if (opts.input.empty()) fail(ErrorCode::invalid_argument, "--input is required");
  Input in{load_csv(opts.input, columns), {}};
  in.info.path = opts.input;
  in.info.sha256 = sha256_file(opts.input);
  in.info.records = in.data.records.size();
  return in;
}

DiagnosticsSection diagnostics(const CellTable& table) {
  return {table.diagnostics(), table.cells().size(), table.treatment_cells(), table.min_controls()};
}

ScanSection scan_section(const ScanResult& s, const LoadedData& data) {
  ScanSection out;
  out.detected = describe(s.best, data.schema, data.records);
  out.score = s.score;
  out.alpha = s.alpha;
  out.n_alpha = s.n_alpha;
  out.n_total = s.n_total;
  out.mu_nate = s.mu_nate;
  out.best_restart = s.best_restart;
  out.restart_scores = s.restart_scores;
  out.cycles_per_restart = s.cycles_per_restart;
  out.restarts_hit_max_cycles = s.restarts_hit_max_cycles;
  return out;
}

SimSpec sim_spec(const RunOptions& o) {
  SimSpec spec;
  spec.effect = o.effect;
  spec.num_covs = o.num_covs;
  spec.value_prob = o.value_prob;
  spec.alternative = o.alternative;
  spec.synthetic = {o.records, o.arities, o.treat_prob};
  spec.replicates = o.replicates;
  spec.null_copies = o.null_copies;
  spec.gamma = o.gamma;
  spec.seed = o.seed;
  return spec;
}

std::optional<Dataset> simulation_base(const RunOptions& opts,
                                       const std::optional<LoadedData>& data, RunReport& report) {
  if (!data && opts.input.empty()) return std::nullopt;
  auto in = acquire(opts, data);
  report.input = in.info;
  return Dataset{std::move(in.data.schema), std::move(in.data.records)};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::io, "error writing '" + path + "'");
}

// Stream ids for seeds derived from the master seed.
constexpr std::uint64_t kPermutationStream = 0x7065726d;
constexpr std::uint64_t kHoldoutStream = 0x686f6c64;
constexpr std::uint64_t kSimulateStream = 0x73696d75;
constexpr std::uint64_t kOracleStream = 0x6f726163;

void run_scan(const RunOptions& opts, const std::optional<LoadedData>& data, RunReport& report) {
  const auto cfg = scan_config(opts);
  const auto in = acquire(opts, data);
  report.input = in.info;
  const auto table = build_cell_table(in.data.records, in.data.schema, table_options(opts));
  report.diagnostics = diagnostics(table);
  report.scan = scan_section(tess_scan(table, cfg), in.data);
}

void run_permtest(const RunOptions& opts, const std::optional<LoadedData>& data,
                  RunReport& report) {
  const auto cfg = scan_config(opts);
  const auto in = acquire(opts, data);
  report.input = in.info;
  const auto topts = table_options(opts);
  report.diagnostics = diagnostics(build_cell_table(in.data.records, in.data.schema, topts));
  const auto rep = permutation_test(in.data.records, in.data.schema, topts, cfg,
                                    opts.permutations, opts.gamma,
                                    derive_seed(opts.seed, kPermutationStream));
  report.scan = scan_section(rep.observed, in.data);
  report.permutation = PermutationSection{opts.permutations, rep.null_scores, rep.p_value,
                                          rep.gamma, rep.reject, rep.single_arm_profiles};
}

void run_holdout(const RunOptions& opts, const std::optional<LoadedData>& data,
                 RunReport& report) {
  const auto cfg = scan_config(opts);
  const auto in = acquire(opts, data);
  report.input = in.info;
  const auto topts = table_options(opts);
  const auto table = build_cell_table(in.data.records, in.data.schema, topts);
  report.diagnostics = diagnostics(table);
  const auto rep = holdout_ate(in.data.records, in.data.schema, topts, cfg, opts.folds,
                               derive_seed(opts.seed, kHoldoutStream));
  HoldoutSection h;
  for (const auto& f : rep.folds) {
    HoldoutFoldSection s;
    s.fold = f.fold;
    s.estimable = f.estimable;
    s.note = f.note;
    if (!f.detected.values.empty()) s.detected = describe(f.detected, in.data.schema, in.data.records);
    s.score = f.score;
    s.mean_difference = f.mean_difference;
    s.n_treated = f.n_treated;
    s.n_control = f.n_control;
    h.folds.push_back(std::move(s));
  }
  h.estimable_folds = rep.estimable_folds;
  h.mean_estimate = rep.mean_estimate;
  h.detection_agreement = rep.detection_agreement;
  report.holdout = std::move(h);
}

void run_simulate(const RunOptions& opts, const std::optional<LoadedData>& data,
                  RunReport& report) {
  if (opts.output.empty()) fail(ErrorCode::invalid_argument, "--output is required");
  const auto spec = sim_spec(opts);
  const std::uint64_t seed = derive_seed(opts.seed, kSimulateStream);
  auto base = simulation_base(opts, data, report);
  const Dataset ds = base ? std::move(*base) : synthetic_base(spec.synthetic, derive_seed(seed, 0));
  if (spec.num_covs > ds.schema.dims()) {
    fail(ErrorCode::invalid_argument, "num_covs exceeds the number of covariates");
  }
  if (!(spec.value_prob > 0.0 && spec.value_prob <= 1.0)) {
    fail(ErrorCode::invalid_argument, "value_prob must lie in (0, 1]");
  }
  if (!(spec.effect >= 0.0)) fail(ErrorCode::invalid_argument, "effect must be non-negative");
  const auto affected = generate_affected_subpopulation(ds.schema, spec.num_covs,
                                                        spec.value_prob, derive_seed(seed, 1));
  const auto records = inject(ds.records, affected, spec.alternative, spec.effect,
                              derive_seed(seed, 2));
  write_csv(opts.output, ds.schema, records, CsvColumns{opts.outcome, opts.treatment, {}});
  SimulateSection s;
  s.output = opts.output;
  s.records = records.size();
  for (const auto& r : records) s.treated += r.treated;
  s.affected = describe(affected, ds.schema, records);
  report.simulate = std::move(s);
}

void run_power(const RunOptions& opts, const std::optional<LoadedData>& data, RunReport& report) {
  const auto cfg = scan_config(opts);
  const auto base = simulation_base(opts, data, report);
  const auto rep = detection_power_experiment(sim_spec(opts), table_options(opts), cfg,
                                              opts.statistic, base);
  PowerSection p;
  p.replicates = rep.replicates.size();
  for (const auto& r : rep.replicates) {
    p.rejected += r.rejected;
    p.p_values.push_back(r.p_value);
  }
  p.power = rep.power;
  p.ci_low = rep.ci_low;
  p.ci_high = rep.ci_high;
  p.null_band_low = rep.null_band_low;
  p.null_band_high = rep.null_band_high;
  if (opts.statistic == PowerStatistic::tess) p.mean_accuracy = rep.mean_accuracy;
  report.power = std::move(p);
  if (!opts.jsonl.empty()) write_text(opts.jsonl, power_jsonl(rep));
}

void run_oracle(const RunOptions& opts, RunReport& report) {
  const auto cfg = scan_config(opts);
  OracleInstanceSpec spec;
  spec.modes = opts.modes;
  spec.arity = opts.arity;
  const auto rep = oracle_check(spec, opts.instances, table_options(opts), cfg,
                                derive_seed(opts.seed, kOracleStream));
  OracleSection o;
  o.instances = rep.instances;
  o.mode_checks = rep.mode_checks;
  o.mode_agreements = rep.mode_agreements;
  o.mode_agreement_rate =
      static_cast<double>(rep.mode_agreements) / static_cast<double>(rep.mode_checks);
  o.scan_matches = rep.scan_matches;
  o.scan_match_rate = static_cast<double>(rep.scan_matches) / static_cast<double>(rep.instances);
  o.scan_exceeded = rep.scan_exceeded;
  o.max_scan_gap = rep.max_scan_gap;
  report.oracle = o;
}

void run_theory(const RunOptions& opts, RunReport& report) {
  const auto t = theory_constant();
  TheorySection s{t.c, t.argmax_z, std::nullopt};
  if (opts.cells > 0) s.critical_value = critical_value(opts.cells, opts.epsilon);
  report.theory = s;
}

}  // namespace

std::string power_jsonl(const PowerReport& report) {
  std::string out;
  for (const auto& r : report.replicates) {
    nlohmann::ordered_json j{{"replicate", r.index},
                             {"observed", r.observed},
                             {"p_value", r.p_value},
                             {"rejected", r.rejected},
                             {"affected_treated", r.affected_treated}};
    if (r.accuracy) {
      j["accuracy"] = r.accuracy->value;
      j["accuracy_vacuous"] = r.accuracy->vacuous;
    } else {
      j["accuracy"] = nullptr;
      j["accuracy_vacuous"] = nullptr;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

CommandOutput run_command(std::string_view command, const RunOptions& opts,
                          const std::optional<LoadedData>& data) {
  const auto start = std::chrono::steady_clock::now();
  CommandOutput out;
  out.report.command = std::string(command);
  out.report.config = opts;
  out.report.config.threads = 0;
  if (command == "scan") run_scan(opts, data, out.report);
  else if (command == "permtest") run_permtest(opts, data, out.report);
  else if (command == "holdout") run_holdout(opts, data, out.report);
  else if (command == "simulate") run_simulate(opts, data, out.report);
  else if (command == "power") run_power(opts, data, out.report);
  else if (command == "oracle-check") run_oracle(opts, out.report);
  else if (command == "theory") run_theory(opts, out.report);
  else fail(ErrorCode::invalid_argument, "unknown command '" + std::string(command) + "'");
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace tess
