#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tess/data_model.hpp"
#include "tess/inference.hpp"
#include "tess/scan.hpp"
#include "tess/simgen.hpp"

namespace tess {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kVersion = "1.0.0";

/// Every setting a run can take. Defaults are the documented CLI defaults.
struct RunOptions {
  // input
  std::string input;
  std::string outcome = "y";
  std::string treatment = "w";
  std::vector<std::string> covariates;

  // p-value ranges and cell table
  Sidedness sided = Sidedness::two;
  bool include_orphan_treated = false;
  std::size_t thin_controls = 5;

  // scan
  ScoreKind score = ScoreKind::bj;
  bool symmetric = false;
  double alpha_min = 0.001;
  double alpha_max = 0.5;
  std::size_t restarts = 50;
  std::size_t max_cycles = 100;
  double inclusion_prob = 0.5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // never echoed: results do not depend on it

  // permutation test and holdout
  std::size_t permutations = 199;
  double gamma = 0.05;
  std::size_t folds = 5;

  // simulation
  double effect = 1.5;
  std::size_t num_covs = 5;
  double value_prob = 0.5;
  Alternative alternative = Alternative::mean_shift;
  std::size_t records = 10240;
  std::vector<std::size_t> arities = std::vector<std::size_t>(10, 2);
  double treat_prob = 0.5;
  std::size_t replicates = 50;
  std::size_t null_copies = 200;
  PowerStatistic statistic = PowerStatistic::tess;
  std::string output;  // simulate: CSV destination
  std::string jsonl;   // power: per-replicate records

  // oracle-check
  std::size_t modes = 3;
  std::size_t arity = 3;
  std::size_t instances = 100;

  // theory
  std::size_t cells = 0;  // M for h(M, eps); 0 skips it
  double epsilon = 0.01;

  friend bool operator==(const RunOptions&, const RunOptions&) = default;
};

/// Sets one option from its CLI spelling (e.g. "alpha-min", "0.01").
/// Throws ErrorCode::invalid_argument for unknown keys or malformed values.
void set_option(RunOptions& opts, std::string_view key, std::string_view value);

/// Current value of one option in the spelling set_option accepts.
[[nodiscard]] std::string get_option(const RunOptions& opts, std::string_view key);

/// Option keys accepted by set_option, in documentation order.
[[nodiscard]] std::vector<std::string_view> option_keys();

[[nodiscard]] ScanConfig scan_config(const RunOptions& opts);
[[nodiscard]] TableOptions table_options(const RunOptions& opts);

struct InputInfo {
  std::string path;
  std::string sha256;
  std::size_t records = 0;
  friend bool operator==(const InputInfo&, const InputInfo&) = default;
};

struct KeptValues {
  std::string covariate;
  std::vector<std::string> values;
  bool all = false;  // every value of the covariate kept
  friend bool operator==(const KeptValues&, const KeptValues&) = default;
};

/// A subpopulation both by kept values and by the records it matches.
struct DetectedSubpopulation {
  std::vector<KeptValues> covariates;
  std::size_t treated_records = 0;
  std::size_t records = 0;
  friend bool operator==(const DetectedSubpopulation&, const DetectedSubpopulation&) = default;
};

[[nodiscard]] DetectedSubpopulation describe(const Subpopulation& s, const CovariateSchema& schema,
                                             std::span<const Record> records);

struct DiagnosticsSection {
  TableDiagnostics table;
  std::size_t cells = 0;
  std::size_t treatment_cells = 0;
  std::size_t min_controls = 0;
  friend bool operator==(const DiagnosticsSection&, const DiagnosticsSection&) = default;
};

struct ScanSection {
  DetectedSubpopulation detected;
  double score = 0.0;
  double alpha = 0.0;
  double n_alpha = 0.0;
  double n_total = 0.0;
  double mu_nate = 0.0;
  std::size_t best_restart = 0;
  std::vector<double> restart_scores;
  std::vector<std::size_t> cycles_per_restart;
  std::size_t restarts_hit_max_cycles = 0;
  friend bool operator==(const ScanSection&, const ScanSection&) = default;
};

struct PermutationSection {
  std::size_t permutations = 0;
  std::vector<double> null_scores;
  double p_value = 1.0;
  double gamma = 0.05;
  bool reject = false;
  std::size_t single_arm_profiles = 0;
  friend bool operator==(const PermutationSection&, const PermutationSection&) = default;
};

struct HoldoutFoldSection {
  std::size_t fold = 0;
  bool estimable = false;
  std::string note;
  std::optional<DetectedSubpopulation> detected;
  double score = 0.0;
  double mean_difference = 0.0;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  friend bool operator==(const HoldoutFoldSection&, const HoldoutFoldSection&) = default;
};

struct HoldoutSection {
  std::vector<HoldoutFoldSection> folds;
  std::size_t estimable_folds = 0;
  double mean_estimate = 0.0;
  double detection_agreement = 1.0;
  friend bool operator==(const HoldoutSection&, const HoldoutSection&) = default;
};

struct PowerSection {
  std::size_t replicates = 0;
  std::size_t rejected = 0;
  double power = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double null_band_low = 0.0;
  double null_band_high = 1.0;
  std::optional<double> mean_accuracy;
  std::vector<double> p_values;
  friend bool operator==(const PowerSection&, const PowerSection&) = default;
};

struct SimulateSection {
  std::string output;
  std::size_t records = 0;
  std::size_t treated = 0;
  DetectedSubpopulation affected;
  friend bool operator==(const SimulateSection&, const SimulateSection&) = default;
};

struct OracleSection {
  std::size_t instances = 0;
  std::size_t mode_checks = 0;
  std::size_t mode_agreements = 0;
  double mode_agreement_rate = 0.0;
  std::size_t scan_matches = 0;
  double scan_match_rate = 0.0;
  std::size_t scan_exceeded = 0;
  double max_scan_gap = 0.0;
  friend bool operator==(const OracleSection&, const OracleSection&) = default;
};

struct TheorySection {
  double constant = 0.0;
  double argmax_z = 0.0;
  std::optional<double> critical_value;
  friend bool operator==(const TheorySection&, const TheorySection&) = default;
};

/// Machine-readable result of one CLI run.
struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string version{kVersion};
  std::string command;
  std::optional<InputInfo> input;
  RunOptions config;
  std::optional<DiagnosticsSection> diagnostics;
  std::optional<ScanSection> scan;
  std::optional<PermutationSection> permutation;
  std::optional<HoldoutSection> holdout;
  std::optional<PowerSection> power;
  std::optional<SimulateSection> simulate;
  std::optional<OracleSection> oracle;
  std::optional<TheorySection> theory;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Pretty-printed JSON with a fixed key order and a trailing newline.
[[nodiscard]] std::string to_json(const RunReport& report);
/// Inverse of to_json. Throws ErrorCode::parse on malformed input.
[[nodiscard]] RunReport report_from_json(std::string_view text);

/// Human-readable summary; `wall_seconds` < 0 omits the timing line.
[[nodiscard]] std::string summarize(const RunReport& report, double wall_seconds = -1.0);

}  // namespace tess
