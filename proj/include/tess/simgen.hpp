#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tess/data_model.hpp"
#include "tess/scan.hpp"

namespace tess {

/// f1 for affected treated units; f0 is always N(0, 1).
enum class Alternative {
  mean_shift,         // N(effect, 1)
  symmetric_mixture,  // 1/2 N(-effect, 1) + 1/2 N(effect, 1)
};

[[nodiscard]] std::string_view to_string(Alternative a) noexcept;
[[nodiscard]] Alternative parse_alternative(std::string_view text);

struct Dataset {
  CovariateSchema schema;
  std::vector<Record> records;
};

/// Independent uniform covariate draws and a fair-coin treatment assignment.
struct SyntheticBase {
  std::size_t records = 10240;
  std::vector<std::size_t> arities = std::vector<std::size_t>(10, 2);
  double treat_prob = 0.5;
};

[[nodiscard]] Dataset synthetic_base(const SyntheticBase& base, std::uint64_t seed);

struct SimSpec {
  double effect = 1.5;
  std::size_t num_covs = 5;
  double value_prob = 0.5;
  Alternative alternative = Alternative::mean_shift;
  SyntheticBase synthetic{};
  std::size_t replicates = 50;
  std::size_t null_copies = 200;
  double gamma = 0.05;
  std::uint64_t seed = 0;

  void validate(std::size_t dims) const;
};

/// Picks num_covs covariates at random; each keeps every value with
/// probability value_prob (redrawn until non-empty). Other covariates keep
/// all values.
[[nodiscard]] Subpopulation generate_affected_subpopulation(const CovariateSchema& schema,
                                                            std::size_t num_covs,
                                                            double value_prob,
                                                            std::uint64_t seed);

/// Copy of `base` with fresh outcomes: f1 for treated records inside
/// `affected`, f0 elsewhere. Covariates and treatment labels are untouched.
[[nodiscard]] std::vector<Record> inject(std::span<const Record> base,
                                         const Subpopulation& affected,
                                         Alternative alternative, double effect,
                                         std::uint64_t seed);

struct Accuracy {
  double value = 0.0;
  bool vacuous = false;  // both sets empty; value reported as 1
};

/// Jaccard overlap of detected and true subpopulations over treated records.
[[nodiscard]] Accuracy accuracy(const Subpopulation& detected, const Subpopulation& truth,
                                std::span<const Record> records);

/// Statistic compared against its regenerated-null distribution.
enum class PowerStatistic {
  tess,             // max_S F(S) from tess_scan
  mean_difference,  // |Welch t| of treated vs control over all records
};

[[nodiscard]] std::string_view to_string(PowerStatistic s) noexcept;
[[nodiscard]] PowerStatistic parse_power_statistic(std::string_view text);

[[nodiscard]] double welch_t_statistic(std::span<const Record> records);

struct ReplicateResult {
  std::size_t index = 0;
  double observed = 0.0;
  double p_value = 1.0;
  bool rejected = false;
  Subpopulation affected;
  std::size_t affected_treated = 0;
  std::optional<Subpopulation> detected;  // tess statistic only
  std::optional<Accuracy> accuracy;
};

struct PowerReport {
  std::vector<ReplicateResult> replicates;
  double power = 0.0;
  double ci_low = 0.0;   // Wilson 95% interval for the power
  double ci_high = 1.0;
  double null_band_low = 0.0;   // central 95% band of Binomial(R, gamma) / R
  double null_band_high = 1.0;
  double mean_accuracy = 0.0;   // tess statistic only
};

/// Central band [lo, hi] / n of Binomial(n, p) with at most (1 - level) / 2
/// probability in each tail.
[[nodiscard]] std::pair<double, double> binomial_band(std::size_t n, double p, double level);
[[nodiscard]] std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n,
                                                        double z = 1.959963984540054);

/// Replicate r: fresh affected subpopulation and injected outcomes, then
/// null_copies datasets with every outcome redrawn from f0; p-value by rank.
/// With `base` empty a synthetic base is drawn once from the master seed.
[[nodiscard]] PowerReport detection_power_experiment(const SimSpec& spec,
                                                     const TableOptions& table_options,
                                                     const ScanConfig& cfg,
                                                     PowerStatistic statistic,
                                                     const std::optional<Dataset>& base = {});

}  // namespace tess
