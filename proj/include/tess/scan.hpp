#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tess/data_model.hpp"
#include "tess/score.hpp"

namespace tess {

struct ScanConfig {
  ScoreFunction score{};
  double alpha_min = 0.001;
  double alpha_max = 0.5;
  std::size_t restarts = 50;
  std::size_t max_cycles = 100;
  std::uint64_t seed = 0;
  double inclusion_prob = 0.5;
  std::size_t threads = 1;

  /// Throws ErrorCode::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Candidate alphas and per-cell significance mass at each of them,
/// precomputed once per table. Cells without treated units are dropped.
class ScanContext {
 public:
  /// Throws ErrorCode::degenerate when the table has no treatment cell.
  ScanContext(const CellTable& table, double alpha_min, double alpha_max);

  [[nodiscard]] const CellTable& table() const noexcept { return *table_; }
  [[nodiscard]] std::span<const double> alphas() const noexcept { return alphas_; }
  [[nodiscard]] std::size_t num_cells() const noexcept { return counts_.size(); }
  [[nodiscard]] std::size_t dims() const noexcept { return dims_; }
  [[nodiscard]] std::span<const ValueIndex> profile(std::size_t c) const noexcept {
    return {profiles_.data() + c * dims_, dims_};
  }
  [[nodiscard]] std::span<const double> mass_row(std::size_t c) const noexcept {
    return {mass_.data() + c * alphas_.size(), alphas_.size()};
  }
  [[nodiscard]] double count(std::size_t c) const noexcept { return counts_[c]; }

  /// F(S) accumulated cell by cell in table order; bitwise identical to
  /// max_over_alpha(S, table, ...) over the same window.
  [[nodiscard]] ScoredAlpha evaluate(const Subpopulation& s, const ScoreFunction& f) const;

 private:
  const CellTable* table_;
  std::size_t dims_ = 0;
  std::vector<double> alphas_;
  std::vector<ValueIndex> profiles_;
  std::vector<double> mass_;
  std::vector<double> counts_;
};

/// LTSS priority N_alpha / N of one value; empty when the value carries no
/// treated units.
[[nodiscard]] std::optional<double> priority(double cell_n_alpha, double cell_n) noexcept;

struct SubsetChoice {
  std::vector<ValueIndex> values;  // ascending
  double score = 0.0;
  double n_alpha = 0.0;
  double n_total = 0.0;
};

/// Best subset of values at one alpha given per-value counts, searching only
/// the priority-ordered prefixes (and suffixes for symmetric scores). Values
/// with n == 0 are never selected. With no usable value, returns {0} and 0.
[[nodiscard]] SubsetChoice ltss_best_subset(std::span<const double> n_alpha,
                                            std::span<const double> n, double alpha,
                                            const ScoreFunction& f);

struct ModeOptimum {
  std::vector<ValueIndex> values;  // ascending
  ScoredAlpha scored;
};

/// Per-value mass (values x alphas, row-major) and counts of mode j over the
/// cells that pass every other mode of `current`.
struct ModeAggregate {
  std::vector<double> mass;
  std::vector<double> n;
};
[[nodiscard]] ModeAggregate aggregate_mode(const ScanContext& ctx, std::size_t j,
                                           const Subpopulation& current);

/// Exact maximization of F over v_j x v_{-j} for every candidate alpha.
[[nodiscard]] ModeOptimum optimize_mode(const ScanContext& ctx, std::size_t j,
                                        const Subpopulation& current, const ScoreFunction& f);

struct RestartOutcome {
  Subpopulation best;
  ScoredAlpha scored;
  std::size_t cycles = 0;
  bool hit_max_cycles = false;
  std::vector<double> trace;  // canonical score after init and each accepted move
};

[[nodiscard]] Subpopulation random_subpopulation(const ScanContext& ctx, double inclusion_prob,
                                                 std::uint64_t seed);

/// One ordinal-ascent run from a random start.
[[nodiscard]] RestartOutcome scan_restart(const ScanContext& ctx, const ScanConfig& cfg,
                                          std::uint64_t restart_seed);

struct ScanResult {
  Subpopulation best;
  double score = 0.0;
  double alpha = 0.0;
  double n_alpha = 0.0;
  double n_total = 0.0;
  double mu_nate = 0.0;
  std::size_t best_restart = 0;
  std::vector<double> restart_scores;
  std::vector<std::size_t> cycles_per_restart;
  std::size_t restarts_hit_max_cycles = 0;
  double wall_seconds = 0.0;
};

/// Best of cfg.restarts ordinal-ascent runs. Restart i is seeded with
/// derive_seed(cfg.seed, i); ties go to the lowest restart index.
[[nodiscard]] ScanResult tess_scan(const CellTable& table, const ScanConfig& cfg);
[[nodiscard]] ScanResult tess_scan(const ScanContext& ctx, const ScanConfig& cfg);

}  // namespace tess
