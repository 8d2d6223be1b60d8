#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tess/data_model.hpp"
#include "tess/scan.hpp"

namespace tess {

// ---------------------------------------------------------------------------
// Permutation testing
// ---------------------------------------------------------------------------

/// (1 + #{null >= observed}) / (n + 1).
[[nodiscard]] double rank_p_value(double observed, std::span<const double> null_scores);

/// Shuffles treatment labels among the records of each covariate profile,
/// preserving per-profile arm counts.
[[nodiscard]] std::vector<Record> permute_within_profiles(std::span<const Record> records,
                                                          std::uint64_t seed);

/// Profiles whose records all sit in one arm (no permutation variation).
[[nodiscard]] std::size_t count_single_arm_profiles(std::span<const Record> records);

struct PermutationReport {
  ScanResult observed;
  std::vector<double> null_scores;
  double p_value = 1.0;
  double gamma = 0.05;
  bool reject = false;
  std::size_t single_arm_profiles = 0;
};

inline constexpr std::size_t kMinPermutations = 19;

/// Scans the data, then `n_perm` within-profile label permutations. Null
/// replicate i uses labels shuffled with derive_seed(seed, i).
[[nodiscard]] PermutationReport permutation_test(std::span<const Record> records,
                                                 const CovariateSchema& schema,
                                                 const TableOptions& table_options,
                                                 const ScanConfig& cfg, std::size_t n_perm,
                                                 double gamma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Asymptotic null theory
// ---------------------------------------------------------------------------

/// phi(z)^2 / (2 (1 - Phi(z))).
[[nodiscard]] double null_slope_integrand(double z) noexcept;

struct TheoryConstants {
  double c = 0.0;         // max_z of the integrand
  double argmax_z = 0.0;
};

/// Dense grid over z in [-3, 5] followed by golden-section refinement.
[[nodiscard]] TheoryConstants theory_constant();

/// h(M, eps) = C M + eps.
[[nodiscard]] double critical_value(std::size_t m, double epsilon);

/// Best score over arbitrary (non-rectangular) sets of treatment cells, found
/// by sorting cells on N_alpha(x) / N(x) at each candidate alpha. Upper-bounds
/// every rectangular score.
[[nodiscard]] ScoredAlpha unconstrained_max(const ScanContext& ctx, const ScoreFunction& f);

// ---------------------------------------------------------------------------
// Holdout effect estimation
// ---------------------------------------------------------------------------

struct HoldoutFold {
  std::size_t fold = 0;
  bool estimable = false;
  std::string note;
  Subpopulation detected;
  double score = 0.0;
  double mean_difference = 0.0;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
};

struct HoldoutReport {
  std::vector<HoldoutFold> folds;
  std::size_t estimable_folds = 0;
  double mean_estimate = 0.0;
  /// Mean over fold pairs of the share of records whose membership in the
  /// two detected subpopulations agrees.
  double detection_agreement = 1.0;
};

/// k-fold cross-fitting: detect on out-of-fold records, estimate the
/// treated-minus-control mean difference inside the detection on the fold.
[[nodiscard]] HoldoutReport holdout_ate(std::span<const Record> records,
                                        const CovariateSchema& schema,
                                        const TableOptions& table_options,
                                        const ScanConfig& cfg, std::size_t folds,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exact recovery diagnostics
// ---------------------------------------------------------------------------

struct CellSignal {
  std::size_t cell = 0;  // index into table.cells()
  bool affected = false;
  double n_alpha = 0.0;
  double n_total = 0.0;
  double r_mle = 0.0;    // N_alpha(x) / N(x) - alpha
};

struct RecoveryReport {
  double alpha = 0.0;
  std::vector<CellSignal> cells;
  double r_aff_high = 0.0;
  double r_aff_low = 0.0;
  std::optional<double> r_unaff_high;  // empty when every treatment cell is affected
  double nu_ratio = 0.0;               // r_aff_high / r_aff_low
  double delta_ratio = 0.0;            // r_aff_low / r_unaff_high, +inf when unbounded
  double eta = 0.0;
  bool homogeneous_ok = false;         // nu_ratio < 2
  bool strong_ok = false;              // delta_ratio > 2 / eta
  /// The same thresholds are only known to carry over to BJ when every
  /// affected cell has beta_mle >= 1/2.
  bool bj_regime_ok = false;
};

/// Homogeneity and strength of the per-cell signal inside `truth` at `alpha`,
/// using the NA constants. Throws ErrorCode::degenerate when truth covers no
/// treatment cell.
[[nodiscard]] RecoveryReport recovery_conditions(const Subpopulation& truth,
                                                 const CellTable& table, double alpha);

}  // namespace tess
