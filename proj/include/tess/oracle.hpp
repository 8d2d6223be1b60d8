#pragma once

#include <cstdint>
#include <span>

#include "tess/data_model.hpp"
#include "tess/scan.hpp"
#include "tess/score.hpp"
#include "tess/simgen.hpp"

namespace tess {

// Brute-force maximizers. They exist only to check the scanner.

inline constexpr std::uint64_t kOracleSubsetCap = 1'000'000;
inline constexpr std::size_t kOracleModeArityCap = 20;

struct OracleResult {
  Subpopulation best;
  double score = 0.0;
  double alpha = 0.0;
  std::uint64_t evaluated = 0;
};

/// prod_j (2^|V^j| - 1), saturating at UINT64_MAX.
[[nodiscard]] std::uint64_t rectangular_subset_count(const CovariateSchema& schema) noexcept;

/// Scores every rectangular subpopulation at every candidate alpha. Bitmask
/// enumeration with mode 0 as the most significant digit; ties keep the
/// earlier subset unless a later one has fewer values.
/// Throws ErrorCode::limit_exceeded when the subset count exceeds `cap`.
[[nodiscard]] OracleResult exhaustive_scan(const CellTable& table, const ScoreFunction& f,
                                           double alpha_min, double alpha_max,
                                           std::uint64_t cap = kOracleSubsetCap);

/// All 2^k - 1 non-empty subsets of the given per-value counts at one alpha.
[[nodiscard]] SubsetChoice exhaustive_best_subset(std::span<const double> n_alpha,
                                                  std::span<const double> n, double alpha,
                                                  const ScoreFunction& f);

/// Exhaustive counterpart of optimize_mode: every non-empty value subset of
/// mode j, every candidate alpha, other modes fixed to `current`.
[[nodiscard]] ModeOptimum exhaustive_mode(std::size_t j, const Subpopulation& current,
                                          const CellTable& table, const ScoreFunction& f,
                                          double alpha_min, double alpha_max);

struct OracleInstanceSpec {
  std::size_t modes = 3;
  std::size_t arity = 3;
  std::size_t min_controls = 3;
  std::size_t max_controls = 8;
  std::size_t min_treated = 1;
  std::size_t max_treated = 6;
  double effect = 1.5;
};

/// Full grid of profiles with random arm sizes per cell; treated units in a
/// random rectangular subset get a mean shift of `effect`.
[[nodiscard]] Dataset oracle_instance(const OracleInstanceSpec& spec, std::uint64_t seed);

struct OracleCheckReport {
  std::size_t instances = 0;
  std::size_t mode_checks = 0;
  std::size_t mode_agreements = 0;
  std::size_t scan_matches = 0;   // tess_scan reached the exhaustive optimum
  std::size_t scan_exceeded = 0;  // tess_scan above the exhaustive optimum (must stay 0)
  double max_scan_gap = 0.0;      // largest exhaustive minus tess_scan score
};

/// Relative tolerance used when comparing scores summed in different orders.
inline constexpr double kOracleTolerance = 1e-9;

/// For each instance: optimize_mode against exhaustive_mode for every mode at
/// a random starting subpopulation, and tess_scan against exhaustive_scan.
/// Instance i uses derive_seed(seed, i).
[[nodiscard]] OracleCheckReport oracle_check(const OracleInstanceSpec& spec,
                                             std::size_t instances,
                                             const TableOptions& table_options,
                                             const ScanConfig& cfg, std::uint64_t seed);

}  // namespace tess
