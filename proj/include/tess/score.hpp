#pragma once

#include <span>
#include <string_view>
#include <utility>

#include "tess/data_model.hpp"

namespace tess {

/// Nonparametric scan statistics. KS, CVM, HC and AD are monotone transforms
/// of NA at fixed alpha.
enum class ScoreKind { bj, na, ks, cvm, hc, ad };

[[nodiscard]] std::string_view to_string(ScoreKind k) noexcept;
[[nodiscard]] ScoreKind parse_score_kind(std::string_view text);

struct ScoreFunction {
  ScoreKind kind = ScoreKind::bj;
  /// Score deficits (N_alpha < alpha N) as well as excesses.
  bool symmetric = false;

  /// F_alpha for the given counts.
  [[nodiscard]] double operator()(double n_alpha, double n_total, double alpha) const noexcept;
  /// Divergence between the observed proportion and alpha (F_alpha / N for BJ and NA).
  [[nodiscard]] double divergence(double n_alpha, double n_total, double alpha) const noexcept;
};

inline constexpr double kAlphaFloor = 1e-6;
inline constexpr double kLogFloor = 1e-300;

/// (N_alpha - N alpha)^2 / (2 N alpha (1 - alpha)) when N_alpha > alpha N, else 0.
[[nodiscard]] double score_na(double n_alpha, double n_total, double alpha,
                              bool symmetric = false) noexcept;
/// N * KL(N_alpha / N || alpha) when N_alpha > alpha N, else 0.
[[nodiscard]] double score_bj(double n_alpha, double n_total, double alpha,
                              bool symmetric = false) noexcept;
/// Maps an NA score to KS, CVM, HC or AD at the same alpha. BJ and NA pass through.
[[nodiscard]] double score_transform(ScoreKind kind, double na_score, double alpha) noexcept;

struct ScoredAlpha {
  double alpha = 0.0;
  double score = 0.0;
  double mu_nate = 0.0;
  double n_alpha = 0.0;
  double n_total = 0.0;
};

/// Max of F_alpha over the given sorted alphas; ties resolve to the smaller
/// alpha. `n_alpha[u]` is the significance mass at `alphas[u]`.
[[nodiscard]] ScoredAlpha max_over_alpha(std::span<const double> alphas,
                                         std::span<const double> n_alpha, double n_total,
                                         const ScoreFunction& f);

/// F(S) = max_alpha F_alpha(S) over the candidate alphas of the whole table.
[[nodiscard]] ScoredAlpha max_over_alpha(const Subpopulation& s, const CellTable& table,
                                         const ScoreFunction& f, double alpha_min,
                                         double alpha_max);

struct OmegaParams {
  double alpha = 0.1;
  double beta = 0.1;
};

/// Additive per-cell contribution at fixed (alpha, beta). Only BJ and NA have
/// an additive form.
[[nodiscard]] double omega(ScoreKind kind, const OmegaParams& p, double n_alpha,
                           double n_total);

/// Roots of omega^NA in beta: (alpha, 2 beta_mle - alpha).
[[nodiscard]] std::pair<double, double> na_beta_roots(double alpha, double beta_mle);

/// Upper root of omega^BJ in beta, found by bisection on (beta_mle, 1).
/// Requires alpha < beta_mle < 1.
[[nodiscard]] double bj_beta_max(double alpha, double beta_mle);

}  // namespace tess
