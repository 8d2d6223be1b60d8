#include "tess/score.hpp"

#include <algorithm>
#include <cmath>

#include "tess/error.hpp"

namespace tess {

std::string_view to_string(ScoreKind k) noexcept {
  switch (k) {
    case ScoreKind::bj: return "bj";
    case ScoreKind::na: return "na";
    case ScoreKind::ks: return "ks";
    case ScoreKind::cvm: return "cvm";
    case ScoreKind::hc: return "hc";
    case ScoreKind::ad: return "ad";
  }
  return "bj";
}

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "bj") return ScoreKind::bj;
  if (text == "na") return ScoreKind::na;
  if (text == "ks") return ScoreKind::ks;
  if (text == "cvm") return ScoreKind::cvm;
  if (text == "hc") return ScoreKind::hc;
  if (text == "ad") return ScoreKind::ad;
  fail(ErrorCode::invalid_argument,
       "unknown score '" + std::string(text) + "' (expected bj, na, ks, cvm, hc or ad)");
}

namespace {

double clamp_alpha(double alpha) noexcept {
  return std::clamp(alpha, kAlphaFloor, 1.0 - kAlphaFloor);
}

double safe_log(double x) noexcept { return std::log(std::max(x, kLogFloor)); }

// x log(x / y) with 0 log 0 = 0.
double xlogx_over_y(double x, double y) noexcept {
  return x <= 0.0 ? 0.0 : x * (safe_log(x) - safe_log(y));
}

}  // namespace

double score_na(double n_alpha, double n_total, double alpha, bool symmetric) noexcept {
  if (n_total <= 0.0) return 0.0;
  const double a = clamp_alpha(alpha);
  const double excess = n_alpha - n_total * a;
  if (!symmetric && excess <= 0.0) return 0.0;
  return excess * excess / (2.0 * n_total * a * (1.0 - a));
}

double score_bj(double n_alpha, double n_total, double alpha, bool symmetric) noexcept {
  if (n_total <= 0.0) return 0.0;
  const double a = clamp_alpha(alpha);
  if (!symmetric && n_alpha <= n_total * a) return 0.0;
  const double x = std::clamp(n_alpha / n_total, 0.0, 1.0);
  const double kl = xlogx_over_y(x, a) + xlogx_over_y(1.0 - x, 1.0 - a);
  return n_total * std::max(kl, 0.0);
}

double score_transform(ScoreKind kind, double na_score, double alpha) noexcept {
  const double a = clamp_alpha(alpha);
  const double na = std::max(na_score, 0.0);
  switch (kind) {
    case ScoreKind::ks: return std::sqrt(2.0 * a * (1.0 - a) * na);
    case ScoreKind::cvm: return 2.0 * a * (1.0 - a) * na;
    case ScoreKind::hc: return std::sqrt(2.0 * na);
    case ScoreKind::ad: return 2.0 * na;
    case ScoreKind::bj:
    case ScoreKind::na: return na;
  }
  return na;
}

double ScoreFunction::operator()(double n_alpha, double n_total, double alpha) const noexcept {
  if (kind == ScoreKind::bj) return score_bj(n_alpha, n_total, alpha, symmetric);
  return score_transform(kind, score_na(n_alpha, n_total, alpha, symmetric), alpha);
}

double ScoreFunction::divergence(double n_alpha, double n_total, double alpha) const noexcept {
  if (n_total <= 0.0) return 0.0;
  if (kind == ScoreKind::bj) return score_bj(n_alpha, n_total, alpha, symmetric) / n_total;
  return score_na(n_alpha, n_total, alpha, symmetric) / n_total;
}

ScoredAlpha max_over_alpha(std::span<const double> alphas, std::span<const double> n_alpha,
                           double n_total, const ScoreFunction& f) {
  ScoredAlpha best;
  best.alpha = alphas.empty() ? 0.0 : alphas.front();
  best.n_total = n_total;
  best.n_alpha = n_alpha.empty() ? 0.0 : n_alpha.front();
  if (n_total <= 0.0) return best;
  bool first = true;
  for (std::size_t u = 0; u < alphas.size(); ++u) {
    const double s = f(n_alpha[u], n_total, alphas[u]);
    if (first || s > best.score) {
      best.alpha = alphas[u];
      best.score = s;
      best.n_alpha = n_alpha[u];
      first = false;
    }
  }
  best.mu_nate = f.divergence(best.n_alpha, n_total, best.alpha);
  return best;
}

ScoredAlpha max_over_alpha(const Subpopulation& s, const CellTable& table,
                           const ScoreFunction& f, double alpha_min, double alpha_max) {
  s.validate(table.schema());
  const auto ranges = table.all_ranges();
  const auto alphas = candidate_alphas(ranges, alpha_min, alpha_max);
  std::vector<double> mass(alphas.size(), 0.0);
  double n_total = 0.0;
  for (const auto& c : table.cells()) {
    if (c.treated_count() == 0 || !s.contains(c.profile)) continue;
    for (std::size_t u = 0; u < alphas.size(); ++u) mass[u] += cell_mass(c, alphas[u]);
    n_total += static_cast<double>(c.treated_count());
  }
  if (n_total <= 0.0) {
    ScoredAlpha empty;
    empty.alpha = alpha_min;
    return empty;
  }
  return max_over_alpha(alphas, mass, n_total, f);
}

double omega(ScoreKind kind, const OmegaParams& p, double n_alpha, double n_total) {
  const double a = p.alpha;
  const double b = p.beta;
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
    fail(ErrorCode::invalid_argument, "omega needs alpha and beta in (0, 1)");
  }
  switch (kind) {
    case ScoreKind::na: {
      const double denom = a * (1.0 - a);
      return (b - a) / denom * n_alpha + (a * a - b * b) / (2.0 * denom) * n_total;
    }
    case ScoreKind::bj:
      return n_alpha * std::log(b * (1.0 - a) / (a * (1.0 - b))) +
             n_total * std::log((1.0 - b) / (1.0 - a));
    default:
      fail(ErrorCode::invalid_argument, "omega is defined for bj and na only");
  }
}

std::pair<double, double> na_beta_roots(double alpha, double beta_mle) {
  if (beta_mle < alpha) {
    fail(ErrorCode::invalid_argument, "na_beta_roots needs beta_mle >= alpha");
  }
  return {alpha, 2.0 * beta_mle - alpha};
}

double bj_beta_max(double alpha, double beta_mle) {
  if (!(alpha > 0.0 && alpha < beta_mle && beta_mle < 1.0)) {
    fail(ErrorCode::invalid_argument, "bj_beta_max needs 0 < alpha < beta_mle < 1");
  }
  // Per-unit omega^BJ with N = 1, N_alpha = beta_mle: positive at beta_mle, -> -inf at 1.
  const auto w = [&](double beta) {
    return beta_mle * std::log(beta / alpha) +
           (1.0 - beta_mle) * std::log((1.0 - beta) / (1.0 - alpha));
  };
  double lo = beta_mle;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (w(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace tess
