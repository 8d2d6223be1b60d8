#include "tess/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "tess/error.hpp"
#include "tess/parallel.hpp"

namespace tess {

double rank_p_value(double observed, std::span<const double> null_scores) {
  const auto at_least = std::count_if(null_scores.begin(), null_scores.end(),
                                      [&](double s) { return s >= observed; });
  return (1.0 + static_cast<double>(at_least)) / (static_cast<double>(null_scores.size()) + 1.0);
}

namespace {

std::map<Profile, std::vector<std::size_t>> group_by_profile(std::span<const Record> records) {
  std::map<Profile, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[records[i].profile].push_back(i);
  return groups;
}

}  // namespace

std::vector<Record> permute_within_profiles(std::span<const Record> records,
                                            std::uint64_t seed) {
  std::vector<Record> out(records.begin(), records.end());
  std::mt19937_64 rng(seed);
  std::vector<char> labels;
  for (const auto& [profile, members] : group_by_profile(records)) {
    labels.clear();
    for (auto i : members) labels.push_back(records[i].treated ? 1 : 0);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k) out[members[k]].treated = labels[k] != 0;
  }
  return out;
}

std::size_t count_single_arm_profiles(std::span<const Record> records) {
  std::size_t n = 0;
  for (const auto& [profile, members] : group_by_profile(records)) {
    const auto treated = std::count_if(members.begin(), members.end(),
                                       [&](std::size_t i) { return records[i].treated; });
    if (treated == 0 || static_cast<std::size_t>(treated) == members.size()) ++n;
  }
  return n;
}

PermutationReport permutation_test(std::span<const Record> records, const CovariateSchema& schema,
                                   const TableOptions& table_options, const ScanConfig& cfg,
                                   std::size_t n_perm, double gamma, std::uint64_t seed) {
  if (n_perm < kMinPermutations) {
    fail(ErrorCode::invalid_argument,
         "permutation test needs at least " + std::to_string(kMinPermutations) + " permutations");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    fail(ErrorCode::invalid_argument, "gamma must lie in (0, 1)");
  }
  cfg.validate();

  PermutationReport rep;
  rep.gamma = gamma;
  rep.single_arm_profiles = count_single_arm_profiles(records);
  {
    const auto table = build_cell_table(records, schema, table_options);
    rep.observed = tess_scan(table, cfg);
  }

  ScanConfig inner = cfg;
  inner.threads = 1;
  rep.null_scores.assign(n_perm, 0.0);
  parallel_for(n_perm, cfg.threads, [&](std::size_t i) {
    const auto shuffled = permute_within_profiles(records, derive_seed(seed, i));
    const auto table = build_cell_table(shuffled, schema, table_options);
    rep.null_scores[i] = tess_scan(table, inner).score;
  });
  rep.p_value = rank_p_value(rep.observed.score, rep.null_scores);
  rep.reject = rep.p_value <= gamma;
  return rep;
}

double null_slope_integrand(double z) noexcept {
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
  return pdf * pdf / (2.0 * tail);
}

TheoryConstants theory_constant() {
  constexpr double lo = -3.0;
  constexpr double hi = 5.0;
  constexpr double step = 1e-3;
  double best_z = lo;
  double best = null_slope_integrand(lo);
  const auto steps = static_cast<std::size_t>((hi - lo) / step);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double z = lo + step * static_cast<double>(i);
    const double g = null_slope_integrand(z);
    if (g > best) {
      best = g;
      best_z = z;
    }
  }
  // Golden-section search on the bracketing grid cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_z - step;
  double b = best_z + step;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = null_slope_integrand(x1);
  double f2 = null_slope_integrand(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = null_slope_integrand(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = null_slope_integrand(x1);
    }
  }
  const double z = 0.5 * (a + b);
  return {null_slope_integrand(z), z};
}

double critical_value(std::size_t m, double epsilon) {
  if (m == 0) fail(ErrorCode::invalid_argument, "critical value needs M >= 1");
  if (!(epsilon > 0.0)) fail(ErrorCode::invalid_argument, "critical value needs epsilon > 0");
  return theory_constant().c * static_cast<double>(m) + epsilon;
}

ScoredAlpha unconstrained_max(const ScanContext& ctx, const ScoreFunction& f) {
  const auto alphas = ctx.alphas();
  const std::size_t m = ctx.num_cells();
  std::vector<std::size_t> order(m);
  std::vector<double> prio(m);
  ScoredAlpha best;
  best.alpha = alphas.front();
  bool have = false;
  for (std::size_t u = 0; u < alphas.size(); ++u) {
    for (std::size_t c = 0; c < m; ++c) prio[c] = ctx.mass_row(c)[u] / ctx.count(c);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return prio[a] != prio[b] ? prio[a] > prio[b] : a < b;
    });
    double na = 0.0;
    double nn = 0.0;
    for (auto c : order) {
      na += ctx.mass_row(c)[u];
      nn += ctx.count(c);
      const double s = f(na, nn, alphas[u]);
      if (!have || s > best.score) {
        have = true;
        best = {alphas[u], s, 0.0, na, nn};
      }
    }
  }
  best.mu_nate = f.divergence(best.n_alpha, best.n_total, best.alpha);
  return best;
}

HoldoutReport holdout_ate(std::span<const Record> records, const CovariateSchema& schema,
                          const TableOptions& table_options, const ScanConfig& cfg,
                          std::size_t folds, std::uint64_t seed) {
  if (folds < 2) fail(ErrorCode::invalid_argument, "holdout needs at least 2 folds");
  if (folds > records.size()) {
    fail(ErrorCode::invalid_argument, "more folds than records");
  }
  cfg.validate();

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(records.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold_of[order[pos]] = pos % folds;

  HoldoutReport rep;
  rep.folds.resize(folds);
  std::vector<std::vector<char>> membership(folds);
  std::vector<char> detected_ok(folds, 0);

  for (std::size_t f = 0; f < folds; ++f) {
    auto& out = rep.folds[f];
    out.fold = f;
    std::vector<Record> train;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (fold_of[i] != f) train.push_back(records[i]);
    }
    try {
      const auto table = build_cell_table(train, schema, table_options);
      const auto scan = tess_scan(table, cfg);
      out.detected = scan.best;
      out.score = scan.score;
    } catch (const Error& e) {
      out.note = std::string("scan failed on training folds: ") + e.what();
      continue;
    }
    detected_ok[f] = 1;
    auto& member = membership[f];
    member.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      member[i] = out.detected.contains(records[i].profile) ? 1 : 0;
    }

    double sum_t = 0.0;
    double sum_c = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (fold_of[i] != f || !member[i]) continue;
      if (records[i].treated) {
        sum_t += records[i].outcome;
        ++out.n_treated;
      } else {
        sum_c += records[i].outcome;
        ++out.n_control;
      }
    }
    if (out.n_treated == 0 || out.n_control == 0) {
      out.note = "holdout fold has an empty arm inside the detected subpopulation";
      continue;
    }
    out.estimable = true;
    out.mean_difference = sum_t / static_cast<double>(out.n_treated) -
                          sum_c / static_cast<double>(out.n_control);
    rep.mean_estimate += out.mean_difference;
    ++rep.estimable_folds;
  }
  if (rep.estimable_folds > 0) rep.mean_estimate /= static_cast<double>(rep.estimable_folds);

  double agree = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < folds; ++a) {
    for (std::size_t b = a + 1; b < folds; ++b) {
      if (!detected_ok[a] || !detected_ok[b]) continue;
      std::size_t same = 0;
      for (std::size_t i = 0; i < records.size(); ++i) same += membership[a][i] == membership[b][i];
      agree += static_cast<double>(same) / static_cast<double>(records.size());
      ++pairs;
    }
  }
  if (pairs > 0) rep.detection_agreement = agree / static_cast<double>(pairs);
  return rep;
}

RecoveryReport recovery_conditions(const Subpopulation& truth, const CellTable& table,
                                   double alpha) {
  truth.validate(table.schema());
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");

  RecoveryReport rep;
  rep.alpha = alpha;
  double aff_mass = 0.0;
  double total_mass = 0.0;
  bool any_affected = false;
  bool bj_ok = true;
  const auto cells = table.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].treated_count() == 0) continue;
    CellSignal sig;
    sig.cell = c;
    sig.affected = truth.contains(cells[c].profile);
    sig.n_alpha = cell_mass(cells[c], alpha);
    sig.n_total = static_cast<double>(cells[c].treated_count());
    sig.r_mle = sig.n_alpha / sig.n_total - alpha;
    total_mass += sig.n_total;
    if (sig.affected) {
      aff_mass += sig.n_total;
      rep.r_aff_high = any_affected ? std::max(rep.r_aff_high, sig.r_mle) : sig.r_mle;
      rep.r_aff_low = any_affected ? std::min(rep.r_aff_low, sig.r_mle) : sig.r_mle;
      any_affected = true;
      if (sig.n_alpha / sig.n_total < 0.5) bj_ok = false;
    } else {
      rep.r_unaff_high = rep.r_unaff_high ? std::max(*rep.r_unaff_high, sig.r_mle) : sig.r_mle;
    }
    rep.cells.push_back(sig);
  }
  if (!any_affected) {
    fail(ErrorCode::degenerate, "true subpopulation covers no treatment cell");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  rep.eta = aff_mass / total_mass;
  if (rep.r_aff_low > 0.0) {
    rep.nu_ratio = rep.r_aff_high / rep.r_aff_low;
    rep.delta_ratio = (!rep.r_unaff_high || *rep.r_unaff_high <= 0.0)
                          ? inf
                          : rep.r_aff_low / *rep.r_unaff_high;
    rep.homogeneous_ok = rep.nu_ratio < 2.0;
    rep.strong_ok = rep.delta_ratio > 2.0 / rep.eta;
  } else {
    rep.nu_ratio = inf;
    rep.delta_ratio = 0.0;
  }
  rep.bj_regime_ok = bj_ok;
  return rep;
}

}  // namespace tess
