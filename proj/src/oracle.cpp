#include "tess/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tess/error.hpp"
#include "tess/parallel.hpp"

namespace tess {

std::uint64_t rectangular_subset_count(const CovariateSchema& schema) noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < schema.dims(); ++j) {
    const std::size_t a = schema.arity(j);
    if (a >= 63) return kMax;
    const std::uint64_t per_mode = (std::uint64_t{1} << a) - 1;
    if (total > kMax / per_mode) return kMax;
    total *= per_mode;
  }
  return total;
}

namespace {

std::vector<ValueIndex> mask_values(std::uint64_t mask) {
  std::vector<ValueIndex> out;
  for (ValueIndex v = 0; mask != 0; ++v, mask >>= 1) {
    if (mask & 1U) out.push_back(v);
  }
  return out;
}

}  // namespace

OracleResult exhaustive_scan(const CellTable& table, const ScoreFunction& f, double alpha_min,
                             double alpha_max, std::uint64_t cap) {
  const auto& schema = table.schema();
  const std::uint64_t count = rectangular_subset_count(schema);
  if (count > cap) {
    fail(ErrorCode::limit_exceeded, "exhaustive scan would evaluate " + std::to_string(count) +
                                        " subpopulations (cap " + std::to_string(cap) + ")");
  }
  if (table.treatment_cells() == 0) {
    fail(ErrorCode::degenerate, "no treatment cell to scan");
  }
  const auto alphas = candidate_alphas(table.all_ranges(), alpha_min, alpha_max);

  // Per-cell mass at every alpha, treatment cells only, in table order.
  std::vector<const Cell*> cells;
  std::vector<std::vector<double>> rows;
  for (const auto& c : table.cells()) {
    if (c.treated_count() == 0) continue;
    cells.push_back(&c);
    auto& row = rows.emplace_back(alphas.size());
    for (std::size_t u = 0; u < alphas.size(); ++u) row[u] = cell_mass(c, alphas[u]);
  }

  const std::size_t d = schema.dims();
  std::vector<std::uint64_t> masks(d, 1);
  std::vector<std::uint64_t> limits(d);
  for (std::size_t j = 0; j < d; ++j) limits[j] = (std::uint64_t{1} << schema.arity(j)) - 1;

  OracleResult best;
  bool have = false;
  std::vector<double> mass(alphas.size());
  Subpopulation s;
  s.values.resize(d);
  while (true) {
    for (std::size_t j = 0; j < d; ++j) s.values[j] = mask_values(masks[j]);
    std::fill(mass.begin(), mass.end(), 0.0);
    double n_total = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!s.contains(cells[c]->profile)) continue;
      for (std::size_t u = 0; u < alphas.size(); ++u) mass[u] += rows[c][u];
      n_total += static_cast<double>(cells[c]->treated_count());
    }
    ScoredAlpha scored;
    scored.alpha = alphas.front();
    if (n_total > 0.0) scored = max_over_alpha(alphas, mass, n_total, f);
    ++best.evaluated;
    if (!have || scored.score > best.score ||
        (scored.score == best.score && s.total_values() < best.best.total_values())) {
      have = true;
      best.best = s;
      best.score = scored.score;
      best.alpha = scored.alpha;
    }

    // Mixed-radix increment, last mode least significant.
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (masks[j] < limits[j]) {
        ++masks[j];
        break;
      }
      masks[j] = 1;
      if (j == 0) return best;
    }
  }
}

SubsetChoice exhaustive_best_subset(std::span<const double> n_alpha, std::span<const double> n,
                                    double alpha, const ScoreFunction& f) {
  const std::size_t k = n.size();
  if (k == 0 || k > kOracleModeArityCap) {
    fail(ErrorCode::limit_exceeded, "exhaustive mode search supports 1.." +
                                        std::to_string(kOracleModeArityCap) + " values");
  }
  SubsetChoice best;
  bool have = false;
  const std::uint64_t limit = (std::uint64_t{1} << k) - 1;
  for (std::uint64_t mask = 1; mask <= limit; ++mask) {
    double na = 0.0;
    double nn = 0.0;
    for (std::size_t v = 0; v < k; ++v) {
      if (mask & (std::uint64_t{1} << v)) {
        na += n_alpha[v];
        nn += n[v];
      }
    }
    const double s = f(na, nn, alpha);
    if (!have || s > best.score) {
      have = true;
      best.values = mask_values(mask);
      best.score = s;
      best.n_alpha = na;
      best.n_total = nn;
    }
  }
  return best;
}

ModeOptimum exhaustive_mode(std::size_t j, const Subpopulation& current, const CellTable& table,
                            const ScoreFunction& f, double alpha_min, double alpha_max) {
  const auto& schema = table.schema();
  current.validate(schema);
  const auto alphas = candidate_alphas(table.all_ranges(), alpha_min, alpha_max);
  const std::size_t arity = schema.arity(j);

  std::vector<std::vector<double>> value_mass(alphas.size(), std::vector<double>(arity, 0.0));
  std::vector<double> value_n(arity, 0.0);
  for (const auto& c : table.cells()) {
    if (c.treated_count() == 0) continue;
    bool member = true;
    for (std::size_t i = 0; i < schema.dims() && member; ++i) {
      if (i == j) continue;
      const auto& keep = current.values[i];
      member = std::binary_search(keep.begin(), keep.end(), c.profile[i]);
    }
    if (!member) continue;
    for (std::size_t u = 0; u < alphas.size(); ++u) {
      value_mass[u][c.profile[j]] += cell_mass(c, alphas[u]);
    }
    value_n[c.profile[j]] += static_cast<double>(c.treated_count());
  }

  ModeOptimum best;
  bool have = false;
  for (std::size_t u = 0; u < alphas.size(); ++u) {
    auto choice = exhaustive_best_subset(value_mass[u], value_n, alphas[u], f);
    if (!have || choice.score > best.scored.score) {
      have = true;
      best.values = std::move(choice.values);
      best.scored.alpha = alphas[u];
      best.scored.score = choice.score;
      best.scored.n_alpha = choice.n_alpha;
      best.scored.n_total = choice.n_total;
    }
  }
  best.scored.mu_nate = f.divergence(best.scored.n_alpha, best.scored.n_total, best.scored.alpha);
  return best;
}

Dataset oracle_instance(const OracleInstanceSpec& spec, std::uint64_t seed) {
  if (spec.modes == 0 || spec.arity == 0) {
    fail(ErrorCode::invalid_argument, "oracle instance needs modes >= 1 and arity >= 1");
  }
  if (spec.min_controls == 0 || spec.min_controls > spec.max_controls ||
      spec.min_treated == 0 || spec.min_treated > spec.max_treated) {
    fail(ErrorCode::invalid_argument, "oracle instance arm sizes are inconsistent");
  }
  const std::vector<std::size_t> arities(spec.modes, spec.arity);
  Dataset ds{CovariateSchema::synthetic(arities), {}};
  const auto affected = generate_affected_subpopulation(
      ds.schema, std::min<std::size_t>(2, spec.modes), 0.5, derive_seed(seed, 0));

  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_int_distribution<std::size_t> n_ctrl(spec.min_controls, spec.max_controls);
  std::uniform_int_distribution<std::size_t> n_trt(spec.min_treated, spec.max_treated);
  std::normal_distribution<double> unit(0.0, 1.0);
  Profile p(spec.modes, 0);
  while (true) {
    const bool hit = affected.contains(p);
    const auto nc = n_ctrl(rng);
    const auto nt = n_trt(rng);
    for (std::size_t k = 0; k < nc; ++k) ds.records.push_back({unit(rng), false, p});
    for (std::size_t k = 0; k < nt; ++k) {
      ds.records.push_back({unit(rng) + (hit ? spec.effect : 0.0), true, p});
    }
    std::size_t j = spec.modes;
    while (j > 0) {
      --j;
      if (++p[j] < spec.arity) break;
      p[j] = 0;
      if (j == 0) return ds;
    }
  }
}

namespace {

bool close(double a, double b) {
  return std::abs(a - b) <= kOracleTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

OracleCheckReport oracle_check(const OracleInstanceSpec& spec, std::size_t instances,
                               const TableOptions& table_options, const ScanConfig& cfg,
                               std::uint64_t seed) {
  cfg.validate();
  if (instances == 0) fail(ErrorCode::invalid_argument, "oracle check needs instances >= 1");
  const std::vector<std::size_t> arities(spec.modes, spec.arity);
  const auto count = rectangular_subset_count(CovariateSchema::synthetic(arities));
  if (count > kOracleSubsetCap) {
    fail(ErrorCode::limit_exceeded, "oracle check grid has " + std::to_string(count) +
                                        " subpopulations (cap " +
                                        std::to_string(kOracleSubsetCap) + ")");
  }

  struct Outcome {
    std::size_t mode_checks = 0;
    std::size_t mode_agreements = 0;
    bool match = false;
    bool exceeded = false;
    double gap = 0.0;
  };
  std::vector<Outcome> results(instances);
  ScanConfig inner = cfg;
  inner.threads = 1;
  parallel_for(instances, cfg.threads, [&](std::size_t i) {
    const auto iseed = derive_seed(seed, i);
    const auto ds = oracle_instance(spec, iseed);
    const auto table = build_cell_table(ds.records, ds.schema, table_options);
    const ScanContext ctx(table, cfg.alpha_min, cfg.alpha_max);
    auto& out = results[i];

    const auto start = random_subpopulation(ctx, cfg.inclusion_prob, derive_seed(iseed, 2));
    for (std::size_t j = 0; j < ds.schema.dims(); ++j) {
      const auto fast = optimize_mode(ctx, j, start, cfg.score);
      const auto slow = exhaustive_mode(j, start, table, cfg.score, cfg.alpha_min, cfg.alpha_max);
      ++out.mode_checks;
      if (close(fast.scored.score, slow.scored.score)) ++out.mode_agreements;
    }

    const auto exact = exhaustive_scan(table, cfg.score, cfg.alpha_min, cfg.alpha_max);
    inner.seed = derive_seed(iseed, 3);
    const auto scan = tess_scan(ctx, inner);
    out.match = close(scan.score, exact.score);
    out.exceeded = !out.match && scan.score > exact.score;
    out.gap = exact.score - scan.score;
  });

  OracleCheckReport rep;
  rep.instances = instances;
  for (const auto& r : results) {
    rep.mode_checks += r.mode_checks;
    rep.mode_agreements += r.mode_agreements;
    rep.scan_matches += r.match;
    rep.scan_exceeded += r.exceeded;
    rep.max_scan_gap = std::max(rep.max_scan_gap, r.gap);
  }
  return rep;
}

}  // namespace tess
