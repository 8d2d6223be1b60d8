#include "tess/scan.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "tess/error.hpp"
#include "tess/parallel.hpp"

namespace tess {

void ScanConfig::validate() const {
  if (!(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max < 1.0)) {
    fail(ErrorCode::invalid_argument, "alpha window must satisfy 0 < alpha_min < alpha_max < 1");
  }
  if (restarts == 0) fail(ErrorCode::invalid_argument, "restarts must be positive");
  if (max_cycles == 0) fail(ErrorCode::invalid_argument, "max_cycles must be positive");
  if (!(inclusion_prob > 0.0 && inclusion_prob < 1.0)) {
    fail(ErrorCode::invalid_argument, "inclusion_prob must lie in (0, 1)");
  }
}

ScanContext::ScanContext(const CellTable& table, double alpha_min, double alpha_max)
    : table_(&table), dims_(table.schema().dims()) {
  if (table.treatment_cells() == 0) {
    fail(ErrorCode::degenerate,
         "no treated unit has a control reference in its covariate profile; nothing to scan");
  }
  alphas_ = candidate_alphas(table.all_ranges(), alpha_min, alpha_max);
  const std::size_t m = table.treatment_cells();
  profiles_.reserve(m * dims_);
  mass_.reserve(m * alphas_.size());
  counts_.reserve(m);
  for (const auto& c : table.cells()) {
    if (c.treated_count() == 0) continue;
    profiles_.insert(profiles_.end(), c.profile.begin(), c.profile.end());
    for (double a : alphas_) mass_.push_back(cell_mass(c, a));
    counts_.push_back(static_cast<double>(c.treated_count()));
  }
}

ScoredAlpha ScanContext::evaluate(const Subpopulation& s, const ScoreFunction& f) const {
  const std::size_t u_count = alphas_.size();
  std::vector<double> mass(u_count, 0.0);
  double n_total = 0.0;
  for (std::size_t c = 0; c < counts_.size(); ++c) {
    if (!s.contains(profile(c))) continue;
    const auto row = mass_row(c);
    for (std::size_t u = 0; u < u_count; ++u) mass[u] += row[u];
    n_total += counts_[c];
  }
  if (n_total <= 0.0) {
    ScoredAlpha empty;
    empty.alpha = alphas_.front();
    return empty;
  }
  return max_over_alpha(alphas_, mass, n_total, f);
}

std::optional<double> priority(double cell_n_alpha, double cell_n) noexcept {
  if (cell_n <= 0.0) return std::nullopt;
  return cell_n_alpha / cell_n;
}

namespace {

// Scans the prefixes of `order`; updates best when strictly better.
void scan_prefixes(std::span<const ValueIndex> order, std::span<const double> n_alpha,
                   std::span<const double> n, double alpha, const ScoreFunction& f,
                   bool& have, double& best_score, std::size_t& best_len,
                   double& best_na, double& best_n, bool& best_is_suffix, bool suffix) {
  double na = 0.0;
  double nn = 0.0;
  for (std::size_t t = 0; t < order.size(); ++t) {
    na += n_alpha[order[t]];
    nn += n[order[t]];
    const double s = f(na, nn, alpha);
    if (!have || s > best_score) {
      have = true;
      best_score = s;
      best_len = t + 1;
      best_na = na;
      best_n = nn;
      best_is_suffix = suffix;
    }
  }
}

}  // namespace

SubsetChoice ltss_best_subset(std::span<const double> n_alpha, std::span<const double> n,
                              double alpha, const ScoreFunction& f) {
  std::vector<ValueIndex> order;
  std::vector<double> prio(n.size(), 0.0);
  for (std::size_t v = 0; v < n.size(); ++v) {
    if (auto p = priority(n_alpha[v], n[v])) {
      prio[v] = *p;
      order.push_back(static_cast<ValueIndex>(v));
    }
  }
  SubsetChoice out;
  if (order.empty()) {
    out.values = {0};
    return out;
  }
  std::sort(order.begin(), order.end(), [&](ValueIndex a, ValueIndex b) {
    if (prio[a] != prio[b]) return prio[a] > prio[b];
    return a < b;
  });

  bool have = false;
  double best_score = 0.0;
  std::size_t best_len = 0;
  bool best_is_suffix = false;
  scan_prefixes(order, n_alpha, n, alpha, f, have, best_score, best_len, out.n_alpha,
                out.n_total, best_is_suffix, false);
  std::vector<ValueIndex> reversed;
  if (f.symmetric) {
    // A convex but non-monotone score can also peak on the low-priority end.
    reversed.assign(order.rbegin(), order.rend());
    scan_prefixes(reversed, n_alpha, n, alpha, f, have, best_score, best_len, out.n_alpha,
                  out.n_total, best_is_suffix, true);
  }
  const auto& src = best_is_suffix ? reversed : order;
  out.values.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(best_len));
  std::sort(out.values.begin(), out.values.end());
  out.score = best_score;
  return out;
}

ModeAggregate aggregate_mode(const ScanContext& ctx, std::size_t j,
                             const Subpopulation& current) {
  const auto& schema = ctx.table().schema();
  const std::size_t d = ctx.dims();
  const std::size_t u_count = ctx.alphas().size();
  const std::size_t arity = schema.arity(j);

  std::vector<std::vector<char>> keep(d);
  for (std::size_t i = 0; i < d; ++i) {
    keep[i].assign(schema.arity(i), 0);
    for (auto v : current.values[i]) keep[i][v] = 1;
  }

  ModeAggregate agg;
  agg.mass.assign(arity * u_count, 0.0);
  agg.n.assign(arity, 0.0);
  for (std::size_t c = 0; c < ctx.num_cells(); ++c) {
    const auto prof = ctx.profile(c);
    bool member = true;
    for (std::size_t i = 0; i < d && member; ++i) {
      if (i != j && !keep[i][prof[i]]) member = false;
    }
    if (!member) continue;
    const auto v = prof[j];
    const auto row = ctx.mass_row(c);
    double* dst = agg.mass.data() + v * u_count;
    for (std::size_t u = 0; u < u_count; ++u) dst[u] += row[u];
    agg.n[v] += ctx.count(c);
  }
  return agg;
}

ModeOptimum optimize_mode(const ScanContext& ctx, std::size_t j, const Subpopulation& current,
                          const ScoreFunction& f) {
  const auto agg = aggregate_mode(ctx, j, current);
  const auto alphas = ctx.alphas();
  const std::size_t arity = agg.n.size();
  std::vector<double> na(arity);

  ModeOptimum best;
  bool have = false;
  for (std::size_t u = 0; u < alphas.size(); ++u) {
    for (std::size_t v = 0; v < arity; ++v) na[v] = agg.mass[v * alphas.size() + u];
    auto choice = ltss_best_subset(na, agg.n, alphas[u], f);
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

Subpopulation random_subpopulation(const ScanContext& ctx, double inclusion_prob,
                                   std::uint64_t seed) {
  const auto& schema = ctx.table().schema();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(inclusion_prob);
  const auto draw = [&] {
    Subpopulation s;
    s.values.resize(schema.dims());
    for (std::size_t j = 0; j < schema.dims(); ++j) {
      auto& v = s.values[j];
      while (v.empty()) {
        for (std::size_t m = 0; m < schema.arity(j); ++m) {
          if (coin(rng)) v.push_back(static_cast<ValueIndex>(m));
        }
      }
    }
    return s;
  };
  // A start that covers no treated unit cannot ascend; redraw a bounded number of times.
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto s = draw();
    for (std::size_t c = 0; c < ctx.num_cells(); ++c) {
      if (s.contains(ctx.profile(c))) return s;
    }
  }
  return Subpopulation::full(schema);
}

RestartOutcome scan_restart(const ScanContext& ctx, const ScanConfig& cfg,
                            std::uint64_t restart_seed) {
  RestartOutcome out;
  out.best = random_subpopulation(ctx, cfg.inclusion_prob, restart_seed);
  out.scored = ctx.evaluate(out.best, cfg.score);
  out.trace.push_back(out.scored.score);

  const std::size_t d = ctx.dims();
  for (std::size_t cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    out.cycles = cycle;
    bool changed = false;
    for (std::size_t j = 0; j < d; ++j) {
      auto opt = optimize_mode(ctx, j, out.best, cfg.score);
      if (opt.values == out.best.values[j]) continue;
      Subpopulation candidate = out.best;
      candidate.values[j] = std::move(opt.values);
      const auto scored = ctx.evaluate(candidate, cfg.score);
      const bool better = scored.score > out.scored.score;
      const bool leaner = scored.score == out.scored.score &&
                          candidate.total_values() < out.best.total_values();
      if (better || leaner) {
        out.best = std::move(candidate);
        out.scored = scored;
        out.trace.push_back(scored.score);
        changed = true;
      }
    }
    if (!changed) return out;
  }
  out.hit_max_cycles = true;
  return out;
}

ScanResult tess_scan(const CellTable& table, const ScanConfig& cfg) {
  cfg.validate();
  const ScanContext ctx(table, cfg.alpha_min, cfg.alpha_max);
  return tess_scan(ctx, cfg);
}

ScanResult tess_scan(const ScanContext& ctx, const ScanConfig& cfg) {
  cfg.validate();
  if (ctx.alphas().front() != cfg.alpha_min || ctx.alphas().back() != cfg.alpha_max) {
    fail(ErrorCode::invalid_argument, "scan context was built for a different alpha window");
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<RestartOutcome> runs(cfg.restarts);
  parallel_for(cfg.restarts, cfg.threads, [&](std::size_t i) {
    runs[i] = scan_restart(ctx, cfg, derive_seed(cfg.seed, i));
  });

  ScanResult result;
  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    result.restart_scores.push_back(runs[i].scored.score);
    result.cycles_per_restart.push_back(runs[i].cycles);
    if (runs[i].hit_max_cycles) ++result.restarts_hit_max_cycles;
    if (runs[i].scored.score > runs[best].scored.score) best = i;
  }
  const auto& win = runs[best];
  result.best = win.best;
  result.score = win.scored.score;
  result.alpha = win.scored.alpha;
  result.n_alpha = win.scored.n_alpha;
  result.n_total = win.scored.n_total;
  result.mu_nate = win.scored.mu_nate;
  result.best_restart = best;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tess
