#include "tess/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tess/error.hpp"
#include "tess/inference.hpp"
#include "tess/parallel.hpp"

namespace tess {

std::string_view to_string(Alternative a) noexcept {
  return a == Alternative::mean_shift ? "mean_shift" : "symmetric_mixture";
}

Alternative parse_alternative(std::string_view text) {
  if (text == "mean_shift" || text == "mean-shift") return Alternative::mean_shift;
  if (text == "symmetric_mixture" || text == "mixture") return Alternative::symmetric_mixture;
  fail(ErrorCode::invalid_argument,
       "unknown alternative '" + std::string(text) + "' (expected mean_shift or mixture)");
}

std::string_view to_string(PowerStatistic s) noexcept {
  return s == PowerStatistic::tess ? "tess" : "mean_difference";
}

PowerStatistic parse_power_statistic(std::string_view text) {
  if (text == "tess") return PowerStatistic::tess;
  if (text == "mean_difference" || text == "mean-difference") return PowerStatistic::mean_difference;
  fail(ErrorCode::invalid_argument,
       "unknown statistic '" + std::string(text) + "' (expected tess or mean_difference)");
}

Dataset synthetic_base(const SyntheticBase& base, std::uint64_t seed) {
  if (base.records == 0) fail(ErrorCode::invalid_argument, "synthetic base needs records");
  if (!(base.treat_prob > 0.0 && base.treat_prob < 1.0)) {
    fail(ErrorCode::invalid_argument, "treatment probability must lie in (0, 1)");
  }
  Dataset ds{CovariateSchema::synthetic(base.arities), {}};
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(base.treat_prob);
  ds.records.resize(base.records);
  for (auto& r : ds.records) {
    r.profile.resize(base.arities.size());
    for (std::size_t j = 0; j < base.arities.size(); ++j) {
      std::uniform_int_distribution<ValueIndex> pick(0, static_cast<ValueIndex>(base.arities[j] - 1));
      r.profile[j] = pick(rng);
    }
    r.treated = coin(rng);
  }
  return ds;
}

void SimSpec::validate(std::size_t dims) const {
  if (num_covs > dims) {
    fail(ErrorCode::invalid_argument, "num_covs exceeds the number of covariates");
  }
  if (!(value_prob > 0.0 && value_prob <= 1.0)) {
    fail(ErrorCode::invalid_argument, "value_prob must lie in (0, 1]");
  }
  if (replicates == 0) fail(ErrorCode::invalid_argument, "replicates must be positive");
  if (null_copies < kMinPermutations) {
    fail(ErrorCode::invalid_argument,
         "null_copies must be at least " + std::to_string(kMinPermutations));
  }
  if (!(gamma > 0.0 && gamma < 1.0)) fail(ErrorCode::invalid_argument, "gamma must lie in (0, 1)");
  if (!(effect >= 0.0)) fail(ErrorCode::invalid_argument, "effect must be non-negative");
}

Subpopulation generate_affected_subpopulation(const CovariateSchema& schema,
                                              std::size_t num_covs, double value_prob,
                                              std::uint64_t seed) {
  if (num_covs > schema.dims()) {
    fail(ErrorCode::invalid_argument, "num_covs exceeds the number of covariates");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> modes(schema.dims());
  std::iota(modes.begin(), modes.end(), std::size_t{0});
  std::shuffle(modes.begin(), modes.end(), rng);

  auto s = Subpopulation::full(schema);
  std::bernoulli_distribution keep(std::min(value_prob, 1.0));
  for (std::size_t k = 0; k < num_covs; ++k) {
    const auto j = modes[k];
    auto& v = s.values[j];
    v.clear();
    while (v.empty()) {
      for (std::size_t m = 0; m < schema.arity(j); ++m) {
        if (keep(rng)) v.push_back(static_cast<ValueIndex>(m));
      }
    }
  }
  return s;
}

std::vector<Record> inject(std::span<const Record> base, const Subpopulation& affected,
                           Alternative alternative, double effect, std::uint64_t seed) {
  std::vector<Record> out(base.begin(), base.end());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (auto& r : out) {
    double y = unit(rng);
    if (r.treated && affected.contains(r.profile)) {
      if (alternative == Alternative::mean_shift) {
        y += effect;
      } else {
        y += sign(rng) ? effect : -effect;
      }
    }
    r.outcome = y;
  }
  return out;
}

Accuracy accuracy(const Subpopulation& detected, const Subpopulation& truth,
                  std::span<const Record> records) {
  std::size_t both = 0;
  std::size_t either = 0;
  for (const auto& r : records) {
    if (!r.treated) continue;
    const bool d = detected.contains(r.profile);
    const bool t = truth.contains(r.profile);
    both += d && t;
    either += d || t;
  }
  if (either == 0) return {1.0, true};
  return {static_cast<double>(both) / static_cast<double>(either), false};
}

double welch_t_statistic(std::span<const Record> records) {
  double sum[2] = {0, 0};
  double sq[2] = {0, 0};
  double n[2] = {0, 0};
  for (const auto& r : records) {
    const int k = r.treated ? 1 : 0;
    sum[k] += r.outcome;
    sq[k] += r.outcome * r.outcome;
    n[k] += 1.0;
  }
  if (n[0] < 2.0 || n[1] < 2.0) return 0.0;
  double mean[2];
  double var[2];
  for (int k = 0; k < 2; ++k) {
    mean[k] = sum[k] / n[k];
    var[k] = std::max(0.0, (sq[k] - n[k] * mean[k] * mean[k]) / (n[k] - 1.0));
  }
  const double se = std::sqrt(var[1] / n[1] + var[0] / n[0]);
  return se > 0.0 ? std::abs(mean[1] - mean[0]) / se : 0.0;
}

std::pair<double, double> binomial_band(std::size_t n, double p, double level) {
  const double tail = (1.0 - level) / 2.0;
  std::vector<double> pmf(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    const double log_pmf = std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1) +
                           kk * std::log(p) + (nn - kk) * std::log1p(-p);
    pmf[k] = std::exp(log_pmf);
  }
  std::size_t lo = 0;
  double below = 0.0;  // P(X < lo + 1)
  while (lo < n && below + pmf[lo] <= tail) {
    below += pmf[lo];
    ++lo;
  }
  std::size_t hi = n;
  double above = 0.0;  // P(X > hi - 1)
  while (hi > 0 && above + pmf[hi] <= tail) {
    above += pmf[hi];
    --hi;
  }
  const double nn = static_cast<double>(n);
  return {static_cast<double>(lo) / nn, static_cast<double>(hi) / nn};
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

struct Evaluation {
  double score = 0.0;
  std::optional<Subpopulation> detected;
};

Evaluation evaluate(std::span<const Record> records, const CovariateSchema& schema,
                    const TableOptions& table_options, const ScanConfig& cfg,
                    PowerStatistic statistic) {
  if (statistic == PowerStatistic::mean_difference) return {welch_t_statistic(records), {}};
  const auto table = build_cell_table(records, schema, table_options);
  if (table.treatment_cells() == 0) return {0.0, {}};
  auto scan = tess_scan(table, cfg);
  return {scan.score, std::move(scan.best)};
}

}  // namespace

PowerReport detection_power_experiment(const SimSpec& spec, const TableOptions& table_options,
                                       const ScanConfig& cfg, PowerStatistic statistic,
                                       const std::optional<Dataset>& base) {
  cfg.validate();
  const Dataset ds = base ? *base : synthetic_base(spec.synthetic, derive_seed(spec.seed, ~0ULL));
  spec.validate(ds.schema.dims());

  ScanConfig inner = cfg;
  inner.threads = 1;

  PowerReport rep;
  rep.replicates.resize(spec.replicates);
  std::size_t rejected = 0;
  double acc_sum = 0.0;
  std::size_t acc_count = 0;
  for (std::size_t r = 0; r < spec.replicates; ++r) {
    const std::uint64_t rseed = derive_seed(spec.seed, r);
    auto& out = rep.replicates[r];
    out.index = r;
    out.affected = generate_affected_subpopulation(ds.schema, spec.num_covs, spec.value_prob,
                                                   derive_seed(rseed, 0));
    for (const auto& rec : ds.records) out.affected_treated += rec.treated && out.affected.contains(rec.profile);

    const auto data = inject(ds.records, out.affected, spec.alternative, spec.effect,
                             derive_seed(rseed, 1));
    auto obs = evaluate(data, ds.schema, table_options, inner, statistic);
    out.observed = obs.score;
    if (obs.detected) {
      out.accuracy = accuracy(*obs.detected, out.affected, data);
      out.detected = std::move(obs.detected);
      acc_sum += out.accuracy->value;
      ++acc_count;
    }

    std::vector<double> nulls(spec.null_copies);
    parallel_for(spec.null_copies, cfg.threads, [&](std::size_t k) {
      // Effect 0 redraws every outcome from f0.
      const auto null_data = inject(ds.records, out.affected, spec.alternative, 0.0,
                                    derive_seed(rseed, 2 + k));
      nulls[k] = evaluate(null_data, ds.schema, table_options, inner, statistic).score;
    });
    out.p_value = rank_p_value(out.observed, nulls);
    out.rejected = out.p_value <= spec.gamma;
    rejected += out.rejected;
  }
  rep.power = static_cast<double>(rejected) / static_cast<double>(spec.replicates);
  std::tie(rep.ci_low, rep.ci_high) = wilson_interval(rejected, spec.replicates);
  std::tie(rep.null_band_low, rep.null_band_high) =
      binomial_band(spec.replicates, spec.gamma, 0.95);
  rep.mean_accuracy = acc_count > 0 ? acc_sum / static_cast<double>(acc_count) : 0.0;
  return rep;
}

}  // namespace tess
