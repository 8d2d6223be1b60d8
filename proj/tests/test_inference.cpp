#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "tess/error.hpp"
#include "tess/parallel.hpp"
#include "tess/inference.hpp"
#include "tess/oracle.hpp"

using namespace tess;

TEST_CASE("rank p-value includes the observed replicate") {
  std::vector<double> nulls(199, 1.0);
  CHECK(rank_p_value(2.0, nulls) == doctest::Approx(0.005));
  CHECK(rank_p_value(1.0, nulls) == 1.0);
  nulls[0] = 5.0;
  CHECK(rank_p_value(2.0, nulls) == doctest::Approx(0.01));
}

namespace {

std::vector<Record> random_records(std::uint64_t seed, std::size_t n, std::size_t values,
                                   double shift_value0 = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<ValueIndex> v(0, static_cast<ValueIndex>(values - 1));
  std::bernoulli_distribution coin(0.5);
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    Record r{z(rng), coin(rng), {v(rng), v(rng)}};
    if (r.treated && r.profile[0] == 0) r.outcome += shift_value0;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("within-profile permutation keeps arm counts per profile") {
  const auto records = random_records(1, 300, 3);
  const auto shuffled = permute_within_profiles(records, 77);
  std::map<Profile, std::pair<int, int>> before, after;
  for (const auto& r : records) (r.treated ? before[r.profile].first : before[r.profile].second)++;
  for (const auto& r : shuffled) (r.treated ? after[r.profile].first : after[r.profile].second)++;
  CHECK(before == after);
  bool moved = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].outcome == shuffled[i].outcome);
    CHECK(records[i].profile == shuffled[i].profile);
    moved = moved || records[i].treated != shuffled[i].treated;
  }
  CHECK(moved);
}

TEST_CASE("permutation test flags a strong effect and reports single-arm profiles") {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{3, 3});
  auto records = random_records(2, 600, 3, 2.0);
  records.push_back({0.0, true, {2, 2}});
  ScanConfig cfg;
  cfg.restarts = 5;
  const auto rep = permutation_test(records, schema, {}, cfg, 19, 0.05, 4);
  CHECK(rep.null_scores.size() == 19);
  CHECK(rep.p_value == doctest::Approx(0.05));
  CHECK(rep.reject);
  CHECK(rep.single_arm_profiles == 0);

  std::vector<Record> lopsided = random_records(3, 200, 3);
  for (auto& r : lopsided) {
    if (r.profile == Profile{1, 1}) r.treated = true;
  }
  const auto rep2 = permutation_test(lopsided, schema, {}, cfg, 19, 0.05, 4);
  CHECK(rep2.single_arm_profiles == 1);
  CHECK(rep2.p_value > 0.0);
  CHECK(rep2.p_value <= 1.0);
  CHECK(rep2.reject == (rep2.p_value <= 0.05));

  CHECK_THROWS_AS((void)permutation_test(records, schema, {}, cfg, 18, 0.05, 4), Error);
}

TEST_CASE("permutation test is reproducible") {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{3, 3});
  const auto records = random_records(5, 300, 3, 0.5);
  ScanConfig cfg;
  cfg.restarts = 3;
  const auto a = permutation_test(records, schema, {}, cfg, 19, 0.05, 8);
  cfg.threads = 2;
  const auto b = permutation_test(records, schema, {}, cfg, 19, 0.05, 8);
  CHECK(a.null_scores == b.null_scores);
  CHECK(a.p_value == b.p_value);
}

TEST_CASE("null slope constant") {
  const auto t = theory_constant();
  CHECK(std::abs(t.c - 0.202) <= 0.001);
  CHECK(t.c == doctest::Approx(0.2024564901880247).epsilon(1e-9));
  CHECK(t.argmax_z == doctest::Approx(0.6120031752934423).epsilon(1e-5));
  const double g0 = null_slope_integrand(0.0);
  CHECK(g0 == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  CHECK(g0 < t.c);
  // Dense grid never exceeds the refined maximum.
  for (double z = -3.0; z <= 5.0; z += 1e-4) CHECK(null_slope_integrand(z) <= t.c + 1e-15);
}

TEST_CASE("critical value is linear in M") {
  const double c = theory_constant().c;
  CHECK(critical_value(100, 1.0) == doctest::Approx(100 * c + 1));
  CHECK(std::abs(critical_value(100, 1.0) - 21.2) < 0.1);
  CHECK(critical_value(1, 0.3) == doctest::Approx(c + 0.3));
  CHECK(critical_value(200, 0.5) == doctest::Approx(2 * critical_value(100, 0.5) - 0.5));
  CHECK_THROWS_AS((void)critical_value(0, 1.0), Error);
  CHECK_THROWS_AS((void)critical_value(5, 0.0), Error);
}

TEST_CASE("unconstrained maximum bounds every rectangular score") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = oracle_instance({}, seed);
    const auto table = build_cell_table(ds.records, ds.schema);
    const ScoreFunction f{ScoreKind::na};
    const ScanContext ctx(table, 0.01, 0.5);
    const auto free_best = unconstrained_max(ctx, f);
    const auto rect = exhaustive_scan(table, f, 0.01, 0.5);
    CHECK(free_best.score >= rect.score - 1e-9);
  }
}

TEST_CASE("null scores per cell stay near the asymptotic slope") {
  // H0 with 20 controls per treated unit, so the empirical reference is close
  // to the true null; p-value noise inflates the slope by 1 + n_t / n_c.
  const double bound = theory_constant().c * (1.0 + 1.0 / 20.0) + 0.1;
  for (std::size_t m : {50, 200, 500}) {
    double total = 0.0;
    const int reps = 4;
    for (int rep = 0; rep < reps; ++rep) {
      std::mt19937_64 rng(derive_seed(m, rep));
      std::normal_distribution<double> z(0.0, 1.0);
      const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{m});
      std::vector<Record> records;
      for (ValueIndex v = 0; v < m; ++v) {
        for (int i = 0; i < 21 * 60; ++i) records.push_back({z(rng), i % 21 == 0, {v}});
      }
      TableOptions opt;
      opt.sidedness = Sidedness::upper;
      const auto table = build_cell_table(records, schema, opt);
      const ScanContext ctx(table, 0.1, 0.1 + 1e-9);
      total += unconstrained_max(ctx, ScoreFunction{ScoreKind::na}).score / static_cast<double>(m);
    }
    CAPTURE(m);
    CHECK(total / reps < bound);
  }
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_isf(double p) {
  double lo = -10.0;
  double hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_sf(mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("max score grows linearly in k M n under a fixed alternative") {
  const std::size_t m = 20;
  const double k = 0.5;
  const double shift = 0.5;
  // Predicted slope per unit of n: max over alpha of (beta - alpha)^2 k M / (2 alpha (1 - alpha)).
  double predicted = 0.0;
  for (double a = 0.01; a <= 0.5; a += 1e-4) {
    const double beta = normal_sf(normal_isf(a) - shift);
    predicted = std::max(predicted, (beta - a) * (beta - a) * k * m / (2 * a * (1 - a)));
  }
  std::vector<double> xs, ys;
  for (int n : {50, 100, 200}) {
    double total = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
      std::mt19937_64 rng(derive_seed(static_cast<std::uint64_t>(n), rep));
      std::normal_distribution<double> z(0.0, 1.0);
      const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{m});
      std::vector<Record> records;
      for (ValueIndex v = 0; v < m; ++v) {
        const bool affected = v < k * m;
        for (int i = 0; i < 21 * n; ++i) {
          const bool treated = i % 21 == 0;
          records.push_back({z(rng) + (treated && affected ? shift : 0.0), treated, {v}});
        }
      }
      TableOptions opt;
      opt.sidedness = Sidedness::upper;
      const auto table = build_cell_table(records, schema, opt);
      ScanConfig cfg;
      cfg.score = ScoreFunction{ScoreKind::na};
      cfg.alpha_min = 0.01;
      cfg.restarts = 5;
      total += tess_scan(table, cfg).score;
    }
    xs.push_back(n);
    ys.push_back(total / reps);
  }
  const double mx = (xs[0] + xs[1] + xs[2]) / 3;
  const double my = (ys[0] + ys[1] + ys[2]) / 3;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  CAPTURE(slope);
  CAPTURE(predicted);
  CHECK(std::abs(slope / predicted - 1.0) <= 0.2);
}

TEST_CASE("holdout estimates vanish when arms are identical") {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{2, 2});
  auto records = random_records(6, 400, 2);
  for (auto& r : records) r.outcome = 1.5;
  ScanConfig cfg;
  cfg.restarts = 3;
  const auto rep = holdout_ate(records, schema, {}, cfg, 5, 1);
  CHECK(rep.folds.size() == 5);
  for (const auto& f : rep.folds) {
    if (f.estimable) CHECK(f.mean_difference == 0.0);
  }
  CHECK(rep.estimable_folds > 0);
  CHECK(rep.mean_estimate == 0.0);
}

TEST_CASE("holdout recovers an injected mean shift") {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{3, 3});
  const auto records = random_records(7, 3000, 3, 2.0);
  ScanConfig cfg;
  cfg.restarts = 5;
  const auto rep = holdout_ate(records, schema, {}, cfg, 10, 2);
  CHECK(rep.estimable_folds == 10);
  CHECK(std::abs(rep.mean_estimate - 2.0) < 0.4);
  CHECK(rep.detection_agreement > 0.9);
}

TEST_CASE("leave-one-out holdout runs on tiny data") {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{2, 2});
  std::vector<Record> records;
  for (int i = 0; i < 12; ++i) {
    records.push_back({0.1 * i, i % 2 == 0, {static_cast<ValueIndex>(i % 2), static_cast<ValueIndex>((i / 2) % 2)}});
  }
  ScanConfig cfg;
  cfg.restarts = 2;
  const auto rep = holdout_ate(records, schema, {}, cfg, 12, 3);
  CHECK(rep.folds.size() == 12);
  for (const auto& f : rep.folds) {
    if (!f.estimable) CHECK_FALSE(f.note.empty());
  }
  CHECK_THROWS_AS((void)holdout_ate(records, schema, {}, cfg, 1, 3), Error);
  CHECK_THROWS_AS((void)holdout_ate(records, schema, {}, cfg, 13, 3), Error);
}

namespace {

// Cells on one mode; cell v has `sig[v]` of `n[v]` ranges fully significant at 0.1.
CellTable signal_table(const std::vector<std::size_t>& sig, const std::vector<std::size_t>& n) {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{sig.size()});
  std::vector<std::pair<Profile, std::vector<PValueRange>>> spec;
  for (std::size_t v = 0; v < sig.size(); ++v) {
    spec.push_back({{static_cast<ValueIndex>(v)}, testing::split_ranges(sig[v], n[v])});
  }
  return testing::table_from_cells(schema, spec);
}

}  // namespace

TEST_CASE("recovery conditions: maximal separation") {
  const auto table = signal_table({5, 5, 1, 1}, {10, 10, 10, 10});
  const Subpopulation truth{{{0, 1}}};
  const auto r = recovery_conditions(truth, table, 0.1);
  CHECK(r.nu_ratio == doctest::Approx(1.0));
  CHECK(std::isinf(r.delta_ratio));
  CHECK(r.eta == doctest::Approx(0.5));
  CHECK(r.homogeneous_ok);
  CHECK(r.strong_ok);
  CHECK(r.bj_regime_ok);
  CHECK(r.cells.size() == 4);
  CHECK(r.cells[0].r_mle == doctest::Approx(0.4));
}

TEST_CASE("recovery conditions: heterogeneous affected cells") {
  const auto table = signal_table({3, 11, 1}, {10, 20, 10});
  const Subpopulation truth{{{0, 1}}};
  const auto r = recovery_conditions(truth, table, 0.1);
  CHECK(r.nu_ratio == doctest::Approx(2.25));
  CHECK_FALSE(r.homogeneous_ok);
  CHECK_FALSE(r.bj_regime_ok);
}

TEST_CASE("recovery conditions: weak separation") {
  const auto table = signal_table({4, 3}, {10, 10});
  const Subpopulation truth{{{0}}};
  const auto r = recovery_conditions(truth, table, 0.1);
  CHECK(r.eta == doctest::Approx(0.5));
  CHECK(r.delta_ratio == doctest::Approx(1.5));
  CHECK_FALSE(r.strong_ok);
}

TEST_CASE("recovery conditions refuse a truth without treatment cells") {
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{3});
  const auto table = testing::table_from_cells(schema, {{{0}, testing::split_ranges(2, 4)}});
  CHECK_THROWS_AS((void)recovery_conditions(Subpopulation{{{1, 2}}}, table, 0.1), Error);
}
