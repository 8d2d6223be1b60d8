#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tess/error.hpp"
#include "tess/scan.hpp"

using namespace tess;

namespace {

// Sex x race, treated outcomes first then controls.
std::pair<CovariateSchema, std::vector<Record>> eight_records() {
  CovariateSchema schema({{"sex", {"F", "M"}}, {"race", {"B", "W"}}});
  std::vector<Record> r{
      {2.35, true, {0, 0}},  {2.06, true, {0, 1}},  {2.92, true, {1, 0}},
      {2.27, true, {1, 1}},  {1.73, false, {0, 0}}, {1.84, false, {0, 1}},
      {1.70, false, {1, 0}}, {1.59, false, {1, 1}},
  };
  return {schema, r};
}

}  // namespace

TEST_CASE("eight-record example gives four treatment cells with one control each") {
  const auto [schema, records] = eight_records();
  const auto table = build_cell_table(records, schema);
  CHECK(table.treatment_cells() == 4);
  CHECK(table.cells().size() == 4);
  for (const auto& c : table.cells()) {
    CHECK(c.controls.size() == 1);
    CHECK(c.treated_count() == 1);
  }
  CHECK(table.min_controls() == 1);
  CHECK(table.diagnostics().thin_control_cells == 4);
  CHECK(table.diagnostics().excluded_treated == 0);
}

TEST_CASE("all-control data has no treatment cell and cannot be scanned") {
  auto [schema, records] = eight_records();
  for (auto& r : records) r.treated = false;
  const auto table = build_cell_table(records, schema);
  CHECK(table.treatment_cells() == 0);
  CHECK_THROWS_AS(ScanContext(table, 0.01, 0.5), Error);
  try {
    (void)tess_scan(table, ScanConfig{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
  }
}

TEST_CASE("treated units without controls are excluded or kept with (0, 1]") {
  auto [schema, records] = eight_records();
  records[7].treated = true;  // M/W now has no control
  const auto dropped = build_cell_table(records, schema);
  CHECK(dropped.diagnostics().excluded_treated == 2);
  CHECK(dropped.treatment_cells() == 3);

  auto [s2, r2] = eight_records();
  r2.push_back({3.0, true, {1, 1}});
  r2.erase(r2.begin() + 7);
  const auto excluded = build_cell_table(r2, s2);
  CHECK(excluded.diagnostics().excluded_treated == 2);

  std::vector<Record> one_orphan = eight_records().second;
  one_orphan.push_back({0.5, true, {1, 1}});
  CovariateSchema wide({{"sex", {"F", "M"}}, {"race", {"B", "W", "A"}}});
  one_orphan.push_back({0.7, true, {0, 2}});
  const auto t1 = build_cell_table(one_orphan, wide);
  CHECK(t1.diagnostics().excluded_treated == 1);
  TableOptions keep;
  keep.include_orphans = true;
  const auto t2 = build_cell_table(one_orphan, wide, keep);
  CHECK(t2.diagnostics().excluded_treated == 0);
  CHECK(t2.diagnostics().orphans_included == 1);
  bool found = false;
  for (const auto& c : t2.cells()) {
    if (c.profile == Profile{0, 2}) {
      found = true;
      CHECK(c.ranges.front() == PValueRange{0.0, 1.0});
    }
  }
  CHECK(found);
}

TEST_CASE("invalid inputs are rejected") {
  const auto [schema, records] = eight_records();
  CHECK_THROWS_AS((void)build_cell_table(std::vector<Record>{}, schema), Error);
  auto bad = records;
  bad[5].profile = {0, 3};
  try {
    (void)build_cell_table(bad, schema);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
  CHECK_THROWS_AS(CovariateSchema({{"a", {"x", "x"}}}), Error);
  CHECK_THROWS_AS(CovariateSchema({Covariate{"a", {}}}), Error);
  CHECK_THROWS_AS(CovariateSchema(std::vector<Covariate>{}), Error);

  Subpopulation s{{{0}, {}}};
  CHECK_THROWS_AS(s.validate(schema), Error);
  Subpopulation unsorted{{{1, 0}, {0}}};
  CHECK_THROWS_AS(unsorted.validate(schema), Error);
}

TEST_CASE("subset counts sum masses of member cells") {
  const auto table = testing::table_from_ranges({{{0.0, 0.05}, {0.05, 0.10}, {0.5, 0.55}}});
  const auto full = Subpopulation::full(table.schema());
  auto c = subset_counts(full, table, 0.10);
  CHECK(c.n_alpha == doctest::Approx(2.0));
  CHECK(c.n_total == 3);
  c = subset_counts(full, table, 0.075);
  CHECK(c.n_alpha == doctest::Approx(1.5));

  const auto all_low = testing::table_from_ranges({std::vector<PValueRange>(10, {0.0, 0.05})});
  c = subset_counts(Subpopulation::full(all_low.schema()), all_low, 0.1);
  CHECK(c.n_alpha == 10.0);
  CHECK(c.n_total == 10);
}

TEST_CASE("subset counts are additive over member cells and monotone in alpha") {
  std::mt19937_64 rng(5);
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{3, 2});
  std::vector<std::pair<Profile, std::vector<PValueRange>>> spec;
  for (ValueIndex a = 0; a < 3; ++a) {
    for (ValueIndex b = 0; b < 2; ++b) spec.push_back({{a, b}, testing::dyadic_ranges(rng, 4, 0.3)});
  }
  const auto table = testing::table_from_cells(schema, spec);
  const Subpopulation s{{{0, 2}, {1}}};
  double prev = -1.0;
  for (double alpha : {0.05, 0.125, 0.2, 0.375, 0.6, 0.999}) {
    const auto got = subset_counts(s, table, alpha);
    double expect = 0.0;
    std::size_t n = 0;
    for (const auto& c : table.cells()) {
      if (!s.contains(c.profile)) continue;
      n += c.treated_count();
      for (const auto& r : c.ranges) expect += significance_mass(r, alpha);
    }
    CHECK(got.n_alpha == doctest::Approx(expect));
    CHECK(got.n_total == n);
    CHECK(got.n_alpha >= prev);
    prev = got.n_alpha;
  }
  const Subpopulation single{{{0}, {0}}};
  CHECK(subset_counts(single, table, 0.5).n_total == 4);
}

TEST_CASE("shifting one profile's outcomes leaves its ranges unchanged") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{2});
  std::vector<Record> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back({z(rng), i % 3 == 0, {static_cast<ValueIndex>(i % 2)}});
  }
  for (auto sided : {Sidedness::upper, Sidedness::lower, Sidedness::two}) {
    TableOptions opt;
    opt.sidedness = sided;
    const auto before = build_cell_table(records, schema, opt);
    auto shifted = records;
    for (auto& r : shifted) {
      if (r.profile[0] == 1) r.outcome += 17.25;
    }
    const auto after = build_cell_table(shifted, schema, opt);
    for (std::size_t c = 0; c < before.cells().size(); ++c) {
      CHECK(before.cells()[c].ranges == after.cells()[c].ranges);
    }
  }
}

TEST_CASE("null significance mass averages alpha per unit") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto schema = CovariateSchema::synthetic(std::vector<std::size_t>{4});
  std::vector<Record> records;
  for (int i = 0; i < 8000; ++i) {
    records.push_back({z(rng), i % 2 == 0, {static_cast<ValueIndex>((i / 2) % 4)}});
  }
  TableOptions opt;
  opt.sidedness = Sidedness::upper;
  const auto table = build_cell_table(records, schema, opt);
  const auto full = Subpopulation::full(schema);
  for (double alpha : {0.05, 0.2, 0.5}) {
    const auto c = subset_counts(full, table, alpha);
    const double n = static_cast<double>(c.n_total);
    const double sd = std::sqrt(n * alpha * (1 - alpha));
    CHECK(std::abs(c.n_alpha - alpha * n) < 4 * sd);
  }
}
