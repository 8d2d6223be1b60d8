#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tess/data_model.hpp"
#include "tess/reference.hpp"

namespace testing {

/// One cell per entry of `ranges`, profiles on a 1-mode schema with one value
/// per cell. Each cell gets a single placeholder control.
inline tess::CellTable table_from_ranges(const std::vector<std::vector<tess::PValueRange>>& ranges) {
  const std::vector<std::size_t> arities{ranges.size()};
  auto schema = tess::CovariateSchema::synthetic(arities);
  std::vector<tess::Cell> cells;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    tess::Cell c;
    c.profile = {static_cast<tess::ValueIndex>(i)};
    c.controls = {0.0};
    c.ranges = ranges[i];
    c.treated_outcomes.assign(ranges[i].size(), 0.0);
    c.treated_records.assign(ranges[i].size(), 0);
    cells.push_back(std::move(c));
  }
  return tess::CellTable(std::move(schema), std::move(cells), {}, {});
}

/// Cells on an arbitrary grid given as (profile, ranges) pairs.
inline tess::CellTable table_from_cells(
    const tess::CovariateSchema& schema,
    const std::vector<std::pair<tess::Profile, std::vector<tess::PValueRange>>>& spec) {
  std::vector<tess::Cell> cells;
  for (const auto& [profile, ranges] : spec) {
    tess::Cell c;
    c.profile = profile;
    c.controls = {0.0};
    c.ranges = ranges;
    c.treated_outcomes.assign(ranges.size(), 0.0);
    c.treated_records.assign(ranges.size(), 0);
    cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end(),
            [](const tess::Cell& a, const tess::Cell& b) { return a.profile < b.profile; });
  return tess::CellTable(schema, std::move(cells), {}, {});
}

/// `k` significant ranges (0, 1/16] and `n - k` insignificant ranges (1/2, 1].
inline std::vector<tess::PValueRange> split_ranges(std::size_t k, std::size_t n) {
  std::vector<tess::PValueRange> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(i < k ? tess::PValueRange{0.0, 1.0 / 16} : tess::PValueRange{0.5, 1.0});
  }
  return out;
}

/// Random untied ranges on a grid of 1/8: a unit at rank g among 7 controls.
inline std::vector<tess::PValueRange> dyadic_ranges(std::mt19937_64& rng, std::size_t n,
                                                    double signal) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> rank(0, 7);
  std::vector<tess::PValueRange> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int g = u(rng) < signal ? 0 : rank(rng);
    out.push_back({g / 8.0, (g + 1) / 8.0});
  }
  return out;
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace testing
