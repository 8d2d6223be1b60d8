#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tess/reference.hpp"

namespace tess {

using ValueIndex = std::uint32_t;
using Profile = std::vector<ValueIndex>;

struct Covariate {
  std::string name;
  std::vector<std::string> values;
};

/// Ordered discrete covariates. Each covariate is one mode of the tensor.
class CovariateSchema {
 public:
  CovariateSchema() = default;
  explicit CovariateSchema(std::vector<Covariate> covariates);

  /// Convenience for synthetic data: covariate j is named "x<j>" with values "0".."arity-1".
  static CovariateSchema synthetic(std::span<const std::size_t> arities);

  [[nodiscard]] std::size_t dims() const noexcept { return covariates_.size(); }
  [[nodiscard]] std::size_t arity(std::size_t j) const { return covariates_.at(j).values.size(); }
  [[nodiscard]] const Covariate& covariate(std::size_t j) const { return covariates_.at(j); }
  [[nodiscard]] std::span<const Covariate> covariates() const noexcept { return covariates_; }

  friend bool operator==(const CovariateSchema&, const CovariateSchema&) = default;

 private:
  std::vector<Covariate> covariates_;
};

struct Record {
  double outcome = 0.0;
  bool treated = false;
  Profile profile;
};

/// Rectangular subset: one non-empty set of value indices per mode, each
/// kept sorted ascending.
struct Subpopulation {
  std::vector<std::vector<ValueIndex>> values;

  static Subpopulation full(const CovariateSchema& schema);

  [[nodiscard]] bool contains(std::span<const ValueIndex> profile) const noexcept;
  /// Throws if any mode is empty, out of range, or unsorted/duplicated.
  void validate(const CovariateSchema& schema) const;
  [[nodiscard]] std::size_t total_values() const noexcept;

  friend bool operator==(const Subpopulation&, const Subpopulation&) = default;
};

/// All records sharing one covariate profile.
struct Cell {
  Profile profile;
  std::vector<double> controls;            // ascending
  std::vector<double> treated_outcomes;    // units that received a range
  std::vector<PValueRange> ranges;         // parallel to treated_outcomes
  std::vector<std::size_t> treated_records;  // source record indices, parallel to ranges

  [[nodiscard]] std::size_t treated_count() const noexcept { return ranges.size(); }
};

struct TableOptions {
  Sidedness sidedness = Sidedness::two;
  /// Treated units whose profile has no controls get the uninformative range
  /// (0, 1] instead of being dropped.
  bool include_orphans = false;
  /// Cells with fewer controls than this are counted as thin in diagnostics.
  std::size_t thin_control_threshold = 5;
};

struct TableDiagnostics {
  std::size_t records = 0;
  std::size_t treated = 0;
  std::size_t controls = 0;
  std::size_t excluded_treated = 0;   // dropped: no control in profile
  std::size_t orphans_included = 0;   // kept with (0, 1]
  std::size_t thin_control_cells = 0; // treatment cells below the threshold
  friend bool operator==(const TableDiagnostics&, const TableDiagnostics&) = default;
};

/// Sparse covariate-profile tensor. Immutable after construction.
class CellTable {
 public:
  CellTable(CovariateSchema schema, std::vector<Cell> cells, TableOptions options,
            TableDiagnostics diagnostics);

  [[nodiscard]] const CovariateSchema& schema() const noexcept { return schema_; }
  [[nodiscard]] std::span<const Cell> cells() const noexcept { return cells_; }
  [[nodiscard]] const TableOptions& options() const noexcept { return options_; }
  [[nodiscard]] const TableDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  /// Number of cells holding at least one treated unit with a p-value range.
  [[nodiscard]] std::size_t treatment_cells() const noexcept { return treatment_cells_; }
  /// Smallest control count over treatment cells (0 when there are none).
  [[nodiscard]] std::size_t min_controls() const noexcept { return min_controls_; }
  /// Every p-value range in cell order.
  [[nodiscard]] std::vector<PValueRange> all_ranges() const;

 private:
  CovariateSchema schema_;
  std::vector<Cell> cells_;
  TableOptions options_;
  TableDiagnostics diagnostics_;
  std::size_t treatment_cells_ = 0;
  std::size_t min_controls_ = 0;
};

/// Groups records by profile and converts treated outcomes to p-value ranges
/// against the controls of the same profile. Cells come out in lexicographic
/// profile order.
[[nodiscard]] CellTable build_cell_table(std::span<const Record> records,
                                         const CovariateSchema& schema,
                                         const TableOptions& options = {});

struct SubsetCounts {
  double n_alpha = 0.0;
  std::size_t n_total = 0;
};

/// Significance mass of one cell, summed over its ranges in stored order.
[[nodiscard]] double cell_mass(const Cell& cell, double alpha) noexcept;

/// N_alpha(S) and N(S), accumulated cell by cell in table order.
[[nodiscard]] SubsetCounts subset_counts(const Subpopulation& s, const CellTable& table,
                                         double alpha);

}  // namespace tess
