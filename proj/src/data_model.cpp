#include "tess/data_model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tess/error.hpp"

namespace tess {

CovariateSchema::CovariateSchema(std::vector<Covariate> covariates)
    : covariates_(std::move(covariates)) {
  if (covariates_.empty()) {
    fail(ErrorCode::invalid_argument, "schema needs at least one covariate");
  }
  for (const auto& c : covariates_) {
    if (c.values.empty()) {
      fail(ErrorCode::invalid_argument, "covariate '" + c.name + "' has no values");
    }
    std::set<std::string> seen(c.values.begin(), c.values.end());
    if (seen.size() != c.values.size()) {
      fail(ErrorCode::invalid_argument, "covariate '" + c.name + "' has duplicate value labels");
    }
  }
}

CovariateSchema CovariateSchema::synthetic(std::span<const std::size_t> arities) {
  std::vector<Covariate> covs;
  covs.reserve(arities.size());
  for (std::size_t j = 0; j < arities.size(); ++j) {
    Covariate c{"x" + std::to_string(j), {}};
    for (std::size_t v = 0; v < arities[j]; ++v) c.values.push_back(std::to_string(v));
    covs.push_back(std::move(c));
  }
  return CovariateSchema(std::move(covs));
}

Subpopulation Subpopulation::full(const CovariateSchema& schema) {
  Subpopulation s;
  s.values.resize(schema.dims());
  for (std::size_t j = 0; j < schema.dims(); ++j) {
    s.values[j].resize(schema.arity(j));
    for (std::size_t v = 0; v < schema.arity(j); ++v) s.values[j][v] = static_cast<ValueIndex>(v);
  }
  return s;
}

bool Subpopulation::contains(std::span<const ValueIndex> profile) const noexcept {
  if (profile.size() != values.size()) return false;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::binary_search(values[j].begin(), values[j].end(), profile[j])) return false;
  }
  return true;
}

void Subpopulation::validate(const CovariateSchema& schema) const {
  if (values.size() != schema.dims()) {
    fail(ErrorCode::invalid_argument, "subpopulation has " + std::to_string(values.size()) +
                                          " modes, schema has " + std::to_string(schema.dims()));
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    const auto& v = values[j];
    if (v.empty()) {
      fail(ErrorCode::invalid_argument, "subpopulation mode " + std::to_string(j) + " is empty");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] >= schema.arity(j) || (i > 0 && v[i] <= v[i - 1])) {
        fail(ErrorCode::invalid_argument,
             "subpopulation mode " + std::to_string(j) + " must hold sorted distinct values");
      }
    }
  }
}

std::size_t Subpopulation::total_values() const noexcept {
  std::size_t n = 0;
  for (const auto& v : values) n += v.size();
  return n;
}

CellTable::CellTable(CovariateSchema schema, std::vector<Cell> cells, TableOptions options,
                     TableDiagnostics diagnostics)
    : schema_(std::move(schema)),
      cells_(std::move(cells)),
      options_(options),
      diagnostics_(diagnostics) {
  bool first = true;
  for (const auto& c : cells_) {
    if (c.treated_count() == 0) continue;
    ++treatment_cells_;
    if (first || c.controls.size() < min_controls_) min_controls_ = c.controls.size();
    first = false;
  }
}

std::vector<PValueRange> CellTable::all_ranges() const {
  std::vector<PValueRange> out;
  for (const auto& c : cells_) out.insert(out.end(), c.ranges.begin(), c.ranges.end());
  return out;
}

CellTable build_cell_table(std::span<const Record> records, const CovariateSchema& schema,
                           const TableOptions& options) {
  if (records.empty()) fail(ErrorCode::invalid_argument, "no records");

  std::map<Profile, std::vector<std::size_t>> groups;
  TableDiagnostics diag;
  diag.records = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.profile.size() != schema.dims()) {
      fail(ErrorCode::invalid_argument, "record " + std::to_string(i) + " has " +
                                            std::to_string(r.profile.size()) +
                                            " covariates, schema has " +
                                            std::to_string(schema.dims()));
    }
    for (std::size_t j = 0; j < schema.dims(); ++j) {
      if (r.profile[j] >= schema.arity(j)) {
        fail(ErrorCode::invalid_argument, "record " + std::to_string(i) + " covariate " +
                                              std::to_string(j) + " value index out of range");
      }
    }
    (r.treated ? diag.treated : diag.controls) += 1;
    groups[r.profile].push_back(i);
  }

  std::vector<Cell> cells;
  cells.reserve(groups.size());
  for (auto& [profile, members] : groups) {
    Cell cell;
    cell.profile = profile;
    for (auto i : members) {
      if (!records[i].treated) cell.controls.push_back(records[i].outcome);
    }
    std::sort(cell.controls.begin(), cell.controls.end());

    if (cell.controls.empty()) {
      for (auto i : members) {
        if (!records[i].treated) continue;
        if (options.include_orphans) {
          cell.treated_outcomes.push_back(records[i].outcome);
          cell.ranges.push_back({0.0, 1.0});
          cell.treated_records.push_back(i);
          ++diag.orphans_included;
        } else {
          ++diag.excluded_treated;
        }
      }
    } else {
      const ReferenceDistribution ref(cell.controls);
      for (auto i : members) {
        if (!records[i].treated) continue;
        cell.treated_outcomes.push_back(records[i].outcome);
        cell.ranges.push_back(p_value_range(ref, records[i].outcome, options.sidedness));
        cell.treated_records.push_back(i);
      }
    }
    if (cell.treated_count() > 0 && cell.controls.size() < options.thin_control_threshold) {
      ++diag.thin_control_cells;
    }
    cells.push_back(std::move(cell));
  }
  return CellTable(schema, std::move(cells), options, diag);
}

double cell_mass(const Cell& cell, double alpha) noexcept {
  double m = 0.0;
  for (const auto& r : cell.ranges) m += significance_mass(r, alpha);
  return m;
}

SubsetCounts subset_counts(const Subpopulation& s, const CellTable& table, double alpha) {
  SubsetCounts out;
  for (const auto& c : table.cells()) {
    if (c.treated_count() == 0 || !s.contains(c.profile)) continue;
    out.n_alpha += cell_mass(c, alpha);
    out.n_total += c.treated_count();
  }
  return out;
}

}  // namespace tess
