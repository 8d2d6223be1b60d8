#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tess/data_model.hpp"

namespace tess {

struct CsvColumns {
  std::string outcome = "y";
  std::string treatment = "w";
  /// Empty selects every column other than outcome and treatment.
  std::vector<std::string> covariates;
};

struct LoadedData {
  CovariateSchema schema;
  std::vector<Record> records;
};

/// Reads a header row plus data rows. Covariate value labels are collected
/// in first-appearance order. Errors carry the 1-based file line number.
[[nodiscard]] LoadedData load_csv(const std::filesystem::path& path, const CsvColumns& columns);
[[nodiscard]] LoadedData parse_csv(std::string_view text, const CsvColumns& columns);

/// Records as CSV text with columns <outcome>,<treatment>,<covariate names...>.
/// Outcomes use the shortest round-trip decimal form.
[[nodiscard]] std::string format_csv(const CovariateSchema& schema, std::span<const Record> records,
                                     const CsvColumns& columns = {});
void write_csv(const std::filesystem::path& path, const CovariateSchema& schema,
               std::span<const Record> records, const CsvColumns& columns = {});

/// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view data);
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

}  // namespace tess
