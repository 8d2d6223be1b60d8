#include "tess/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "tess/error.hpp"

namespace tess {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io, "error reading '" + path.string() + "'");
  return std::move(buf).str();
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 style: quoted fields may hold commas, doubled quotes and newlines.
std::vector<Row> split_rows(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row = Row{};
  };
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (field_started) parse_error(line, "unexpected quote inside unquoted field");
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
      ++line;
      row.line = line;
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (quoted) parse_error(row.line, "unterminated quoted field");
  if (field_started || !field.empty() || !row.fields.empty()) end_row();
  return rows;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  std::string available;
  for (const auto& h : header) {
    if (!available.empty()) available += ", ";
    available += h;
  }
  fail(ErrorCode::invalid_argument,
       "unknown column '" + name + "' (available: " + available + ")");
}

}  // namespace

LoadedData parse_csv(std::string_view text, const CsvColumns& columns) {
  auto rows = split_rows(text);
  if (rows.empty()) fail(ErrorCode::parse, "missing header row");
  std::vector<std::string> header;
  for (auto& f : rows.front().fields) header.emplace_back(trim(f));

  const std::size_t y_col = find_column(header, columns.outcome);
  const std::size_t w_col = find_column(header, columns.treatment);
  if (y_col == w_col) fail(ErrorCode::invalid_argument, "outcome and treatment are the same column");
  std::vector<std::size_t> x_cols;
  if (columns.covariates.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i != y_col && i != w_col) x_cols.push_back(i);
    }
  } else {
    for (const auto& name : columns.covariates) {
      const auto c = find_column(header, name);
      if (c == y_col || c == w_col) {
        fail(ErrorCode::invalid_argument, "column '" + name + "' cannot be both covariate and " +
                                              (c == y_col ? "outcome" : "treatment"));
      }
      for (auto prev : x_cols) {
        if (prev == c) fail(ErrorCode::invalid_argument, "covariate '" + name + "' listed twice");
      }
      x_cols.push_back(c);
    }
  }
  if (x_cols.empty()) fail(ErrorCode::invalid_argument, "no covariate columns");

  std::vector<Covariate> covs(x_cols.size());
  std::vector<std::unordered_map<std::string, ValueIndex>> lookup(x_cols.size());
  for (std::size_t j = 0; j < x_cols.size(); ++j) covs[j].name = header[x_cols[j]];

  LoadedData out;
  out.records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      parse_error(row.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(row.fields.size()));
    }
    Record rec;
    const auto y_text = trim(row.fields[y_col]);
    if (y_text.empty()) parse_error(row.line, "missing outcome");
    {
      const auto* first = y_text.data();
      const auto* last = first + y_text.size();
      const auto [ptr, ec] = std::from_chars(first, last, rec.outcome);
      if (ec != std::errc{} || ptr != last || !std::isfinite(rec.outcome)) {
        parse_error(row.line, "outcome '" + std::string(y_text) + "' is not a finite number");
      }
    }
    const auto w_text = trim(row.fields[w_col]);
    if (w_text == "1") {
      rec.treated = true;
    } else if (w_text == "0") {
      rec.treated = false;
    } else {
      parse_error(row.line, "treatment value '" + std::string(w_text) + "' is not 0 or 1");
    }
    rec.profile.resize(x_cols.size());
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      std::string label(trim(row.fields[x_cols[j]]));
      if (label.empty()) parse_error(row.line, "missing value for '" + covs[j].name + "'");
      auto [it, inserted] = lookup[j].try_emplace(label, static_cast<ValueIndex>(covs[j].values.size()));
      if (inserted) covs[j].values.push_back(std::move(label));
      rec.profile[j] = it->second;
    }
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) fail(ErrorCode::parse, "no data rows");
  out.schema = CovariateSchema(std::move(covs));
  return out;
}

LoadedData load_csv(const std::filesystem::path& path, const CsvColumns& columns) {
  const auto text = read_file(path);
  try {
    return parse_csv(text, columns);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_csv(const CovariateSchema& schema, std::span<const Record> records,
                       const CsvColumns& columns) {
  std::string out = csv_field(columns.outcome) + ',' + csv_field(columns.treatment);
  for (const auto& c : schema.covariates()) out += ',' + csv_field(c.name);
  out += '\n';
  char buf[64];
  for (const auto& r : records) {
    const auto res = std::to_chars(buf, buf + sizeof buf, r.outcome);
    out.append(buf, res.ptr);
    out += r.treated ? ",1" : ",0";
    for (std::size_t j = 0; j < r.profile.size(); ++j) {
      out += ',' + csv_field(schema.covariate(j).values.at(r.profile[j]));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CovariateSchema& schema,
               std::span<const Record> records, const CsvColumns& columns) {
  const auto text = format_csv(schema, records, columns);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::io, "error writing '" + path.string() + "'");
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    fail(ErrorCode::internal, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace tess
