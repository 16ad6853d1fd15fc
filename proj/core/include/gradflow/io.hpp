#pragma once

// Plain-text outputs: CSV tables with a schema line, measure and trajectory
// files, and atomic file replacement.
//
// Every CSV starts with "# schema: <name>" followed by the column header.

#include "gradflow/reference.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gradflow {

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);
std::string read_file(const std::filesystem::path &path);

/// One CSV cell, rendered on construction.
class CsvValue {
public:
  CsvValue(double v);
  CsvValue(int v) : text_(std::to_string(v)) {}
  CsvValue(long v) : text_(std::to_string(v)) {}
  CsvValue(unsigned long v) : text_(std::to_string(v)) {}
  CsvValue(unsigned v) : text_(std::to_string(v)) {}
  CsvValue(bool v) : text_(v ? "true" : "false") {}
  CsvValue(const char *v) : text_(v) {}
  CsvValue(std::string v) : text_(std::move(v)) {}

  const std::string &text() const { return text_; }

private:
  std::string text_;
};

class CsvTable {
public:
  CsvTable(std::string schema, std::vector<std::string> columns);

  /// Throws InputError when the row width differs from the header.
  void add_row(std::vector<CsvValue> row);

  const std::string &schema() const { return schema_; }
  const std::vector<std::string> &columns() const { return columns_; }
  const std::vector<std::vector<std::string>> &rows() const { return rows_; }
  std::size_t column(std::string_view name) const;

  void write(std::ostream &os) const;
  std::string to_string() const;
  void save(const std::filesystem::path &path) const;

  /// Parses text produced by `write`; throws InputError on malformed input.
  static CsvTable parse(std::string_view text);
  static CsvTable load(const std::filesystem::path &path);

private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Strict decimal parse; throws InputError with `what` as context.
double parse_real(std::string_view text, std::string_view what = "value");
long parse_integer(std::string_view text, std::string_view what = "value");

/// (cell, mass) table.
CsvTable measure_table(const DiscreteMeasure &m);
/// Reads a (cell, mass) table with `n` cells; every cell must appear once.
DiscreteMeasure measure_from_table(const CsvTable &table, std::size_t n);

void save_measure(const std::filesystem::path &path, const DiscreteMeasure &m);
DiscreteMeasure load_measure(const std::filesystem::path &path, std::size_t n);

} // namespace gradflow
