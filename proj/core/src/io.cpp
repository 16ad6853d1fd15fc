#include "gradflow/io.hpp"

#include "gradflow/errors.hpp"
#include "gradflow/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace gradflow {

void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target = path.has_parent_path() ? path : fs::path(".") / path;
  const fs::path tmp =
      target.parent_path() / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot open '" + tmp.string() + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw InputError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot replace '" + target.string() + "': " + ec.message());
  }
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CsvValue::CsvValue(double v) : text_(format_real(v)) {}

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<CsvValue> row) {
  if (row.size() != columns_.size()) {
    throw InputError("csv '" + schema_ + "': row has " + std::to_string(row.size()) + " fields, expected " +
                     std::to_string(columns_.size()));
  }
  std::vector<std::string> out;
  out.reserve(row.size());
  for (auto &v : row) out.push_back(v.text());
  rows_.push_back(std::move(out));
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw InputError("csv '" + schema_ + "' has no column '" + std::string(name) + "'");
}

namespace {

void write_line(std::ostream &os, const std::vector<std::string> &fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

} // namespace

void CsvTable::write(std::ostream &os) const {
  os << "# schema: " << schema_ << '\n';
  write_line(os, columns_);
  for (const auto &r : rows_) write_line(os, r);
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

void CsvTable::save(const std::filesystem::path &path) const { write_file_atomic(path, to_string()); }

CsvTable CsvTable::parse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    const auto line = trim(text.substr(start, pos - start));
    if (!line.empty()) lines.push_back(line);
    start = pos + 1;
  }
  constexpr std::string_view prefix = "# schema: ";
  if (lines.empty() || !lines[0].starts_with(prefix)) throw InputError("csv: missing schema line");
  if (lines.size() < 2) throw InputError("csv: missing column header");
  CsvTable table(std::string(lines[0].substr(prefix.size())), split_line(lines[1]));
  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto fields = split_line(lines[i]);
    if (fields.size() != table.columns_.size()) {
      throw InputError("csv '" + table.schema_ + "': line " + std::to_string(i + 1) + " has " +
                       std::to_string(fields.size()) + " fields");
    }
    table.rows_.push_back(std::move(fields));
  }
  return table;
}

CsvTable CsvTable::load(const std::filesystem::path &path) { return parse(read_file(path)); }

double parse_real(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const auto *end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw InputError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

long parse_integer(std::string_view text, std::string_view what) {
  text = trim(text);
  long v = 0;
  const auto *end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw InputError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

CsvTable measure_table(const DiscreteMeasure &m) {
  CsvTable t("measure", {"cell", "mass"});
  for (std::size_t k = 0; k < m.size(); ++k) t.add_row({k, m[k]});
  return t;
}

DiscreteMeasure measure_from_table(const CsvTable &table, std::size_t n) {
  const auto ic = table.column("cell");
  const auto im = table.column("mass");
  std::vector<double> masses(n, 0.0);
  std::vector<char> seen(n, 0);
  for (const auto &row : table.rows()) {
    const long k = parse_integer(row[ic], "cell id");
    if (k < 0 || static_cast<std::size_t>(k) >= n) throw InputError("measure: cell id " + row[ic] + " out of range");
    if (seen[k]) throw InputError("measure: cell id " + row[ic] + " repeated");
    seen[k] = 1;
    masses[k] = parse_real(row[im], "mass");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!seen[k]) throw InputError("measure: cell " + std::to_string(k) + " missing");
  }
  try {
    return DiscreteMeasure(std::move(masses));
  } catch (const DomainError &e) {
    throw InputError(std::string("measure: ") + e.what());
  }
}

void save_measure(const std::filesystem::path &path, const DiscreteMeasure &m) { measure_table(m).save(path); }

DiscreteMeasure load_measure(const std::filesystem::path &path, std::size_t n) {
  return measure_from_table(CsvTable::load(path), n);
}

} // namespace gradflow
