#include "catsim/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "catsim/constants.hpp"

namespace catsim {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("csv: no column named " + std::string(name));
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument("csv: not a number: '" + std::string(field) + "'");
  }
  return v;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("csv: cannot open " + path + " for writing");
  write_csv(os, table);
  if (!os) throw std::runtime_error("csv: write to " + path + " failed");
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split(line);
    if (!have_header) {
      for (auto f : fields) t.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw std::invalid_argument("csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(t.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::invalid_argument("csv: missing header row");
  // A header made of numbers means the header was omitted.
  for (const auto& h : t.header) {
    try {
      parse_double(h);
    } catch (const std::invalid_argument&) {
      return t;
    }
  }
  throw std::invalid_argument("csv: first row is numeric; a header row is required");
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("csv: cannot open " + path);
  return read_csv(is);
}

CsvTable spectrum_table(const std::vector<SpectrumPoint>& spectrum) {
  CsvTable t{{"detuning_hz", "transfer", "od"}, {}};
  t.rows.reserve(spectrum.size());
  for (const auto& p : spectrum) t.rows.push_back({p.detuning / constants::two_pi, p.transfer, p.od});
  return t;
}

Dataset dataset_from_table(const CsvTable& table, std::string_view y_column) {
  const bool with_sigma = table.header.size() == 3;
  if ((table.header.size() != 2 && !with_sigma) || table.header[0] != "phi_rad" || table.header[1] != y_column ||
      (with_sigma && table.header[2] != "sigma")) {
    std::ostringstream msg;
    msg << "csv: expected header phi_rad," << y_column << "[,sigma]";
    throw std::invalid_argument(msg.str());
  }
  Dataset d;
  d.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) d.rows.push_back({r[0], r[1], with_sigma ? r[2] : 1.0});
  return d;
}

CsvTable dataset_table(const Dataset& data, std::string_view y_column) {
  CsvTable t{{"phi_rad", std::string(y_column), "sigma"}, {}};
  t.rows.reserve(data.size());
  for (const auto& r : data.rows) t.rows.push_back({r.x, r.y, r.sigma});
  return t;
}

}  // namespace catsim
