#pragma once

// Locale-independent CSV I/O. Numbers are written with 17 significant digits
// so a value survives a write/read round trip bit for bit.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "catsim/fitting.hpp"
#include "catsim/thermometry.hpp"

namespace catsim {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;  // throws std::out_of_range
};

std::string format_double(double value);

/// Throws std::invalid_argument unless the whole field is a number.
double parse_double(std::string_view field);

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Parses a header row followed by numeric rows of the same width. Blank
/// lines are skipped; a trailing '\r' is tolerated.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// Columns detuning_hz,transfer,od with detuning converted from rad/s.
CsvTable spectrum_table(const std::vector<SpectrumPoint>& spectrum);

/// Accepts `phi_rad,<y_column>,sigma` or `phi_rad,<y_column>`; a missing
/// sigma column means sigma = 1 for every row.
Dataset dataset_from_table(const CsvTable& table, std::string_view y_column);

CsvTable dataset_table(const Dataset& data, std::string_view y_column);

}  // namespace catsim
