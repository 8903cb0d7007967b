#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavedecay {

/// Reads a numeric CSV file into columns. A first row that does not parse as
/// numbers is treated as a header. Every row must have at least `min_columns`
/// fields and the same count as the first data row.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path,
                                                  std::size_t min_columns);

/// Quotes a field per RFC 4180 when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

/// Shortest round-trippable text for a double ("%.17g").
std::string format_double(double x);

/// Writes a header row and equally long numeric columns.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns);

}  // namespace wavedecay
