#include "wavedecay/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wavedecay/error.hpp"

namespace wavedecay {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_number(const std::string& text, double& value) {
  const char* begin = text.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  if (*begin == '\0') return false;
  char* end = nullptr;
  errno = 0;
  value = std::strtod(begin, &end);
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0' && errno != ERANGE;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(const std::string& path,
                                                  std::size_t min_columns) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open CSV file '" + path + "'");
  std::vector<std::vector<double>> cols;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_row(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      numeric = numeric && parse_number(fields[k], row[k]);
    }
    if (!numeric) {
      if (!seen_data && line_no == 1) continue;  // header
      throw InvalidArgument(path + ":" + std::to_string(line_no) +
                            ": non-numeric CSV field");
    }
    if (!seen_data) {
      if (row.size() < min_columns) {
        throw InvalidArgument(path + ": expected at least " +
                              std::to_string(min_columns) + " columns");
      }
      cols.assign(row.size(), {});
      seen_data = true;
    }
    if (row.size() != cols.size()) {
      throw InvalidArgument(path + ":" + std::to_string(line_no) +
                            ": inconsistent column count");
    }
    for (std::size_t k = 0; k < row.size(); ++k) cols[k].push_back(row[k]);
  }
  if (!seen_data) throw InvalidArgument(path + ": no data rows");
  return cols;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  if (header.size() != columns.size()) {
    throw InvalidArgument("CSV header and column count differ");
  }
  const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
  for (const auto* c : columns) {
    if (c->size() != rows) throw InvalidArgument("CSV columns differ in length");
  }
  for (std::size_t k = 0; k < header.size(); ++k) {
    out << (k ? "," : "") << csv_field(header[k]);
  }
  out << "\r\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      out << (k ? "," : "") << format_double((*columns[k])[r]);
    }
    out << "\r\n";
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_csv(out, header, columns);
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace wavedecay
