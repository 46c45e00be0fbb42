#pragma once
// Minimal CSV helpers shared by the dump/load hooks and the experiment
// runner. Doubles are printed with %.17g so a load/dump round trip is exact.

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmnoma::csv {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Parses with a row number (1-based, header included) in the error message.
inline double parse_double(const std::string& cell, std::size_t row) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv: row " + std::to_string(row) +
                             ": bad numeric field '" + cell + "'");
  }
}

inline long long parse_int(const std::string& cell, std::size_t row) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv: row " + std::to_string(row) +
                             ": bad integer field '" + cell + "'");
  }
}

inline unsigned long long parse_uint(const std::string& cell, std::size_t row) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv: row " + std::to_string(row) +
                             ": bad integer field '" + cell + "'");
  }
}

}  // namespace mmnoma::csv
