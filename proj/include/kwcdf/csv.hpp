#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kwcdf::csv {

/// Shortest decimal representation that round-trips to the same double.
std::string real(double value);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

std::vector<std::string> split(const std::string& line);

}  // namespace kwcdf::csv
