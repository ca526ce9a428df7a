#include "kwcdf/csv.hpp"

#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace kwcdf::csv {

std::string real(double value) { return fmt::format("{}", value); }

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        const std::string& c = cells[i];
        if (c.find_first_of(",\"\n") == std::string::npos) {
            out << c;
            continue;
        }
        out << '"';
        for (char ch : c) out << (ch == '"' ? "\"\"" : std::string(1, ch));
        out << '"';
    }
    out << '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace kwcdf::csv
