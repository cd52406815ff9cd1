#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cvb {

// Shortest round-trip representation, '.' decimal point, locale independent.
std::string format_number(double v);
std::string format_number(long long v);

std::string csv_escape(std::string_view field);

// RFC-4180 table. `comment` lines are emitted first, each prefixed by "# ".
struct CsvTable {
    std::vector<std::string> comment;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    void write(std::ostream &os) const;
    std::string str() const;
};

}  // namespace cvb
