#include "cvblab/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace cvb {

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_number(long long v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void CsvTable::write(std::ostream &os) const {
    auto line = [&](const std::vector<std::string> &fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) {
                os << ',';
            }
            os << csv_escape(fields[i]);
        }
        os << "\r\n";
    };
    for (const auto &c : comment) {
        os << "# " << c << "\r\n";
    }
    line(header);
    for (const auto &r : rows) {
        line(r);
    }
}

std::string CsvTable::str() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

}  // namespace cvb
