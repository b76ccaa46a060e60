#include "evsim/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace evsim {
namespace csv {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<Row> read_file(const std::string& path,
                           const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in.is_open())
        throw ParseError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file, expected header");

    auto header = split_row(line);
    if (header != expected_header) {
        std::ostringstream os;
        os << path << ": bad header, expected ";
        for (size_t i = 0; i < expected_header.size(); ++i)
            os << (i ? "," : "") << expected_header[i];
        throw ParseError(os.str());
    }

    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_row(line);
        if (fields.size() != expected_header.size()) {
            std::ostringstream os;
            os << path << " row " << lineno << ": expected " << expected_header.size()
               << " fields, got " << fields.size();
            throw ParseError(os.str());
        }
        rows.push_back(Row{lineno, std::move(fields)});
    }
    return rows;
}

double to_double(const std::string& field, const std::string& context, int row) {
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') {
        std::ostringstream os;
        os << context << " row " << row << ": not a number: '" << field << "'";
        throw ParseError(os.str());
    }
    return v;
}

long to_long(const std::string& field, const std::string& context, int row) {
    char* end = nullptr;
    long v = std::strtol(field.c_str(), &end, 10);
    if (end == field.c_str() || *end != '\0') {
        std::ostringstream os;
        os << context << " row " << row << ": not an integer: '" << field << "'";
        throw ParseError(os.str());
    }
    return v;
}

}  // namespace csv
}  // namespace evsim
