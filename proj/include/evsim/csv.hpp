#ifndef EVSIM_CSV_HPP
#define EVSIM_CSV_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace evsim {

// Thrown on malformed input files; message carries the row number.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace csv {

std::vector<std::string> split_row(const std::string& line);

struct Row {
    int lineno = 0;  // 1-based file line number
    std::vector<std::string> fields;
};

// Reads a whole CSV file. Verifies the header matches `expected_header`
// exactly and that every row has the same number of fields.
// Returns data rows only (header stripped).
std::vector<Row> read_file(const std::string& path,
                           const std::vector<std::string>& expected_header);

double to_double(const std::string& field, const std::string& context, int row);
long to_long(const std::string& field, const std::string& context, int row);

}  // namespace csv
}  // namespace evsim

#endif
