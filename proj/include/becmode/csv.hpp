#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace becmode::csv {

/// Shortest round-trip text is not used; every value carries 17
/// significant digits so files are byte-stable across runs.
std::string number(double x);

/// Writes each line as "# line".
void write_comments(std::ostream& out, const std::vector<std::string>& comments);

/// Rows of a numeric CSV with '#' comments skipped. The header row is
/// returned separately. Throws IoError on a malformed row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a header column; IoError if absent.
    std::size_t column(std::string_view name) const;
    std::vector<double> values(std::string_view name) const;
};

Table read(std::istream& in);

}  // namespace becmode::csv
