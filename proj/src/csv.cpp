#include "becmode/csv.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "becmode/errors.hpp"

namespace becmode::csv {

std::string number(double x)
{
    return fmt::format("{:.17g}", x);
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments)
{
    for (const auto& c : comments)
        out << "# " << c << '\n';
}

std::size_t Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw IoError(fmt::format("CSV has no column '{}'", name));
}

std::vector<double> Table::values(std::string_view name) const
{
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(r.at(c));
    return out;
}

Table read(std::istream& in)
{
    Table t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (line.back() == ',')
            cells.emplace_back();
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw IoError(fmt::format("CSV line {}: expected {} fields, got {}", lineno, t.header.size(), cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(c, &pos));
                if (pos != c.size())
                    throw std::invalid_argument(c);
            } catch (const std::exception&) {
                row.push_back(std::nan(""));
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty())
        throw IoError("CSV is empty");
    return t;
}

}  // namespace becmode::csv
