#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gwf::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Shortest representation that parses back to the same double; "NA" for NaN.
std::string format_double(double v);

/// Parses a double; empty, "NA", "NaN" and "nan" give NaN. Returns nullopt on garbage.
std::optional<double> parse_double(std::string_view s);

struct Row {
    std::size_t line = 0;  // 1-based line number in the file
    std::vector<std::string> fields;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    /// Column index of `name`; throws LoadError when absent.
    std::size_t column(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;
};

/// Reads a headed CSV file. Blank lines and lines starting with '#' are skipped.
/// Throws LoadError when the file cannot be opened or has no header.
Table read_table(const std::string& path);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

/// Joins fields with commas (no quoting; callers pass plain tokens).
std::string join(const std::vector<std::string>& fields);

}  // namespace gwf::csv
