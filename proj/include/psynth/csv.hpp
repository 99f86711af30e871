#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace psynth::csv {

struct Row {
    std::size_t line = 0; ///< 1-based line number in the source text
    std::vector<std::string> fields;
};

/// Splits comma-separated text with RFC 4180 quoting. Blank lines and lines
/// starting with '#' are skipped. Throws IngestError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Shortest text that parses back to exactly `value`.
std::string format_exact(double value);

/// Strict double parse; throws IngestError mentioning `context`.
double parse_double(std::string_view text, std::string_view context);

std::string read_file(const std::string& path);
/// Writes to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::string& path, std::string_view contents);

} // namespace psynth::csv
