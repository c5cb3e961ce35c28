#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace epitrack::csv {

/// Splits on ',' without quote handling; the formats here forbid commas inside fields.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s) noexcept;

/// Iterates LF-terminated lines, tracking 1-based line numbers. A trailing
/// newline does not produce an extra empty line.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line);
    std::size_t line_number() const noexcept { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;

    const std::string& operator[](std::size_t i) const { return fields[i]; }
};

/// Reads a whole table, checking that the first line equals `header`.
/// Blank lines are skipped; throws ParseError with the offending line.
std::vector<Row> read_table(std::string_view text, std::string_view header,
                                                 std::size_t min_fields);

} // namespace epitrack::csv
