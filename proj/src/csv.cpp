#include "epitrack/csv.hpp"

#include "epitrack/error.hpp"

namespace epitrack::csv {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool LineReader::next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string_view::npos ? text_.size() : nl;
    line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_no_;
    return true;
}

std::vector<Row> read_table(std::string_view text, std::string_view header,
                                                 std::size_t min_fields) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line) || trim(line) != header)
        throw ParseError(1, "expected header '" + std::string(header) + "'");
    std::vector<Row> rows;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() < min_fields)
            throw ParseError(reader.line_number(), "expected at least " + std::to_string(min_fields) + " fields");
        auto& row = rows.emplace_back();
        row.line = reader.line_number();
        for (const auto f : fields) row.fields.emplace_back(trim(f));
    }
    return rows;
}

} // namespace epitrack::csv
