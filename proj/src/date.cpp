#include "epitrack/date.hpp"

#include "epitrack/error.hpp"

#include <charconv>
#include <cstdio>

namespace epitrack {

namespace {

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
    if (pos + count > text.size()) return false;
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

bool parse_ymd(std::string_view text, std::chrono::year_month_day& out) {
    int y = 0, m = 0, d = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return false;
    if (!read_digits(text, 0, 4, y) || !read_digits(text, 5, 2, m) || !read_digits(text, 8, 2, d)) return false;
    out = std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(m)} / std::chrono::day{static_cast<unsigned>(d)};
    return out.ok();
}

} // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw InvalidArgument("invalid calendar date");
    return Date(std::chrono::sys_days(ymd));
}

Date Date::parse(std::string_view text) {
    std::chrono::year_month_day ymd;
    if (text.size() != 10 || !parse_ymd(text, ymd))
        throw InvalidArgument("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    return Date(std::chrono::sys_days(ymd));
}

std::string Date::to_string() const {
    const std::chrono::year_month_day ymd{day_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    const auto fail = [&]() -> Timestamp {
        throw InvalidArgument("invalid RFC 3339 timestamp '" + std::string(text) + "'");
    };
    std::chrono::year_month_day ymd;
    if (!parse_ymd(text, ymd)) return fail();
    if (text.size() < 20 || (text[10] != 'T' && text[10] != 't') || text[13] != ':' || text[16] != ':') return fail();
    int hh = 0, mm = 0, ss = 0;
    if (!read_digits(text, 11, 2, hh) || !read_digits(text, 14, 2, mm) || !read_digits(text, 17, 2, ss)) return fail();
    if (hh > 23 || mm > 59 || ss > 60) return fail();
    std::size_t pos = 19;
    if (text[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) return fail();
    }
    if (pos >= text.size()) return fail();
    std::chrono::seconds offset{0};
    const char z = text[pos];
    if (z == 'Z' || z == 'z') {
        if (pos + 1 != text.size()) return fail();
    } else if (z == '+' || z == '-') {
        int oh = 0, om = 0;
        if (text.size() != pos + 6 || text[pos + 3] != ':' || !read_digits(text, pos + 1, 2, oh) ||
            !read_digits(text, pos + 4, 2, om) || oh > 23 || om > 59)
            return fail();
        offset = std::chrono::hours(oh) + std::chrono::minutes(om);
        if (z == '-') offset = -offset;
    } else {
        return fail();
    }
    const Timestamp local = std::chrono::sys_days(ymd) + std::chrono::hours(hh) + std::chrono::minutes(mm) +
                            std::chrono::seconds(ss);
    return local - offset;
}

std::string format_timestamp(Timestamp ts) {
    const auto day = std::chrono::floor<std::chrono::days>(ts);
    const std::chrono::hh_mm_ss hms{ts - day};
    return Date(day).to_string() + [&] {
        char buf[16];
        std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                      static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
        return std::string(buf);
    }();
}

Timestamp timestamp_from_epoch_ms(std::int64_t ms) {
    return std::chrono::floor<std::chrono::seconds>(std::chrono::sys_time<std::chrono::milliseconds>(std::chrono::milliseconds(ms)));
}

} // namespace epitrack
