#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace epitrack {

/// A UTC calendar day.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days day) : day_(day) {}

    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Strict YYYY-MM-DD; throws InvalidArgument on anything else.
    static Date parse(std::string_view text);

    std::chrono::sys_days sys_days() const noexcept { return day_; }
    std::int64_t days_since_epoch() const noexcept { return day_.time_since_epoch().count(); }
    std::string to_string() const;

    Date next() const noexcept { return Date(day_ + std::chrono::days(1)); }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days day_{};
};

using Timestamp = std::chrono::sys_seconds;

/// RFC 3339 date-time: "YYYY-MM-DDTHH:MM:SS[.frac](Z|+hh:mm|-hh:mm)". Fractional seconds are truncated.
Timestamp parse_timestamp(std::string_view text);
/// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp ts);
Timestamp timestamp_from_epoch_ms(std::int64_t ms);

inline Date utc_day(Timestamp ts) { return Date(std::chrono::floor<std::chrono::days>(ts)); }
inline Timestamp start_of(Date d) { return Timestamp(d.sys_days()); }

} // namespace epitrack
