#pragma once

#include "epitrack/date.hpp"
#include "epitrack/region.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace epitrack {

using Count = std::int64_t;

enum class Field { confirmed, cured, deaths };

inline constexpr std::array<Field, 3> all_fields{Field::confirmed, Field::cured, Field::deaths};

std::string_view to_string(Field f) noexcept;

/// One calendar day of cumulative counts for one region.
struct DailyRecord {
    Date date;
    Count confirmed = 0;
    Count cured = 0;
    Count deaths = 0;

    Count& operator[](Field f) noexcept {
        return f == Field::confirmed ? confirmed : f == Field::cured ? cured : deaths;
    }
    Count operator[](Field f) const noexcept {
        return f == Field::confirmed ? confirmed : f == Field::cured ? cured : deaths;
    }

    friend bool operator==(const DailyRecord&, const DailyRecord&) = default;
};

/// A raw value that was raised by the monotonicity repair.
struct AnomalyFlag {
    Date date;
    Field field = Field::confirmed;
    Count raw_value = 0;
    Count repaired_value = 0;

    friend bool operator==(const AnomalyFlag&, const AnomalyFlag&) = default;
};

/// Date-ordered records of one region. `observed` runs parallel to `raw` and
/// holds the report time of the record that won the daily coalescing; later
/// ingests compare against it.
struct CumulativeSeries {
    RegionId region;
    std::vector<DailyRecord> raw;
    std::vector<DailyRecord> repaired;
    std::vector<AnomalyFlag> anomalies;
    std::vector<Timestamp> observed;

    bool empty() const noexcept { return repaired.empty(); }
    std::optional<Date> first_date() const;
    std::optional<Date> last_date() const;
    /// Last repaired record on or before `date` (carry-forward lookup).
    const DailyRecord* at_or_before(Date date) const;
    /// Repaired record exactly on `date`.
    const DailyRecord* on(Date date) const;

    friend bool operator==(const CumulativeSeries&, const CumulativeSeries&) = default;
};

struct RepairResult {
    std::vector<DailyRecord> repaired;
    std::vector<AnomalyFlag> anomalies;
};

/// Forward running maximum per field. Throws InvalidArgument unless dates are strictly increasing.
RepairResult repair_monotonic(std::span<const DailyRecord> records);

/// Builds a series from raw records (already one per day, date-ordered).
CumulativeSeries make_series(RegionId region, std::vector<DailyRecord> raw, std::vector<Timestamp> observed = {});

} // namespace epitrack
