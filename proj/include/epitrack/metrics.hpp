#pragma once

#include "epitrack/store.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace epitrack {

/// Per-day derived values for one region.
struct DerivedPoint {
    Date date;
    Count confirmed = 0;
    Count cured = 0;
    Count deaths = 0;
    Count daily_confirmed = 0;
    Count daily_cured = 0;
    Count daily_deaths = 0;
    /// max(confirmed - cured - deaths, 0); active_clamped marks a negative difference.
    Count active = 0;
    bool active_clamped = false;
    std::optional<double> mortality_rate;
    std::optional<double> cure_rate;
    std::optional<double> per_million;

    friend bool operator==(const DerivedPoint&, const DerivedPoint&) = default;
};

/// Deltas span reporting gaps (the delta lands on the next reported day).
/// Throws InvalidArgument when the repaired series decreases or dates are unordered.
std::vector<DerivedPoint> derive_series(const CumulativeSeries& series, std::optional<std::int64_t> population);
std::vector<DerivedPoint> derive_series(const CumulativeSeries& series, const RegionMeta& meta);

/// Sum of children over the union of their dates, each child carried forward
/// from its last report (0 before its first). Throws InvalidArgument for no children.
CumulativeSeries rollup(std::span<const CumulativeSeries> children, RegionId parent);

/// The region's own series, or the rollup of its children's effective series
/// when it has none. Throws NotFound for regions outside the registry.
CumulativeSeries effective_series(const DatasetVersion& version, const RegionId& region);

/// Carry-forward cumulative values on `date` (all zero before the first report).
DailyRecord value_at(const DatasetVersion& version, const RegionId& region, Date date);

struct WorldSummary {
    std::size_t countries_affected = 0;
    Count total_confirmed = 0;
    Count total_cured = 0;
    Count total_deaths = 0;
    Count total_active = 0;

    friend bool operator==(const WorldSummary&, const WorldSummary&) = default;
};

/// Carry-forward totals over all countries except the quarantine bucket.
WorldSummary world_summary(const DatasetVersion& version, Date date);

inline constexpr int bucket_count = 8;

/// 0 for no cases, else 1 + floor(log10(confirmed)) clamped to 7.
int choropleth_bucket(Count confirmed) noexcept;

struct MapEntry {
    RegionId country;
    Count confirmed = 0;
    int bucket = 0;

    friend bool operator==(const MapEntry&, const MapEntry&) = default;
};

struct MapSnapshot {
    Date date;
    std::vector<MapEntry> entries;
    WorldSummary totals;
};

/// Entries sorted by country code.
MapSnapshot map_snapshot(const DatasetVersion& version, Date date);

enum class Metric {
    total_confirmed,
    active,
    deaths,
    cured,
    daily_confirmed,
    daily_deaths,
    daily_cured,
    mortality_rate,
    cure_rate,
    per_million,
};

std::string_view to_string(Metric m) noexcept;
/// Throws InvalidArgument for unknown identifiers.
Metric parse_metric(std::string_view name);
/// Cumulative metrics carry forward across days without a report.
bool carries_forward(Metric m) noexcept;
std::optional<double> metric_value(const DerivedPoint& p, Metric m);

struct ComparisonTable {
    Metric metric = Metric::total_confirmed;
    std::vector<RegionId> regions;
    std::vector<Date> dates;
    /// regions x dates; nullopt = no data that day.
    std::vector<std::vector<std::optional<double>>> values;
};

inline constexpr std::size_t max_compare_regions = 10;

/// Date axis: union of the regions' report dates within [from, to]; both
/// bounds default to the version's date range.
ComparisonTable compare(const DatasetVersion& version, std::span<const RegionId> regions, Metric metric,
                        std::optional<Date> from = std::nullopt, std::optional<Date> to = std::nullopt);

/// Countries by metric value on `date`, descending; absent values last; ties by RegionId.
std::vector<std::pair<RegionId, std::optional<double>>> top_k(const DatasetVersion& version, Metric metric, Date date,
                                                              std::size_t k);

std::map<Continent, std::vector<RegionId>> continent_groups(const DatasetVersion& version);

struct HierarchyNode {
    RegionId id;
    std::string display_name;
    std::optional<Date> latest_date;
    Count confirmed = 0;
    Count cured = 0;
    Count deaths = 0;
    Count active = 0;
    /// Sorted by confirmed descending, then RegionId.
    std::vector<HierarchyNode> children;
};

/// Latest values of a country and all of its registered descendants.
HierarchyNode hierarchy(const DatasetVersion& version, const RegionId& country);

} // namespace epitrack
