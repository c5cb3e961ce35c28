#pragma once

#include "epitrack/catalog.hpp"
#include "epitrack/series.hpp"
#include "epitrack/store.hpp"

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epitrack {

/// One upstream report before region normalization.
struct RawRow {
    Timestamp observed_at{};
    std::string raw_country;
    std::optional<std::string> raw_province;
    std::optional<std::string> raw_city;
    Count confirmed = 0;
    Count cured = 0;
    Count deaths = 0;

    friend bool operator==(const RawRow&, const RawRow&) = default;
};

enum class SourceKind { canonical_csv, dxy_json };

std::string_view to_string(SourceKind kind) noexcept;

struct SourceDescriptor {
    SourceKind kind = SourceKind::canonical_csv;
    std::string location;

    /// "canonical_csv=path/or/url" or "dxy_json=...". Throws InvalidArgument.
    static SourceDescriptor parse(std::string_view text);
};

// ---------------------------------------------------------------- fetching

struct FetchOptions {
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds total_timeout{60};
};

/// Reads a local file or GETs an http(s) URL (up to 5 redirects).
/// Throws FetchError: retryable for unreachable/timeout, not retryable for HTTP status >= 400.
std::string fetch_source(const SourceDescriptor& desc, const FetchOptions& options = {});

// ----------------------------------------------------------------- parsing

struct ParseIssue {
    std::size_t line = 0;
    std::string message;
};

struct CsvParseResult {
    std::vector<RawRow> rows;
    std::vector<ParseIssue> errors;
};

/// Parses every line, collecting per-line errors instead of stopping at the first.
CsvParseResult parse_canonical_csv_lenient(std::string_view data);

/// Throws ParseError for the first bad line.
std::vector<RawRow> parse_canonical_csv(std::string_view data);

struct DxyParseResult {
    std::vector<RawRow> rows;
    std::size_t skipped = 0;
};

/// Area-record array: one row per area record and per nested city record.
/// Records without provinceName (or cityName, for cities), without a usable
/// updateTime, or with negative counts are skipped and tallied.
DxyParseResult parse_dxy_json(std::string_view data);

// ---------------------------------------------------------- normalization

/// Maps raw names to a canonical RegionId. Unknown countries map to the
/// quarantine bucket; unknown province/city names keep their trimmed raw name.
RegionId normalize_region(const RawRow& row, const AliasTable& aliases);

struct NormalizedRow {
    RegionId region;
    RawRow row;
};

/// A day's surviving report and the time it was observed.
struct CoalescedRecord {
    DailyRecord record;
    Timestamp observed_at{};

    friend bool operator==(const CoalescedRecord&, const CoalescedRecord&) = default;
};

/// True when `a` wins over `b`: later observed_at, then larger confirmed, cured, deaths.
bool supersedes(const CoalescedRecord& a, const CoalescedRecord& b) noexcept;

using DailyMap = std::map<std::pair<RegionId, Date>, CoalescedRecord>;

/// One record per (region, UTC day of observed_at); the superseding report wins.
DailyMap coalesce_daily(std::span<const NormalizedRow> rows);

// ------------------------------------------------------------------ ingest

struct SourceReport {
    std::string location;
    SourceKind kind = SourceKind::canonical_csv;
    bool ok = false;
    std::string error;
    std::size_t rows_parsed = 0;
    std::size_t rows_skipped = 0;
};

struct IngestReport {
    bool published = false;
    std::uint64_t version_id = 0;
    std::vector<SourceReport> sources;
    std::size_t rows_parsed = 0;
    std::size_t rows_skipped = 0;
    std::size_t rows_attributed = 0;
    std::size_t rows_quarantined = 0;
    std::map<std::string, std::size_t> quarantined_names;
    std::size_t records = 0;
    std::size_t regions = 0;
    std::size_t anomalies = 0;
    /// (region, date) repaired records added or changed relative to the previous version.
    std::size_t value_changes = 0;
};

struct IngestResult {
    /// Null when every source failed; the store is then unchanged.
    VersionPtr version;
    IngestReport report;
};

/// fetch -> parse -> normalize -> merge with the current version -> repair -> publish.
/// Sources are fetched concurrently; merging is deterministic. Throws
/// InvalidArgument for an empty source list.
IngestResult ingest_snapshot(std::span<const SourceDescriptor> sources, Store& store, const Catalog& catalog,
                             const FetchOptions& options = {});

/// Counts repaired records in `next` that are new or differ from `prev`.
std::size_t count_value_changes(const DatasetVersion& prev, const DatasetVersion& next);

} // namespace epitrack
