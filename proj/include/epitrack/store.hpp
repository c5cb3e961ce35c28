#pragma once

#include "epitrack/catalog.hpp"
#include "epitrack/series.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epitrack {

/// Immutable published snapshot of the whole store. Every series region is
/// in the registry, and so are all of its ancestors.
struct DatasetVersion {
    std::uint64_t version_id = 0;
    Timestamp as_of{};
    std::map<RegionId, CumulativeSeries> series;
    std::map<RegionId, RegionMeta> registry;

    const RegionMeta* meta(const RegionId& id) const;
    const CumulativeSeries* find_series(const RegionId& id) const;
    /// Earliest and latest record date over all series.
    std::optional<std::pair<Date, Date>> date_range() const;
    /// Country-level registry entries in order, quarantine bucket excluded.
    std::vector<RegionId> countries() const;
};

using VersionPtr = std::shared_ptr<const DatasetVersion>;

/// Staging area for the next version.
class VersionBuilder {
public:
    VersionBuilder() = default;
    /// Starts from the content of an existing version.
    explicit VersionBuilder(const DatasetVersion& base);

    void put_series(CumulativeSeries series);
    void put_region(RegionMeta meta);
    /// Adds registry entries (from the catalog) for every series region and its
    /// ancestors that is not registered yet.
    void close_hierarchy(const Catalog& catalog);

    const std::map<RegionId, CumulativeSeries>& series() const noexcept { return series_; }
    const std::map<RegionId, RegionMeta>& registry() const noexcept { return registry_; }

private:
    friend class Store;
    std::map<RegionId, CumulativeSeries> series_;
    std::map<RegionId, RegionMeta> registry_;
};

/// Checks every series and hierarchy-closure invariant; throws ValidationError
/// naming the region, date and field of the first violation.
void validate(const std::map<RegionId, CumulativeSeries>& series, const std::map<RegionId, RegionMeta>& registry);

/// Single-writer, many-reader holder of the current version. Readers take a
/// VersionPtr and keep it for as long as they need repeatable reads.
class Store {
public:
    using Clock = std::function<Timestamp()>;
    /// Called with the validated version before it becomes current; throwing aborts the publication.
    using Sink = std::function<void(const DatasetVersion&)>;

    Store();
    explicit Store(VersionPtr initial);

    VersionPtr current() const;

    VersionPtr publish(VersionBuilder builder);

    void set_clock(Clock clock) { clock_ = std::move(clock); }
    void set_sink(Sink sink) { sink_ = std::move(sink); }

private:
    mutable std::mutex read_mutex_;
    std::mutex write_mutex_;
    VersionPtr current_;
    Clock clock_;
    Sink sink_;
};

struct SearchHit {
    RegionId id;
    std::string display_name;

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

inline constexpr std::size_t max_search_results = 20;

/// Case-insensitive search over display names and aliases. Exact matches rank
/// before prefix matches before substring matches; then latest confirmed
/// descending, then RegionId.
std::vector<SearchHit> resolve_region(std::string_view query, const DatasetVersion& version);

/// Direct children, sorted. Throws NotFound for unregistered regions.
std::vector<RegionId> children(const RegionId& region, const DatasetVersion& version);

/// Throws NotFound when the region has no stored series.
const CumulativeSeries& get_series(const RegionId& region, const DatasetVersion& version);

/// Latest cumulative confirmed: the region's own series if stored, otherwise
/// the sum over its children.
Count latest_confirmed(const RegionId& region, const DatasetVersion& version);

} // namespace epitrack
