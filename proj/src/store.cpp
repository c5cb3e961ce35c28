#include "epitrack/store.hpp"

#include "epitrack/error.hpp"

#include <algorithm>
#include <tuple>

namespace epitrack {

const RegionMeta* DatasetVersion::meta(const RegionId& id) const {
    const auto it = registry.find(id);
    return it == registry.end() ? nullptr : &it->second;
}

const CumulativeSeries* DatasetVersion::find_series(const RegionId& id) const {
    const auto it = series.find(id);
    return it == series.end() ? nullptr : &it->second;
}

std::optional<std::pair<Date, Date>> DatasetVersion::date_range() const {
    std::optional<std::pair<Date, Date>> range;
    for (const auto& [id, s] : series) {
        if (s.empty()) continue;
        const Date lo = *s.first_date();
        const Date hi = *s.last_date();
        if (!range) range.emplace(lo, hi);
        else range = std::pair{std::min(range->first, lo), std::max(range->second, hi)};
    }
    return range;
}

std::vector<RegionId> DatasetVersion::countries() const {
    std::vector<RegionId> out;
    for (const auto& [id, meta] : registry)
        if (id.is_country() && !id.is_quarantine()) out.push_back(id);
    return out;
}

VersionBuilder::VersionBuilder(const DatasetVersion& base) : series_(base.series), registry_(base.registry) {}

void VersionBuilder::put_series(CumulativeSeries series) {
    RegionId id = series.region;
    series_.insert_or_assign(std::move(id), std::move(series));
}

void VersionBuilder::put_region(RegionMeta meta) {
    RegionId id = meta.id;
    registry_.insert_or_assign(std::move(id), std::move(meta));
}

void VersionBuilder::close_hierarchy(const Catalog& catalog) {
    for (const auto& [id, s] : series_) {
        for (std::optional<RegionId> cur = id; cur; cur = cur->parent())
            if (!registry_.contains(*cur)) registry_.emplace(*cur, catalog.meta_for(*cur));
    }
}

void validate(const std::map<RegionId, CumulativeSeries>& series, const std::map<RegionId, RegionMeta>& registry) {
    const auto fail = [](const RegionId& id, const std::string& what) {
        throw ValidationError("region " + id.path() + ": " + what);
    };
    for (const auto& [id, meta] : registry) {
        if (meta.id != id) fail(id, "registry key does not match its metadata");
        if (meta.display_name.empty()) fail(id, "empty display name");
        if (meta.population && *meta.population <= 0) fail(id, "population must be positive");
    }
    for (const auto& [id, s] : series) {
        if (s.region != id) fail(id, "series key does not match its region");
        for (std::optional<RegionId> cur = id; cur; cur = cur->parent())
            if (!registry.contains(*cur)) fail(id, "missing registry entry for " + cur->path());
        if (s.repaired.size() != s.raw.size()) fail(id, "repaired and raw differ in length");
        if (s.observed.size() != s.raw.size()) fail(id, "observed timestamps differ in length");
        std::vector<AnomalyFlag> expected;
        for (std::size_t i = 0; i < s.raw.size(); ++i) {
            const DailyRecord& raw = s.raw[i];
            const DailyRecord& fixed = s.repaired[i];
            const std::string at = " on " + raw.date.to_string();
            if (i > 0 && !(s.raw[i - 1].date < raw.date)) fail(id, "dates out of order" + at);
            if (fixed.date != raw.date) fail(id, "repaired date differs from raw" + at);
            if (utc_day(s.observed[i]) != raw.date) fail(id, "observation time outside its day" + at);
            for (const Field f : all_fields) {
                const std::string field = " field " + std::string(to_string(f));
                if (raw[f] < 0) fail(id, "negative raw value" + at + field);
                const Count want = i == 0 ? raw[f] : std::max(raw[f], s.repaired[i - 1][f]);
                if (fixed[f] != want) fail(id, "repaired value is not the running maximum" + at + field);
                if (want != raw[f]) expected.push_back({raw.date, f, raw[f], want});
            }
        }
        if (expected != s.anomalies) fail(id, "anomaly list does not match raw/repaired differences");
    }
}

Store::Store() : current_(std::make_shared<const DatasetVersion>()) {}

Store::Store(VersionPtr initial) : current_(initial ? std::move(initial) : std::make_shared<const DatasetVersion>()) {}

VersionPtr Store::current() const {
    std::lock_guard lock(read_mutex_);
    return current_;
}

VersionPtr Store::publish(VersionBuilder builder) {
    std::lock_guard writer(write_mutex_);
    validate(builder.series_, builder.registry_);
    auto next = std::make_shared<DatasetVersion>();
    next->version_id = current()->version_id + 1;
    next->as_of = clock_ ? clock_() : std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    next->series = std::move(builder.series_);
    next->registry = std::move(builder.registry_);
    if (sink_) sink_(*next);
    VersionPtr published = std::move(next);
    {
        std::lock_guard lock(read_mutex_);
        current_ = published;
    }
    return published;
}

Count latest_confirmed(const RegionId& region, const DatasetVersion& version) {
    if (const auto* s = version.find_series(region)) return s->empty() ? 0 : s->repaired.back().confirmed;
    Count total = 0;
    if (version.registry.contains(region))
        for (const auto& child : children(region, version)) total += latest_confirmed(child, version);
    return total;
}

std::vector<SearchHit> resolve_region(std::string_view query, const DatasetVersion& version) {
    const std::string needle = fold_name(query);
    if (needle.empty()) throw InvalidArgument("search query is empty");

    struct Ranked {
        int rank;
        Count confirmed;
        const RegionMeta* meta;
    };
    std::vector<Ranked> ranked;
    for (const auto& [id, meta] : version.registry) {
        int best = 3;
        const auto consider = [&](std::string_view name) {
            const std::string folded = fold_name(name);
            if (folded == needle) best = 0;
            else if (folded.starts_with(needle)) best = std::min(best, 1);
            else if (folded.find(needle) != std::string::npos) best = std::min(best, 2);
        };
        consider(meta.display_name);
        for (const auto& alias : meta.aliases) consider(alias);
        if (best < 3) ranked.push_back({best, 0, &meta});
    }
    for (auto& r : ranked) r.confirmed = latest_confirmed(r.meta->id, version);
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return std::tie(a.rank, b.confirmed, a.meta->id) < std::tie(b.rank, a.confirmed, b.meta->id);
    });
    std::vector<SearchHit> out;
    for (std::size_t i = 0; i < ranked.size() && i < max_search_results; ++i)
        out.push_back({ranked[i].meta->id, ranked[i].meta->display_name});
    return out;
}

std::vector<RegionId> children(const RegionId& region, const DatasetVersion& version) {
    if (!version.registry.contains(region)) throw NotFound("unknown region " + region.path());
    std::vector<RegionId> out;
    if (region.city) return out;
    // Children sort directly after their parent in the registry order.
    for (auto it = version.registry.upper_bound(region); it != version.registry.end(); ++it) {
        const RegionId& id = it->first;
        if (id.country != region.country) break;
        if (region.province && id.province != region.province) break;
        if (id.is_child_of(region)) out.push_back(id);
    }
    return out;
}

const CumulativeSeries& get_series(const RegionId& region, const DatasetVersion& version) {
    const auto* s = version.find_series(region);
    if (!s) throw NotFound("no series for region " + region.path());
    return *s;
}

} // namespace epitrack
