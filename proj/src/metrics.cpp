#include "epitrack/metrics.hpp"

#include "epitrack/error.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <tuple>

namespace epitrack {

std::vector<DerivedPoint> derive_series(const CumulativeSeries& series, std::optional<std::int64_t> population) {
    std::vector<DerivedPoint> out;
    out.reserve(series.repaired.size());
    const DailyRecord* prev = nullptr;
    for (const DailyRecord& r : series.repaired) {
        if (prev && !(prev->date < r.date))
            throw InvalidArgument(series.region.path() + ": dates not increasing at " + r.date.to_string());
        for (const Field f : all_fields) {
            if (r[f] < 0 || (prev && r[f] < (*prev)[f]))
                throw InvalidArgument(series.region.path() + ": " + std::string(to_string(f)) + " decreases on " +
                                      r.date.to_string() + " (series not repaired)");
        }
        DerivedPoint p;
        p.date = r.date;
        p.confirmed = r.confirmed;
        p.cured = r.cured;
        p.deaths = r.deaths;
        p.daily_confirmed = prev ? r.confirmed - prev->confirmed : r.confirmed;
        p.daily_cured = prev ? r.cured - prev->cured : r.cured;
        p.daily_deaths = prev ? r.deaths - prev->deaths : r.deaths;
        const Count diff = r.confirmed - r.cured - r.deaths;
        p.active = std::max<Count>(diff, 0);
        p.active_clamped = diff < 0;
        if (r.confirmed > 0) {
            p.mortality_rate = static_cast<double>(r.deaths) / static_cast<double>(r.confirmed);
            p.cure_rate = static_cast<double>(r.cured) / static_cast<double>(r.confirmed);
        }
        if (population) p.per_million = static_cast<double>(r.confirmed) * 1e6 / static_cast<double>(*population);
        out.push_back(p);
        prev = &r;
    }
    return out;
}

std::vector<DerivedPoint> derive_series(const CumulativeSeries& series, const RegionMeta& meta) {
    return derive_series(series, meta.population);
}

CumulativeSeries rollup(std::span<const CumulativeSeries> children, RegionId parent) {
    if (children.empty()) throw InvalidArgument("rollup of " + parent.path() + " needs at least one child");
    std::set<Date> dates;
    for (const auto& child : children)
        for (const auto& r : child.repaired) dates.insert(r.date);

    std::vector<DailyRecord> summed;
    summed.reserve(dates.size());
    std::vector<std::size_t> cursor(children.size(), 0);
    for (const Date d : dates) {
        DailyRecord total{d};
        for (std::size_t c = 0; c < children.size(); ++c) {
            const auto& recs = children[c].repaired;
            std::size_t& i = cursor[c];
            while (i < recs.size() && recs[i].date <= d) ++i;
            if (i == 0) continue;
            for (const Field f : all_fields) total[f] += recs[i - 1][f];
        }
        summed.push_back(total);
    }
    return make_series(std::move(parent), std::move(summed));
}

CumulativeSeries effective_series(const DatasetVersion& version, const RegionId& region) {
    if (const auto* own = version.find_series(region)) return *own;
    const auto kids = children(region, version);
    std::vector<CumulativeSeries> parts;
    for (const auto& kid : kids) {
        CumulativeSeries s = effective_series(version, kid);
        if (!s.empty()) parts.push_back(std::move(s));
    }
    if (parts.empty()) return CumulativeSeries{region, {}, {}, {}, {}};
    return rollup(parts, region);
}

DailyRecord value_at(const DatasetVersion& version, const RegionId& region, Date date) {
    DailyRecord out{date};
    if (const auto* own = version.find_series(region)) {
        if (const DailyRecord* r = own->at_or_before(date)) {
            out.confirmed = r->confirmed;
            out.cured = r->cured;
            out.deaths = r->deaths;
        }
        return out;
    }
    for (const auto& kid : children(region, version)) {
        const DailyRecord part = value_at(version, kid, date);
        for (const Field f : all_fields) out[f] += part[f];
    }
    return out;
}

WorldSummary world_summary(const DatasetVersion& version, Date date) {
    WorldSummary s;
    for (const auto& country : version.countries()) {
        const DailyRecord v = value_at(version, country, date);
        if (v.confirmed > 0) ++s.countries_affected;
        s.total_confirmed += v.confirmed;
        s.total_cured += v.cured;
        s.total_deaths += v.deaths;
    }
    s.total_active = std::max<Count>(s.total_confirmed - s.total_cured - s.total_deaths, 0);
    return s;
}

int choropleth_bucket(Count confirmed) noexcept {
    if (confirmed <= 0) return 0;
    int bucket = 1;
    for (Count v = confirmed; v >= 10 && bucket < bucket_count - 1; v /= 10) ++bucket;
    return bucket;
}

MapSnapshot map_snapshot(const DatasetVersion& version, Date date) {
    MapSnapshot snap{date, {}, world_summary(version, date)};
    for (const auto& country : version.countries()) {
        const Count confirmed = value_at(version, country, date).confirmed;
        snap.entries.push_back({country, confirmed, choropleth_bucket(confirmed)});
    }
    return snap;
}

namespace {

constexpr std::array<std::pair<Metric, std::string_view>, 10> metric_names{{
    {Metric::total_confirmed, "total_confirmed"},
    {Metric::active, "active"},
    {Metric::deaths, "deaths"},
    {Metric::cured, "cured"},
    {Metric::daily_confirmed, "daily_confirmed"},
    {Metric::daily_deaths, "daily_deaths"},
    {Metric::daily_cured, "daily_cured"},
    {Metric::mortality_rate, "mortality_rate"},
    {Metric::cure_rate, "cure_rate"},
    {Metric::per_million, "per_million"},
}};

const RegionMeta& require_meta(const DatasetVersion& version, const RegionId& id) {
    const RegionMeta* meta = version.meta(id);
    if (!meta) throw NotFound("unknown region " + id.path());
    return *meta;
}

/// Metric value on `date`, following the carry-forward rule.
std::optional<double> value_on(std::span<const DerivedPoint> points, Metric metric, Date date) {
    auto it = std::upper_bound(points.begin(), points.end(), date,
                               [](Date d, const DerivedPoint& p) { return d < p.date; });
    if (it == points.begin()) return std::nullopt;
    const DerivedPoint& p = *std::prev(it);
    if (p.date != date && !carries_forward(metric)) return std::nullopt;
    return metric_value(p, metric);
}

} // namespace

std::string_view to_string(Metric m) noexcept {
    for (const auto& [value, name] : metric_names)
        if (value == m) return name;
    return "total_confirmed";
}

Metric parse_metric(std::string_view name) {
    for (const auto& [value, text] : metric_names)
        if (text == name) return value;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

bool carries_forward(Metric m) noexcept {
    switch (m) {
    case Metric::total_confirmed:
    case Metric::active:
    case Metric::deaths:
    case Metric::cured:
    case Metric::per_million: return true;
    default: return false;
    }
}

std::optional<double> metric_value(const DerivedPoint& p, Metric m) {
    switch (m) {
    case Metric::total_confirmed: return static_cast<double>(p.confirmed);
    case Metric::active: return static_cast<double>(p.active);
    case Metric::deaths: return static_cast<double>(p.deaths);
    case Metric::cured: return static_cast<double>(p.cured);
    case Metric::daily_confirmed: return static_cast<double>(p.daily_confirmed);
    case Metric::daily_deaths: return static_cast<double>(p.daily_deaths);
    case Metric::daily_cured: return static_cast<double>(p.daily_cured);
    case Metric::mortality_rate: return p.mortality_rate;
    case Metric::cure_rate: return p.cure_rate;
    case Metric::per_million: return p.per_million;
    }
    return std::nullopt;
}

ComparisonTable compare(const DatasetVersion& version, std::span<const RegionId> regions, Metric metric,
                        std::optional<Date> from, std::optional<Date> to) {
    if (regions.empty() || regions.size() > max_compare_regions)
        throw InvalidArgument("compare needs between 1 and " + std::to_string(max_compare_regions) + " regions");
    const auto range = version.date_range();
    if (!from && range) from = range->first;
    if (!to && range) to = range->second;
    if (from && to && *to < *from) throw InvalidArgument("'from' is after 'to'");

    std::vector<std::vector<DerivedPoint>> derived;
    std::set<Date> axis;
    for (const RegionId& id : regions) {
        const RegionMeta& meta = require_meta(version, id);
        auto& points = derived.emplace_back(derive_series(effective_series(version, id), meta));
        for (const auto& p : points)
            if (from && to && *from <= p.date && p.date <= *to) axis.insert(p.date);
    }

    ComparisonTable table;
    table.metric = metric;
    table.regions.assign(regions.begin(), regions.end());
    table.dates.assign(axis.begin(), axis.end());
    for (const auto& points : derived) {
        auto& row = table.values.emplace_back();
        row.reserve(table.dates.size());
        for (const Date d : table.dates) row.push_back(value_on(points, metric, d));
    }
    return table;
}

std::vector<std::pair<RegionId, std::optional<double>>> top_k(const DatasetVersion& version, Metric metric, Date date,
                                                              std::size_t k) {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    std::vector<std::pair<RegionId, std::optional<double>>> ranked;
    for (const auto& country : version.countries()) {
        const auto points = derive_series(effective_series(version, country), require_meta(version, country));
        ranked.emplace_back(country, value_on(points, metric, date));
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.has_value() != b.second.has_value()) return a.second.has_value();
        if (a.second && *a.second != *b.second) return *a.second > *b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::map<Continent, std::vector<RegionId>> continent_groups(const DatasetVersion& version) {
    std::map<Continent, std::vector<RegionId>> groups;
    for (const auto& country : version.countries()) groups[require_meta(version, country).continent].push_back(country);
    return groups;
}

namespace {

HierarchyNode build_node(const DatasetVersion& version, const RegionId& id) {
    HierarchyNode node;
    node.id = id;
    node.display_name = require_meta(version, id).display_name;
    const CumulativeSeries s = effective_series(version, id);
    if (!s.empty()) {
        const DailyRecord& last = s.repaired.back();
        node.latest_date = last.date;
        node.confirmed = last.confirmed;
        node.cured = last.cured;
        node.deaths = last.deaths;
        node.active = std::max<Count>(last.confirmed - last.cured - last.deaths, 0);
    }
    for (const auto& kid : children(id, version)) node.children.push_back(build_node(version, kid));
    std::sort(node.children.begin(), node.children.end(), [](const HierarchyNode& a, const HierarchyNode& b) {
        return std::tie(b.confirmed, a.id) < std::tie(a.confirmed, b.id);
    });
    return node;
}

} // namespace

HierarchyNode hierarchy(const DatasetVersion& version, const RegionId& country) {
    if (!country.is_country()) throw InvalidArgument(country.path() + " is not a country");
    require_meta(version, country);
    return build_node(version, country);
}

} // namespace epitrack
