#include "epitrack/api.hpp"

#include "epitrack/error.hpp"

#include <charconv>
#include <vector>

namespace epitrack::api {

namespace {

json opt_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json opt_date(const std::optional<Date>& d) {
    return d ? json(d->to_string()) : json(nullptr);
}

json as_of_json(const DatasetVersion& v) {
    return v.version_id ? json(format_timestamp(v.as_of)) : json(nullptr);
}

std::optional<Date> latest_date(const DatasetVersion& v) {
    const auto range = v.date_range();
    if (!range) return std::nullopt;
    return range->second;
}

json summary_json(const WorldSummary& s) {
    return {{"countries_affected", s.countries_affected},
            {"total_confirmed", s.total_confirmed},
            {"total_cured", s.total_cured},
            {"total_deaths", s.total_deaths},
            {"total_active", s.total_active}};
}

std::optional<Date> date_param(const Params& params, const char* key) {
    const auto it = params.find(key);
    if (it == params.end() || it->second.empty()) return std::nullopt;
    return Date::parse(it->second);
}

std::vector<std::string_view> split_path(std::string_view path) {
    std::vector<std::string_view> parts;
    while (!path.empty()) {
        if (path.front() == '/') {
            path.remove_prefix(1);
            continue;
        }
        const auto slash = path.find('/');
        parts.push_back(path.substr(0, slash));
        if (slash == std::string_view::npos) break;
        path.remove_prefix(slash);
    }
    return parts;
}

} // namespace

json region_json(const RegionId& id) {
    return {{"id", id.path()},
            {"country", id.country},
            {"province", id.province ? json(*id.province) : json(nullptr)},
            {"city", id.city ? json(*id.city) : json(nullptr)}};
}

json summary_document(const DatasetVersion& v, std::optional<Date> date) {
    if (!date) date = latest_date(v);
    json doc = date ? summary_json(world_summary(v, *date)) : summary_json(WorldSummary{});
    doc["version_id"] = v.version_id;
    doc["as_of"] = as_of_json(v);
    doc["data_date"] = opt_date(date);
    return doc;
}

json map_document(const DatasetVersion& v, std::optional<Date> date) {
    if (!date) date = latest_date(v);
    json entries = json::array();
    json totals = summary_json(WorldSummary{});
    if (date) {
        const MapSnapshot snap = map_snapshot(v, *date);
        for (const auto& e : snap.entries)
            entries.push_back({{"country", e.country.country},
                               {"display_name", v.meta(e.country)->display_name},
                               {"confirmed", e.confirmed},
                               {"bucket", e.bucket}});
        totals = summary_json(snap.totals);
    }
    return {{"version_id", v.version_id}, {"as_of", as_of_json(v)}, {"date", opt_date(date)},
            {"bucket_count", bucket_count}, {"entries", std::move(entries)}, {"totals", std::move(totals)}};
}

json search_document(const DatasetVersion& v, std::string_view query) {
    json results = json::array();
    for (const auto& hit : resolve_region(query, v))
        results.push_back({{"region", region_json(hit.id)}, {"display_name", hit.display_name}});
    return {{"query", std::string(query)}, {"results", std::move(results)}};
}

json point_json(const DerivedPoint& p) {
    return {{"date", p.date.to_string()},
            {"confirmed", p.confirmed},
            {"cured", p.cured},
            {"deaths", p.deaths},
            {"daily_confirmed", p.daily_confirmed},
            {"daily_cured", p.daily_cured},
            {"daily_deaths", p.daily_deaths},
            {"active", p.active},
            {"active_clamped", p.active_clamped},
            {"mortality_rate", opt_json(p.mortality_rate)},
            {"cure_rate", opt_json(p.cure_rate)},
            {"per_million", opt_json(p.per_million)}};
}

json series_document(const DatasetVersion& v, const RegionId& region) {
    const RegionMeta* meta = v.meta(region);
    if (!meta) throw NotFound("unknown region " + region.path());
    json points = json::array();
    for (const auto& p : derive_series(effective_series(v, region), *meta)) points.push_back(point_json(p));
    return {{"version_id", v.version_id},
            {"region", region_json(region)},
            {"display_name", meta->display_name},
            {"continent", std::string(to_string(meta->continent))},
            {"population", meta->population ? json(*meta->population) : json(nullptr)},
            {"points", std::move(points)}};
}

json compare_document(const DatasetVersion& v, std::string_view regions, std::string_view metric,
                      std::optional<Date> from, std::optional<Date> to) {
    std::vector<std::string_view> names;
    for (std::string_view rest = regions; !rest.empty();) {
        const auto comma = rest.find(',');
        names.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (names.empty() || names.size() > max_compare_regions)
        throw InvalidArgument("regions must list between 1 and " + std::to_string(max_compare_regions) + " regions");
    const Metric m = parse_metric(metric);
    std::vector<RegionId> ids;
    for (const auto name : names) {
        if (name.empty()) throw InvalidArgument("empty region in list");
        ids.push_back(RegionId::parse_path(name));
    }
    const ComparisonTable table = compare(v, ids, m, from, to);
    json doc{{"version_id", v.version_id}, {"metric", std::string(to_string(table.metric))}};
    json& rs = doc["regions"] = json::array();
    for (const auto& id : table.regions) rs.push_back(region_json(id));
    json& ds = doc["dates"] = json::array();
    for (const auto d : table.dates) ds.push_back(d.to_string());
    json& vs = doc["values"] = json::array();
    for (const auto& row : table.values) {
        json r = json::array();
        for (const auto& cell : row) r.push_back(opt_json(cell));
        vs.push_back(std::move(r));
    }
    return doc;
}

namespace {

json node_json(const HierarchyNode& n) {
    json kids = json::array();
    for (const auto& c : n.children) kids.push_back(node_json(c));
    return {{"region", region_json(n.id)}, {"display_name", n.display_name}, {"latest_date", opt_date(n.latest_date)},
            {"confirmed", n.confirmed},   {"cured", n.cured},               {"deaths", n.deaths},
            {"active", n.active},         {"children", std::move(kids)}};
}

} // namespace

json hierarchy_document(const DatasetVersion& v, const RegionId& country) {
    json doc = node_json(hierarchy(v, country));
    doc["version_id"] = v.version_id;
    return doc;
}

json meta_document(const DatasetVersion& v) {
    const auto range = v.date_range();
    return {{"version_id", v.version_id},
            {"as_of", as_of_json(v)},
            {"region_count", v.registry.size()},
            {"date_range", range ? json{{"from", range->first.to_string()}, {"to", range->second.to_string()}}
                                 : json(nullptr)}};
}

json continents_document(const DatasetVersion& v) {
    json groups = json::object();
    for (const auto& [continent, countries] : continent_groups(v)) {
        json list = json::array();
        for (const auto& c : countries) list.push_back({{"country", c.country}, {"display_name", v.meta(c)->display_name}});
        groups[std::string(to_string(continent))] = std::move(list);
    }
    return {{"version_id", v.version_id}, {"groups", std::move(groups)}};
}

json top_document(const DatasetVersion& v, std::string_view metric, std::optional<Date> date, std::size_t k) {
    const Metric m = parse_metric(metric);
    if (!date) date = latest_date(v);
    json entries = json::array();
    if (date)
        for (const auto& [id, value] : top_k(v, m, *date, k))
            entries.push_back({{"region", region_json(id)}, {"value", opt_json(value)}});
    return {{"version_id", v.version_id}, {"metric", std::string(to_string(m))}, {"date", opt_date(date)},
            {"entries", std::move(entries)}};
}

json error_document(int status, std::string_view message) {
    const char* code = status == 400 ? "invalid_argument" : status == 404 ? "not_found" : "internal";
    return {{"status", status}, {"code", code}, {"message", std::string(message)}};
}

Response Service::handle(std::string_view path, const Params& params) const {
    const VersionPtr pinned = store_.current();
    const auto fail = [](int status, std::string_view message) {
        return Response{status, "application/json", error_document(status, message).dump()};
    };
    try {
        return route(*pinned, path, params);
    } catch (const NotFound& e) {
        return fail(404, e.what());
    } catch (const InvalidArgument& e) {
        return fail(400, e.what());
    } catch (const std::exception& e) {
        return fail(500, e.what());
    }
}

Response Service::route(const DatasetVersion& v, std::string_view path, const Params& params) const {
    if (path == "/healthz") return {200, "text/plain", "ok"};
    const auto parts = split_path(path);
    if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") throw NotFound("no such endpoint");
    const auto param = [&](const char* key) -> std::string_view {
        const auto it = params.find(key);
        return it == params.end() ? std::string_view{} : std::string_view(it->second);
    };
    const auto ok = [](const json& doc) { return Response{200, "application/json", doc.dump()}; };
    const std::string_view endpoint = parts[2];

    if (parts.size() == 3) {
        if (endpoint == "summary") return ok(summary_document(v, date_param(params, "date")));
        if (endpoint == "map") return ok(map_document(v, date_param(params, "date")));
        if (endpoint == "meta") return ok(meta_document(v));
        if (endpoint == "continents") return ok(continents_document(v));
        if (endpoint == "regions") {
            if (!params.contains("q")) throw InvalidArgument("missing query parameter 'q'");
            return ok(search_document(v, param("q")));
        }
        if (endpoint == "compare") {
            if (param("regions").empty()) throw InvalidArgument("missing query parameter 'regions'");
            if (param("metric").empty()) throw InvalidArgument("missing query parameter 'metric'");
            return ok(compare_document(v, param("regions"), param("metric"), date_param(params, "from"),
                                       date_param(params, "to")));
        }
        if (endpoint == "top") {
            std::size_t k = 5;
            if (const auto text = param("k"); !text.empty()) {
                const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
                if (ec != std::errc{} || ptr != text.data() + text.size() || k == 0 || k > 1000)
                    throw InvalidArgument("k must be an integer in [1, 1000]");
            }
            const std::string_view metric = param("metric").empty() ? "total_confirmed" : param("metric");
            return ok(top_document(v, metric, date_param(params, "date"), k));
        }
    }
    if (endpoint == "regions" && parts.size() >= 5 && parts.size() <= 7 && parts.back() == "series") {
        std::string joined(parts[3]);
        for (std::size_t i = 4; i + 1 < parts.size(); ++i) joined += "/" + std::string(parts[i]);
        RegionId id;
        try {
            id = RegionId::parse_path(joined);
        } catch (const InvalidArgument&) {
            throw NotFound("unknown region " + joined);
        }
        return ok(series_document(v, id));
    }
    if (endpoint == "hierarchy" && parts.size() == 4) {
        RegionId id;
        try {
            id = RegionId::make(std::string(parts[3]));
        } catch (const InvalidArgument&) {
            throw NotFound("unknown country " + std::string(parts[3]));
        }
        return ok(hierarchy_document(v, id));
    }
    throw NotFound("no such endpoint");
}

} // namespace epitrack::api
