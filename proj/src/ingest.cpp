#include "epitrack/ingest.hpp"

#include "epitrack/csv.hpp"
#include "epitrack/error.hpp"
#include "epitrack/persistence.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <future>
#include <tuple>

namespace epitrack {

std::string_view to_string(SourceKind kind) noexcept {
    return kind == SourceKind::dxy_json ? "dxy_json" : "canonical_csv";
}

SourceDescriptor SourceDescriptor::parse(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("source must be kind=location, got '" + std::string(text) + "'");
    const auto kind = text.substr(0, eq);
    const auto location = csv::trim(text.substr(eq + 1));
    SourceDescriptor desc;
    if (kind == "canonical_csv") desc.kind = SourceKind::canonical_csv;
    else if (kind == "dxy_json") desc.kind = SourceKind::dxy_json;
    else throw InvalidArgument("unknown source kind '" + std::string(kind) + "'");
    if (location.empty()) throw InvalidArgument("source location is empty");
    desc.location = std::string(location);
    return desc;
}

// ----------------------------------------------------------------- parsing

namespace {

std::optional<Count> parse_count(std::string_view s, std::string& why) {
    Count v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        why = "count '" + std::string(s) + "' is not an integer";
        return std::nullopt;
    }
    if (v < 0) {
        why = "count " + std::string(s) + " is negative";
        return std::nullopt;
    }
    return v;
}

std::optional<std::string> optional_field(std::string_view s) {
    if (s.empty()) return std::nullopt;
    return std::string(s);
}

} // namespace

CsvParseResult parse_canonical_csv_lenient(std::string_view data) {
    CsvParseResult out;
    csv::LineReader reader(data);
    std::string_view line;
    if (!reader.next(line) || line != canonical_csv_header) {
        out.errors.push_back({1, "expected header '" + std::string(canonical_csv_header) + "'"});
        return out;
    }
    while (reader.next(line)) {
        const std::size_t n = reader.line_number();
        if (line.empty()) continue;
        const auto error = [&](std::string message) { out.errors.push_back({n, std::move(message)}); };
        if (line.find('\r') != std::string_view::npos) {
            error("carriage return in line (LF line endings required)");
            continue;
        }
        const auto f = csv::split(line);
        if (f.size() != 7) {
            error("expected 7 fields, found " + std::to_string(f.size()));
            continue;
        }
        RawRow row;
        try {
            row.observed_at = parse_timestamp(f[0]);
        } catch (const Error& e) {
            error(e.what());
            continue;
        }
        if (f[1].empty()) {
            error("country is empty");
            continue;
        }
        if (!f[3].empty() && f[2].empty()) {
            error("city given without a province");
            continue;
        }
        row.raw_country = std::string(f[1]);
        row.raw_province = optional_field(f[2]);
        row.raw_city = optional_field(f[3]);
        std::string why;
        const auto c = parse_count(f[4], why);
        const auto r = c ? parse_count(f[5], why) : std::nullopt;
        const auto d = r ? parse_count(f[6], why) : std::nullopt;
        if (!d) {
            error(why);
            continue;
        }
        row.confirmed = *c;
        row.cured = *r;
        row.deaths = *d;
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<RawRow> parse_canonical_csv(std::string_view data) {
    CsvParseResult result = parse_canonical_csv_lenient(data);
    if (!result.errors.empty()) throw ParseError(result.errors.front().line, result.errors.front().message);
    return std::move(result.rows);
}

namespace {

using nlohmann::json;

std::optional<std::string> string_field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return std::nullopt;
    std::string value(csv::trim(it->get_ref<const std::string&>()));
    if (value.empty()) return std::nullopt;
    return value;
}

/// Missing or null counts read as 0; anything else must be a non-negative integer.
std::optional<Count> count_field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return 0;
    if (it->is_number_unsigned()) return static_cast<Count>(it->get<std::uint64_t>());
    if (it->is_number_integer()) {
        const auto v = it->get<std::int64_t>();
        if (v < 0) return std::nullopt;
        return v;
    }
    return std::nullopt;
}

bool read_counts(const json& obj, RawRow& row) {
    const auto c = count_field(obj, "confirmedCount");
    const auto r = count_field(obj, "curedCount");
    const auto d = count_field(obj, "deadCount");
    if (!c || !r || !d) return false;
    row.confirmed = *c;
    row.cured = *r;
    row.deaths = *d;
    return true;
}

} // namespace

DxyParseResult parse_dxy_json(std::string_view data) {
    json doc;
    try {
        doc = json::parse(data.begin(), data.end());
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError(0, "expected a JSON array of area records");

    DxyParseResult out;
    for (const json& rec : doc) {
        if (!rec.is_object()) {
            ++out.skipped;
            continue;
        }
        const auto province = string_field(rec, "provinceName");
        const auto time = rec.find("updateTime");
        RawRow area;
        if (!province || time == rec.end() || !time->is_number_integer() || !read_counts(rec, area)) {
            ++out.skipped;
            continue;
        }
        area.observed_at = timestamp_from_epoch_ms(time->get<std::int64_t>());
        const auto country_name = string_field(rec, "countryName");
        area.raw_country = string_field(rec, "countryEnglishName").value_or(country_name.value_or("中国"));
        const auto province_en = string_field(rec, "provinceEnglishName");
        const auto country_en = string_field(rec, "countryEnglishName");
        const bool country_level = (country_name && *province == *country_name) || (province_en && province_en == country_en);
        if (!country_level) area.raw_province = province;
        out.rows.push_back(area);

        const auto cities = rec.find("cities");
        if (cities == rec.end() || !cities->is_array()) continue;
        for (const json& city : *cities) {
            RawRow row;
            const auto name = city.is_object() ? string_field(city, "cityName") : std::nullopt;
            if (!name || country_level || !read_counts(city, row)) {
                ++out.skipped;
                continue;
            }
            row.observed_at = area.observed_at;
            row.raw_country = area.raw_country;
            row.raw_province = area.raw_province;
            row.raw_city = name;
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

// ---------------------------------------------------------- normalization

namespace {

std::optional<std::string> clean_name(const std::optional<std::string>& raw) {
    if (!raw) return std::nullopt;
    std::string name(csv::trim(*raw));
    std::replace(name.begin(), name.end(), '/', '-');
    std::replace(name.begin(), name.end(), ',', ' ');
    if (name.empty()) return std::nullopt;
    return name;
}

} // namespace

RegionId normalize_region(const RawRow& row, const AliasTable& aliases) {
    const RegionId* country = aliases.find(row.raw_country);
    if (!country) return RegionId{std::string(quarantine_country), std::nullopt, std::nullopt};
    RegionId id = *country;

    const auto province = clean_name(row.raw_province);
    if (province && fold_name(*province) != fold_name(row.raw_country)) {
        const RegionId* p = aliases.find(*province);
        if (p && p->country == id.country && p->province) {
            id.province = p->province;
            id.city = p->city;
        } else if (!(p && p->country == id.country)) {
            id.province = province;
            id.city.reset();
        }
    }

    const auto city = clean_name(row.raw_city);
    if (city && id.province) {
        const RegionId* c = aliases.find(*city);
        if (c && c->country == id.country && c->province == id.province && c->city) id.city = c->city;
        else id.city = city;
    }
    return id;
}

bool supersedes(const CoalescedRecord& a, const CoalescedRecord& b) noexcept {
    return std::tie(a.observed_at, a.record.confirmed, a.record.cured, a.record.deaths) >
           std::tie(b.observed_at, b.record.confirmed, b.record.cured, b.record.deaths);
}

namespace {

void offer(DailyMap& map, const RegionId& region, const CoalescedRecord& candidate) {
    const auto [it, inserted] = map.try_emplace({region, candidate.record.date}, candidate);
    if (!inserted && supersedes(candidate, it->second)) it->second = candidate;
}

} // namespace

DailyMap coalesce_daily(std::span<const NormalizedRow> rows) {
    DailyMap out;
    for (const auto& [region, row] : rows) {
        const Date day = utc_day(row.observed_at);
        offer(out, region, {{day, row.confirmed, row.cured, row.deaths}, row.observed_at});
    }
    return out;
}

// ------------------------------------------------------------------ ingest

std::size_t count_value_changes(const DatasetVersion& prev, const DatasetVersion& next) {
    std::size_t changes = 0;
    for (const auto& [id, s] : next.series) {
        const CumulativeSeries* old = prev.find_series(id);
        for (const DailyRecord& r : s.repaired) {
            const DailyRecord* before = old ? old->on(r.date) : nullptr;
            if (!before || !(*before == r)) ++changes;
        }
    }
    return changes;
}

IngestResult ingest_snapshot(std::span<const SourceDescriptor> sources, Store& store, const Catalog& catalog,
                             const FetchOptions& options) {
    if (sources.empty()) throw InvalidArgument("ingest needs at least one source");

    std::vector<std::future<std::string>> fetches;
    fetches.reserve(sources.size());
    for (const auto& desc : sources)
        fetches.push_back(std::async(std::launch::async, [&desc, &options] { return fetch_source(desc, options); }));

    IngestResult result;
    IngestReport& report = result.report;
    std::vector<NormalizedRow> rows;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        SourceReport& src = report.sources.emplace_back();
        src.location = sources[i].location;
        src.kind = sources[i].kind;
        try {
            const std::string bytes = fetches[i].get();
            std::vector<RawRow> parsed;
            if (sources[i].kind == SourceKind::canonical_csv) {
                parsed = parse_canonical_csv(bytes);
            } else {
                DxyParseResult dxy = parse_dxy_json(bytes);
                parsed = std::move(dxy.rows);
                src.rows_skipped = dxy.skipped;
            }
            src.rows_parsed = parsed.size() + src.rows_skipped;
            for (auto& row : parsed) {
                RegionId region = normalize_region(row, catalog.aliases());
                if (region.is_quarantine()) {
                    ++report.rows_quarantined;
                    ++report.quarantined_names[row.raw_country];
                }
                rows.push_back({std::move(region), std::move(row)});
            }
            src.ok = true;
            report.rows_parsed += src.rows_parsed;
            report.rows_skipped += src.rows_skipped;
        } catch (const std::exception& e) {
            src.error = e.what();
        }
    }
    report.rows_attributed = rows.size();
    if (std::none_of(report.sources.begin(), report.sources.end(), [](const SourceReport& s) { return s.ok; }))
        return result;

    const VersionPtr current = store.current();
    DailyMap merged;
    for (const auto& [id, s] : current->series)
        for (std::size_t i = 0; i < s.raw.size(); ++i) offer(merged, id, {s.raw[i], s.observed[i]});
    for (const auto& [key, rec] : coalesce_daily(rows)) offer(merged, key.first, rec);

    VersionBuilder builder;
    for (auto it = merged.begin(); it != merged.end();) {
        const RegionId& region = it->first.first;
        std::vector<DailyRecord> raw;
        std::vector<Timestamp> observed;
        for (; it != merged.end() && it->first.first == region; ++it) {
            raw.push_back(it->second.record);
            observed.push_back(it->second.observed_at);
        }
        CumulativeSeries series = make_series(region, std::move(raw), std::move(observed));
        report.anomalies += series.anomalies.size();
        report.records += series.raw.size();
        builder.put_series(std::move(series));
    }
    report.regions = builder.series().size();
    builder.close_hierarchy(catalog);

    result.version = store.publish(std::move(builder));
    report.published = true;
    report.version_id = result.version->version_id;
    report.value_changes = count_value_changes(*current, *result.version);
    return result;
}

} // namespace epitrack
