#include "epitrack/catalog.hpp"

#include "epitrack/csv.hpp"
#include "epitrack/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace epitrack {

namespace {

std::optional<std::string> opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

} // namespace

std::string fold_name(std::string_view raw) {
    std::string out(csv::trim(raw));
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

AliasTable AliasTable::parse(std::string_view csv_text) {
    AliasTable table;
    for (const auto& row : csv::read_table(csv_text, "raw_name,country,province,city", 4)) {
        try {
            table.add(row[0], RegionId::make(row[1], opt(row[2]), opt(row[3])));
        } catch (const Error& e) {
            throw ParseError(row.line, e.what());
        }
    }
    return table;
}

void AliasTable::add(std::string_view raw_name, const RegionId& target) {
    std::string key = fold_name(raw_name);
    if (key.empty()) throw ValidationError("empty alias for " + target.path());
    const auto [it, inserted] = by_name_.try_emplace(key, target);
    if (!inserted) {
        if (it->second != target)
            throw ValidationError("alias '" + std::string(raw_name) + "' maps to both " + it->second.path() + " and " +
                                  target.path());
        return;
    }
    by_region_[target].emplace_back(csv::trim(raw_name));
}

const RegionId* AliasTable::find(std::string_view raw_name) const {
    const auto it = by_name_.find(fold_name(raw_name));
    return it == by_name_.end() ? nullptr : &it->second;
}

const std::vector<std::string>* AliasTable::names_of(const RegionId& id) const {
    const auto it = by_region_.find(id);
    return it == by_region_.end() ? nullptr : &it->second;
}

std::map<std::string, Continent> parse_continent_table(std::string_view csv_text) {
    std::map<std::string, Continent> out;
    for (const auto& row : csv::read_table(csv_text, "country,continent", 2)) {
        const auto c = parse_continent(row[1]);
        if (!c) throw ParseError(row.line, "unknown continent '" + row[1] + "'");
        out[row[0]] = *c;
    }
    return out;
}

std::map<std::string, std::int64_t> parse_population_table(std::string_view csv_text) {
    std::map<std::string, std::int64_t> out;
    for (const auto& row : csv::read_table(csv_text, "country,population,source_year", 3)) {
        std::int64_t value = 0;
        const auto& s = row[1];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc{} || ptr != s.data() + s.size() || value <= 0)
            throw ParseError(row.line, "population must be a positive integer");
        out[row[0]] = value;
    }
    return out;
}

Catalog::Catalog(AliasTable aliases, std::map<std::string, Continent> continents,
                 std::map<std::string, std::int64_t> populations)
    : aliases_(std::move(aliases)), continents_(continents.begin(), continents.end()),
      populations_(populations.begin(), populations.end()) {}

Catalog Catalog::load(const std::filesystem::path& dir) {
    return Catalog(AliasTable::parse(read_file(dir / alias_file)), parse_continent_table(read_file(dir / continent_file)),
                   parse_population_table(read_file(dir / population_file)));
}

bool Catalog::knows_country(std::string_view code) const {
    return continents_.contains(code);
}

std::optional<Continent> Catalog::continent(std::string_view code) const {
    const auto it = continents_.find(code);
    if (it == continents_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::int64_t> Catalog::population(std::string_view code) const {
    const auto it = populations_.find(code);
    if (it == populations_.end()) return std::nullopt;
    return it->second;
}

RegionMeta Catalog::meta_for(const RegionId& id) const {
    RegionMeta meta;
    meta.id = id;
    meta.continent = continent(id.country).value_or(Continent::Other);
    if (id.is_country()) meta.population = population(id.country);
    if (const auto* names = aliases_.names_of(id)) {
        meta.display_name = names->front();
        meta.aliases.insert(names->begin(), names->end());
    } else if (id.is_quarantine()) {
        meta.display_name = "Unresolved regions";
    } else {
        meta.display_name = id.city ? *id.city : id.province ? *id.province : id.country;
    }
    meta.aliases.insert(meta.display_name);
    return meta;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FetchError(false, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

} // namespace epitrack
