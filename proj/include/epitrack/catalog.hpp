#pragma once

#include "epitrack/region.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace epitrack {

/// Matching key for raw names: surrounding whitespace trimmed, ASCII letters
/// lowered. Non-ASCII bytes compare exactly.
std::string fold_name(std::string_view raw);

/// raw_name -> RegionId lookup, loaded from the `raw_name,country,province,city` table.
class AliasTable {
public:
    static AliasTable parse(std::string_view csv_text);

    /// Throws ValidationError if the folded name already maps elsewhere.
    void add(std::string_view raw_name, const RegionId& target);
    const RegionId* find(std::string_view raw_name) const;
    /// Names in table order; the first one is the region's display name.
    const std::vector<std::string>* names_of(const RegionId& id) const;
    std::size_t size() const noexcept { return by_name_.size(); }

private:
    std::unordered_map<std::string, RegionId> by_name_;
    std::map<RegionId, std::vector<std::string>> by_region_;
};

std::map<std::string, Continent> parse_continent_table(std::string_view csv_text);
std::map<std::string, std::int64_t> parse_population_table(std::string_view csv_text);

/// The bundled reference tables: aliases, continents and populations.
class Catalog {
public:
    static constexpr std::string_view alias_file = "aliases.csv";
    static constexpr std::string_view continent_file = "continents.csv";
    static constexpr std::string_view population_file = "population.csv";

    Catalog() = default;
    Catalog(AliasTable aliases, std::map<std::string, Continent> continents,
            std::map<std::string, std::int64_t> populations);

    /// Reads the three tables from `dir`; throws ParseError / ValidationError.
    static Catalog load(const std::filesystem::path& dir);

    const AliasTable& aliases() const noexcept { return aliases_; }
    bool knows_country(std::string_view code) const;
    std::optional<Continent> continent(std::string_view code) const;
    std::optional<std::int64_t> population(std::string_view code) const;

    /// Metadata for any region: display name and aliases from the alias table
    /// (canonical name when absent), continent of its country, population for countries.
    RegionMeta meta_for(const RegionId& id) const;

private:
    AliasTable aliases_;
    std::map<std::string, Continent, std::less<>> continents_;
    std::map<std::string, std::int64_t, std::less<>> populations_;
};

std::string read_file(const std::filesystem::path& path);

} // namespace epitrack
