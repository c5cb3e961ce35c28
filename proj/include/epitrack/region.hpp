#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace epitrack {

/// Country code of the quarantine bucket for rows whose country could not be resolved.
inline constexpr std::string_view quarantine_country = "XX";

/// Hierarchical region key: country (ISO-3166-1 alpha-2 or a synthetic
/// two-letter code) -> province -> city.
struct RegionId {
    std::string country;
    std::optional<std::string> province;
    std::optional<std::string> city;

    /// Validates the invariants; throws InvalidArgument.
    static RegionId make(std::string country, std::optional<std::string> province = std::nullopt,
                         std::optional<std::string> city = std::nullopt);
    /// Inverse of path(): "CN", "CN/Hubei", "CN/Hubei/Wuhan".
    static RegionId parse_path(std::string_view path);

    std::string path() const;
    int depth() const noexcept { return city ? 2 : province ? 1 : 0; }
    bool is_country() const noexcept { return !province; }
    bool is_quarantine() const noexcept { return country == quarantine_country; }
    /// Empty for countries.
    std::optional<RegionId> parent() const;
    bool is_child_of(const RegionId& other) const;

    friend auto operator<=>(const RegionId&, const RegionId&) = default;
    friend bool operator==(const RegionId&, const RegionId&) = default;
};

enum class Continent { Africa, Asia, Europe, NorthAmerica, SouthAmerica, Oceania, Other };

std::string_view to_string(Continent c) noexcept;
std::optional<Continent> parse_continent(std::string_view text) noexcept;

struct RegionMeta {
    RegionId id;
    std::string display_name;
    Continent continent = Continent::Other;
    std::optional<std::int64_t> population;
    std::set<std::string> aliases;
};

} // namespace epitrack

template <>
struct std::hash<epitrack::RegionId> {
    std::size_t operator()(const epitrack::RegionId& id) const noexcept {
        return std::hash<std::string>{}(id.path());
    }
};
