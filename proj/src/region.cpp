#include "epitrack/region.hpp"

#include "epitrack/error.hpp"

#include <array>

namespace epitrack {

namespace {

bool valid_country(std::string_view c) {
    return c.size() == 2 && c[0] >= 'A' && c[0] <= 'Z' && c[1] >= 'A' && c[1] <= 'Z';
}

void check_name(const std::optional<std::string>& name, const char* what) {
    if (name && (name->empty() || name->find('/') != std::string::npos || name->find(',') != std::string::npos))
        throw InvalidArgument(std::string(what) + " name '" + *name + "' must be non-empty without '/' or ','");
}

constexpr std::array<std::pair<Continent, std::string_view>, 7> continent_names{{
    {Continent::Africa, "Africa"},
    {Continent::Asia, "Asia"},
    {Continent::Europe, "Europe"},
    {Continent::NorthAmerica, "NorthAmerica"},
    {Continent::SouthAmerica, "SouthAmerica"},
    {Continent::Oceania, "Oceania"},
    {Continent::Other, "Other"},
}};

} // namespace

RegionId RegionId::make(std::string country, std::optional<std::string> province, std::optional<std::string> city) {
    if (!valid_country(country)) throw InvalidArgument("country code '" + country + "' must be two uppercase letters");
    if (city && !province) throw InvalidArgument("city '" + *city + "' given without a province");
    check_name(province, "province");
    check_name(city, "city");
    return RegionId{std::move(country), std::move(province), std::move(city)};
}

RegionId RegionId::parse_path(std::string_view path) {
    std::array<std::optional<std::string>, 3> parts;
    std::size_t n = 0;
    while (true) {
        const auto slash = path.find('/');
        if (n == parts.size()) throw InvalidArgument("region path has too many components");
        parts[n++] = std::string(path.substr(0, slash));
        if (slash == std::string_view::npos) break;
        path.remove_prefix(slash + 1);
    }
    return make(*parts[0], parts[1], parts[2]);
}

std::string RegionId::path() const {
    std::string out = country;
    if (province) out += "/" + *province;
    if (city) out += "/" + *city;
    return out;
}

std::optional<RegionId> RegionId::parent() const {
    if (city) return RegionId{country, province, std::nullopt};
    if (province) return RegionId{country, std::nullopt, std::nullopt};
    return std::nullopt;
}

bool RegionId::is_child_of(const RegionId& other) const {
    const auto p = parent();
    return p && *p == other;
}

std::string_view to_string(Continent c) noexcept {
    for (const auto& [value, name] : continent_names)
        if (value == c) return name;
    return "Other";
}

std::optional<Continent> parse_continent(std::string_view text) noexcept {
    for (const auto& [value, name] : continent_names)
        if (name == text) return value;
    return std::nullopt;
}

} // namespace epitrack
