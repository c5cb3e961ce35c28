#include "epitrack/series.hpp"

#include "epitrack/error.hpp"

#include <algorithm>

namespace epitrack {

std::string_view to_string(Field f) noexcept {
    switch (f) {
    case Field::confirmed: return "confirmed";
    case Field::cured: return "cured";
    case Field::deaths: return "deaths";
    }
    return "confirmed";
}

std::optional<Date> CumulativeSeries::first_date() const {
    if (repaired.empty()) return std::nullopt;
    return repaired.front().date;
}

std::optional<Date> CumulativeSeries::last_date() const {
    if (repaired.empty()) return std::nullopt;
    return repaired.back().date;
}

const DailyRecord* CumulativeSeries::at_or_before(Date date) const {
    auto it = std::upper_bound(repaired.begin(), repaired.end(), date,
                               [](Date d, const DailyRecord& r) { return d < r.date; });
    if (it == repaired.begin()) return nullptr;
    return &*std::prev(it);
}

const DailyRecord* CumulativeSeries::on(Date date) const {
    const DailyRecord* r = at_or_before(date);
    return r && r->date == date ? r : nullptr;
}

RepairResult repair_monotonic(std::span<const DailyRecord> records) {
    RepairResult out;
    out.repaired.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const DailyRecord& rec = records[i];
        if (i > 0 && !(records[i - 1].date < rec.date))
            throw InvalidArgument("records not strictly increasing at " + rec.date.to_string());
        DailyRecord fixed = rec;
        for (const Field f : all_fields) {
            if (rec[f] < 0) throw InvalidArgument("negative " + std::string(to_string(f)) + " on " + rec.date.to_string());
            if (i > 0) fixed[f] = std::max(fixed[f], out.repaired.back()[f]);
            if (fixed[f] != rec[f]) out.anomalies.push_back({rec.date, f, rec[f], fixed[f]});
        }
        out.repaired.push_back(fixed);
    }
    return out;
}

CumulativeSeries make_series(RegionId region, std::vector<DailyRecord> raw, std::vector<Timestamp> observed) {
    if (observed.empty()) {
        observed.reserve(raw.size());
        for (const auto& r : raw) observed.push_back(start_of(r.date));
    }
    if (observed.size() != raw.size()) throw InvalidArgument("observed timestamps do not match records");
    RepairResult fixed = repair_monotonic(raw);
    return CumulativeSeries{std::move(region), std::move(raw), std::move(fixed.repaired), std::move(fixed.anomalies),
                            std::move(observed)};
}

} // namespace epitrack
