#include "epitrack/error.hpp"
#include "epitrack/metrics.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace epitrack;
using epitrack::testing::catalog;
using epitrack::testing::day;
using epitrack::testing::world_version;

namespace {

CumulativeSeries series_of(const char* path, std::vector<DailyRecord> raw) {
    return make_series(RegionId::parse_path(path), std::move(raw));
}

VersionPtr publish(std::vector<CumulativeSeries> all) {
    VersionBuilder b;
    for (auto& s : all) b.put_series(std::move(s));
    b.close_hierarchy(catalog());
    Store store;
    return store.publish(std::move(b));
}

} // namespace

TEST(DeriveSeries, DailyDifferences) {
    const auto s = series_of("IT", {{day("2020-04-01"), 2, 0, 0}, {day("2020-04-02"), 5, 0, 0},
                                    {day("2020-04-03"), 5, 0, 0}, {day("2020-04-04"), 9, 0, 0}});
    const auto pts = derive_series(s, std::nullopt);
    std::vector<Count> daily;
    for (const auto& p : pts) daily.push_back(p.daily_confirmed);
    EXPECT_EQ(daily, (std::vector<Count>{2, 3, 0, 4}));
}

TEST(DeriveSeries, GapDeltaLandsOnNextReportedDay) {
    const auto s = series_of("IT", {{day("2020-04-01"), 2, 0, 0}, {day("2020-04-05"), 10, 0, 0}});
    const auto pts = derive_series(s, std::nullopt);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[1].date, day("2020-04-05"));
    EXPECT_EQ(pts[1].daily_confirmed, 8);
}

TEST(DeriveSeries, Rates) {
    const auto s = series_of("IT", {{day("2020-04-01"), 100, 20, 7}});
    const auto p = derive_series(s, std::nullopt).at(0);
    EXPECT_EQ(p.mortality_rate, 7.0 / 100.0);
    EXPECT_DOUBLE_EQ(*p.mortality_rate, 0.07);
    EXPECT_EQ(p.cure_rate, 20.0 / 100.0);
    EXPECT_EQ(p.active, 73);
    EXPECT_FALSE(p.active_clamped);
    EXPECT_FALSE(p.per_million);
}

TEST(DeriveSeries, ZeroConfirmedHasNoRates) {
    const auto p = derive_series(series_of("IT", {{day("2020-04-01"), 0, 0, 0}}), 60'000'000).at(0);
    EXPECT_FALSE(p.mortality_rate);
    EXPECT_FALSE(p.cure_rate);
    EXPECT_EQ(p.per_million, 0.0);
}

TEST(DeriveSeries, PerMillion) {
    const auto p = derive_series(series_of("IT", {{day("2020-04-01"), 600, 0, 0}}), 60'000'000).at(0);
    EXPECT_EQ(p.per_million, 10.0);
}

TEST(DeriveSeries, ActiveClampedWhenNegative) {
    const auto p = derive_series(series_of("IT", {{day("2020-04-01"), 10, 8, 5}}), std::nullopt).at(0);
    EXPECT_EQ(p.active, 0);
    EXPECT_TRUE(p.active_clamped);
    EXPECT_EQ(p.cure_rate, 0.8);
}

TEST(DeriveSeries, RejectsDecreasingInput) {
    CumulativeSeries s = series_of("IT", {{day("2020-04-01"), 5, 0, 0}, {day("2020-04-02"), 6, 0, 0}});
    s.repaired[1].confirmed = 4;
    EXPECT_THROW(derive_series(s, std::nullopt), InvalidArgument);
}

TEST(DeriveSeries, RoundTripAndRateQuotientsOverFixture) {
    const auto v = world_version();
    for (const auto& [id, meta] : v->registry) {
        const CumulativeSeries eff = effective_series(*v, id);
        const auto pts = derive_series(eff, meta);
        ASSERT_EQ(pts.size(), eff.repaired.size());
        Count c = 0, r = 0, d = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            c += pts[i].daily_confirmed;
            r += pts[i].daily_cured;
            d += pts[i].daily_deaths;
            ASSERT_EQ(c, eff.repaired[i].confirmed) << id.path();
            ASSERT_EQ(r, eff.repaired[i].cured) << id.path();
            ASSERT_EQ(d, eff.repaired[i].deaths) << id.path();
            if (pts[i].mortality_rate) {
                EXPECT_EQ(*pts[i].mortality_rate, double(pts[i].deaths) / double(pts[i].confirmed));
                if (pts[i].deaths <= pts[i].confirmed) EXPECT_LE(*pts[i].mortality_rate, 1.0);
            }
            if (pts[i].cure_rate) EXPECT_EQ(*pts[i].cure_rate, double(pts[i].cured) / double(pts[i].confirmed));
        }
    }
}

TEST(Bucket, Examples) {
    EXPECT_EQ(choropleth_bucket(0), 0);
    EXPECT_EQ(choropleth_bucket(1), 1);
    EXPECT_EQ(choropleth_bucket(9), 1);
    EXPECT_EQ(choropleth_bucket(10), 2);
    EXPECT_EQ(choropleth_bucket(99), 2);
    EXPECT_EQ(choropleth_bucket(999'999), 6);
    EXPECT_EQ(choropleth_bucket(1'000'000), 7);
    EXPECT_EQ(choropleth_bucket(2'000'000), 7);
}

TEST(Bucket, MatchesDigitCountOracleAndIsMonotone) {
    const auto oracle = [](Count c) {
        if (c == 0) return 0;
        const int digits = static_cast<int>(std::to_string(c).size());
        return std::min(digits, 7);
    };
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Count> dist(0, 50'000'000);
    for (int i = 0; i < 20000; ++i) {
        Count a = dist(rng) >> std::uniform_int_distribution<int>(0, 25)(rng);
        Count b = dist(rng) >> std::uniform_int_distribution<int>(0, 25)(rng);
        ASSERT_EQ(choropleth_bucket(a), oracle(a)) << a;
        if (a > b) std::swap(a, b);
        ASSERT_LE(choropleth_bucket(a), choropleth_bucket(b));
    }
}

TEST(WorldSummary, EmptyStoreIsZero) {
    Store store;
    EXPECT_EQ(world_summary(*store.current(), day("2020-04-10")), WorldSummary{});
}

TEST(WorldSummary, FixtureHeadlineFigures) {
    const auto s = world_summary(*world_version(), day("2020-04-10"));
    EXPECT_GE(s.countries_affected, 185u);
    EXPECT_GE(s.total_confirmed, 1'000'000);
    EXPECT_GE(s.total_deaths, 10'000);
}

TEST(WorldSummary, BeforeAllDataIsZero) {
    EXPECT_EQ(world_summary(*world_version(), day("2019-12-01")), WorldSummary{});
}

TEST(WorldSummary, CarriesForwardAndExcludesQuarantine) {
    const auto v = publish({series_of("IT", {{day("2020-04-01"), 10, 2, 1}}),
                            series_of("ES", {{day("2020-04-02"), 5, 0, 0}}),
                            series_of("XX", {{day("2020-04-02"), 1000, 0, 0}})});
    const auto s = world_summary(*v, day("2020-04-02"));
    EXPECT_EQ(s.countries_affected, 2u);
    EXPECT_EQ(s.total_confirmed, 15);
    EXPECT_EQ(s.total_cured, 2);
    EXPECT_EQ(s.total_deaths, 1);
    EXPECT_EQ(s.total_active, 12);
    EXPECT_EQ(world_summary(*v, day("2020-04-01")).countries_affected, 1u);
}

TEST(MapSnapshot, EntriesMatchCarryForwardValues) {
    const auto v = world_version();
    const auto snap = map_snapshot(*v, day("2020-04-05"));
    EXPECT_TRUE(std::is_sorted(snap.entries.begin(), snap.entries.end(),
                               [](const MapEntry& a, const MapEntry& b) { return a.country < b.country; }));
    for (const auto& e : snap.entries) {
        EXPECT_FALSE(e.country.is_quarantine());
        EXPECT_EQ(e.confirmed, value_at(*v, e.country, day("2020-04-05")).confirmed);
        EXPECT_EQ(e.bucket, choropleth_bucket(e.confirmed));
        EXPECT_EQ(e.bucket == 0, e.confirmed == 0);
    }
    EXPECT_EQ(snap.totals, world_summary(*v, day("2020-04-05")));
}

TEST(Metric, NamesRoundTrip) {
    for (const char* name : {"total_confirmed", "active", "deaths", "cured", "daily_confirmed", "daily_deaths",
                             "daily_cured", "mortality_rate", "cure_rate", "per_million"})
        EXPECT_EQ(to_string(parse_metric(name)), name);
    EXPECT_THROW(parse_metric("bogus"), InvalidArgument);
}

TEST(Compare, SingleCellEqualsCarryForwardValue) {
    const auto v = world_version();
    const RegionId it = RegionId::parse_path("IT");
    const auto t = compare(*v, std::span(&it, 1), Metric::total_confirmed, day("2020-04-07"), day("2020-04-07"));
    ASSERT_EQ(t.dates.size(), 1u);
    ASSERT_EQ(t.values.size(), 1u);
    EXPECT_EQ(t.values[0][0], double(value_at(*v, it, day("2020-04-07")).confirmed));
}

TEST(Compare, PerMillionMatchesDeriveSeries) {
    const auto v = world_version();
    const std::vector<RegionId> ids{RegionId::parse_path("IT"), RegionId::parse_path("ES")};
    const auto t = compare(*v, ids, Metric::per_million);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const auto pts = derive_series(get_series(ids[r], *v), *v->meta(ids[r]));
        for (std::size_t d = 0; d < t.dates.size(); ++d) {
            const auto it = std::find_if(pts.begin(), pts.end(), [&](const DerivedPoint& p) { return p.date == t.dates[d]; });
            if (it != pts.end()) EXPECT_EQ(t.values[r][d], it->per_million);
        }
    }
}

TEST(Compare, MortalityIsPointwiseQuotient) {
    const auto v = world_version();
    const std::vector<RegionId> ids{RegionId::parse_path("IT"), RegionId::parse_path("ES"), RegionId::parse_path("US")};
    const auto t = compare(*v, ids, Metric::mortality_rate);
    EXPECT_EQ(t.regions, ids);
    for (std::size_t r = 0; r < ids.size(); ++r)
        for (std::size_t d = 0; d < t.dates.size(); ++d) {
            const auto* rec = get_series(ids[r], *v).on(t.dates[d]);
            if (!rec) {
                EXPECT_FALSE(t.values[r][d]);
                continue;
            }
            if (rec->confirmed == 0) EXPECT_FALSE(t.values[r][d]);
            else EXPECT_EQ(t.values[r][d], double(rec->deaths) / double(rec->confirmed));
        }
}

TEST(Compare, DailyMetricsAbsentOnGapDaysCumulativeCarry) {
    const auto v = publish({series_of("IT", {{day("2020-04-01"), 1, 0, 0}, {day("2020-04-03"), 4, 0, 0}}),
                            series_of("ES", {{day("2020-04-02"), 2, 0, 0}})});
    const std::vector<RegionId> ids{RegionId::parse_path("ES"), RegionId::parse_path("IT")};
    const auto daily = compare(*v, ids, Metric::daily_confirmed);
    ASSERT_EQ(daily.dates.size(), 3u);
    EXPECT_EQ(daily.values[1][1], std::nullopt);
    EXPECT_EQ(daily.values[1][2], 3.0);
    const auto total = compare(*v, ids, Metric::total_confirmed);
    EXPECT_EQ(total.values[1][1], 1.0);
    EXPECT_EQ(total.values[0][0], std::nullopt);
    EXPECT_EQ(total.values[0][2], 2.0);
}

TEST(Compare, Errors) {
    const auto v = world_version();
    const RegionId it = RegionId::parse_path("IT");
    EXPECT_THROW(compare(*v, {}, Metric::active), InvalidArgument);
    EXPECT_THROW(compare(*v, std::span(&it, 1), Metric::active, day("2020-04-05"), day("2020-04-04")), InvalidArgument);
    std::vector<RegionId> eleven(11, it);
    EXPECT_THROW(compare(*v, eleven, Metric::active), InvalidArgument);
    const RegionId nowhere = RegionId::parse_path("AQ");
    EXPECT_THROW(compare(*v, std::span(&nowhere, 1), Metric::active), NotFound);
}

TEST(TopK, OrdersDescendingWithTies) {
    const auto v = publish({series_of("IT", {{day("2020-04-01"), 5, 0, 0}}), series_of("ES", {{day("2020-04-01"), 5, 0, 0}}),
                            series_of("FR", {{day("2020-04-01"), 9, 0, 0}})});
    const auto top = top_k(*v, Metric::total_confirmed, day("2020-04-01"), 10);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].first.country, "FR");
    EXPECT_EQ(top[1].first.country, "ES");
    EXPECT_EQ(top[2].first.country, "IT");
    EXPECT_EQ(top_k(*v, Metric::total_confirmed, day("2020-04-01"), 1).size(), 1u);
}

TEST(TopK, SingleCountry) {
    const auto v = publish({series_of("IT", {{day("2020-04-01"), 5, 0, 0}})});
    const auto top = top_k(*v, Metric::total_confirmed, day("2020-04-01"), 1);
    ASSERT_EQ(top.size(), 1u);
    EXPECT_EQ(top[0].first.country, "IT");
}

TEST(ContinentGroups, FixtureGroups) {
    const auto groups = continent_groups(*world_version());
    const auto has = [&](Continent c, const char* code) {
        const auto it = groups.find(c);
        return it != groups.end() && std::count(it->second.begin(), it->second.end(), RegionId::parse_path(code)) == 1;
    };
    EXPECT_TRUE(has(Continent::Europe, "IT"));
    EXPECT_TRUE(has(Continent::Asia, "CN"));
    std::size_t total = 0;
    for (const auto& [c, list] : groups)
        for (const auto& id : list) {
            EXPECT_FALSE(id.is_quarantine());
            ++total;
        }
    EXPECT_EQ(total, world_version()->countries().size());
}

TEST(Hierarchy, ChinaContainsHubeiFirst) {
    const auto node = hierarchy(*world_version(), RegionId::parse_path("CN"));
    ASSERT_FALSE(node.children.empty());
    EXPECT_EQ(node.children.front().id, RegionId::parse_path("CN/Hubei"));
    for (std::size_t i = 1; i < node.children.size(); ++i)
        EXPECT_GE(node.children[i - 1].confirmed, node.children[i].confirmed);
    const auto& hubei = node.children.front();
    EXPECT_EQ(hubei.confirmed, 67803);
    EXPECT_FALSE(hubei.children.empty());
}

TEST(Hierarchy, CountryWithoutProvinces) {
    const auto node = hierarchy(*world_version(), RegionId::parse_path("IT"));
    EXPECT_TRUE(node.children.empty());
    EXPECT_GT(node.confirmed, 0);
    EXPECT_THROW(hierarchy(*world_version(), RegionId::parse_path("AQ")), NotFound);
}
