#include "pumpdet/detect.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "pumpdet/error.hpp"
#include "test_util.hpp"

namespace pumpdet {
namespace {

using testutil::flat;
using testutil::hour;

RollingContext eligible_ctx() {
    RollingContext c;
    c.sma_open = 1.0;
    c.sma_volume = 10.0;
    c.v_tot = 100.0;
    c.v_max = 10.0;
    c.v_avg_daily = 10.0;
    c.ewma_daily = 10.0;
    c.complete_days = 5;
    c.history_hours = 500;
    return c;
}

Candle pump_candle(double high, double volume) {
    return Candle{hour(0), 1.0, high, 1.0, 1.0, volume, false};
}

const std::vector<GateKind> kAllKinds{GateKind::TotalVolume30d, GateKind::AvgDaily, GateKind::Ewma,
                                      GateKind::EwmaVolatility};

TEST(FlagCandleTest, SettingFourBoundary) {
    const auto s4 = ThresholdSetting::preset(4);
    const auto rule = EligibilityRule::ewma();
    const auto f = flag_candle(pump_candle(1.91, 51), eligible_ctx(), s4, rule);
    EXPECT_TRUE(f.eligible);
    EXPECT_TRUE(f.price_anomaly);
    EXPECT_TRUE(f.volume_anomaly);
    EXPECT_TRUE(f.combined);
    ASSERT_TRUE(f.price_ratio);
    EXPECT_DOUBLE_EQ(*f.price_ratio, 1.91);
    EXPECT_DOUBLE_EQ(*f.volume_ratio, 5.1);

    const auto at_price = flag_candle(pump_candle(1.90, 51), eligible_ctx(), s4, rule);
    EXPECT_FALSE(at_price.price_anomaly);
    EXPECT_FALSE(at_price.combined);
    const auto at_volume = flag_candle(pump_candle(1.91, 50), eligible_ctx(), s4, rule);
    EXPECT_FALSE(at_volume.volume_anomaly);
    EXPECT_FALSE(at_volume.combined);
}

TEST(FlagCandleTest, OpenFieldIgnoresHigh) {
    const auto s1 = ThresholdSetting::preset(1);
    const auto f = flag_candle(pump_candle(5.0, 51), eligible_ctx(), s1, EligibilityRule::ewma());
    EXPECT_FALSE(f.price_anomaly);
}

TEST(FlagCandleTest, DormantBlip) {
    SymbolSeries s{"D", kHour, {}};
    for (int h = 0; h < 12; ++h) s.candles.push_back(flat(h, 1.0, 0.0));
    s.candles.push_back(flat(12, 1.0, 1.0));
    for (int id = 1; id <= 5; ++id) {
        for (auto kind : kAllKinds) {
            const auto flags = detect_series(s, ThresholdSetting::preset(id), EligibilityRule::defaults(kind));
            const auto& f = flags.back();
            EXPECT_TRUE(f.volume_anomaly);
            EXPECT_FALSE(f.price_anomaly);
            EXPECT_FALSE(f.combined);
            EXPECT_FALSE(f.volume_ratio.has_value());
        }
    }
}

TEST(FlagCandleTest, WarmUpSuppressesEverything) {
    RollingContext c = eligible_ctx();
    c.history_hours = 11;
    const auto f = flag_candle(pump_candle(10, 1000), c, ThresholdSetting::preset(4), EligibilityRule::ewma());
    EXPECT_FALSE(f.eligible || f.volume_anomaly || f.price_anomaly || f.combined);
    c.history_hours = 12;
    EXPECT_TRUE(flag_candle(pump_candle(10, 1000), c, ThresholdSetting::preset(4), EligibilityRule::ewma()).combined);
}

TEST(FlagCandleTest, MissingContextIsIneligible) {
    RollingContext c = eligible_ctx();
    c.complete_days = 0;
    const auto f = flag_candle(pump_candle(10, 1000), c, ThresholdSetting::preset(4), EligibilityRule::ewma());
    EXPECT_FALSE(f.eligible);
    EXPECT_TRUE(f.price_anomaly);
    EXPECT_FALSE(f.combined);
}

TEST(PresetTest, PublishedGrid) {
    const double price[] = {0.90, 0.70, 1.00, 0.90, 0.80};
    const double volume[] = {4.00, 3.00, 4.00, 4.00, 3.00};
    const PriceField field[] = {PriceField::Open, PriceField::Open, PriceField::High, PriceField::High,
                                PriceField::High};
    const auto all = ThresholdSetting::all_presets();
    ASSERT_EQ(all.size(), 5u);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(all[i].id, i + 1);
        EXPECT_EQ(all[i].price_increase, price[i]);
        EXPECT_EQ(all[i].volume_increase, volume[i]);
        EXPECT_EQ(all[i].price_field, field[i]);
        EXPECT_EQ(all[i].lag_hours, 12);
    }
    EXPECT_THROW(ThresholdSetting::preset(6), Error);
}

TEST(DetectSeriesTest, ConstantSeriesHasNoAnomalies) {
    SymbolSeries s{"C", kHour, {}};
    for (int h = 0; h < 24 * 40; ++h) s.candles.push_back(flat(h, 2.5, 30.0));
    for (const auto& st : ThresholdSetting::all_presets()) {
        for (auto kind : kAllKinds) {
            for (const auto& f : detect_series(s, st, EligibilityRule::defaults(kind))) {
                EXPECT_FALSE(f.volume_anomaly || f.price_anomaly || f.combined);
            }
        }
    }
}

TEST(DetectSeriesTest, MatchesNaiveFlags) {
    for (std::uint64_t seed : {101u, 102u}) {
        const auto s = oracle::random_series(seed, 10000);
        for (const auto& st : {ThresholdSetting::preset(2), ThresholdSetting::preset(4)}) {
            for (auto kind : kAllKinds) {
                const auto rule = EligibilityRule::defaults(kind, 10, 2.0);
                RollingParams p;
                p.lag_hours = st.lag_hours;
                p.ewma_span_days = rule.d_span;
                const auto flags = detect_series(s, st, rule);
                ASSERT_EQ(flags.size(), s.candles.size());
                std::size_t combined = 0;
                for (std::size_t i = 0; i < flags.size(); i += (kind == GateKind::Ewma ? 1 : 7)) {
                    const auto want = oracle::naive_flag(s.candles[i], oracle::naive_context(s, i, p), st, rule);
                    ASSERT_EQ(flags[i].eligible, want.eligible) << i;
                    ASSERT_EQ(flags[i].volume_anomaly, want.volume_anomaly) << i;
                    ASSERT_EQ(flags[i].price_anomaly, want.price_anomaly) << i;
                    ASSERT_EQ(flags[i].combined, want.combined) << i;
                    combined += flags[i].combined;
                }
                for (const auto& f : flags) {
                    EXPECT_EQ(f.combined, f.eligible && f.volume_anomaly && f.price_anomaly);
                }
                (void)combined;
            }
        }
    }
}

std::vector<AnomalyFlag> run(const SymbolSeries& s, ThresholdSetting st, GateKind kind) {
    return detect_series(s, st, EligibilityRule::defaults(kind));
}

TEST(DetectSeriesTest, ThresholdMonotonicity) {
    const auto s = oracle::random_series(7, 4000);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> step(0.01, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        ThresholdSetting lo = ThresholdSetting::preset(1 + static_cast<int>(rng() % 5));
        lo.price_increase = step(rng);
        lo.volume_increase = step(rng);
        ThresholdSetting hi = lo;
        hi.price_increase += step(rng);
        hi.volume_increase += step(rng);
        const auto a = run(s, lo, GateKind::Ewma);
        const auto b = run(s, hi, GateKind::Ewma);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (b[i].price_anomaly) EXPECT_TRUE(a[i].price_anomaly);
            if (b[i].volume_anomaly) EXPECT_TRUE(a[i].volume_anomaly);
            if (b[i].combined) EXPECT_TRUE(a[i].combined);
        }
    }
}

TEST(DetectSeriesTest, SettingDominance) {
    for (std::uint64_t seed = 30; seed < 33; ++seed) {
        const auto s = oracle::random_series(seed, 3000);
        const auto f3 = run(s, ThresholdSetting::preset(3), GateKind::AvgDaily);
        const auto f4 = run(s, ThresholdSetting::preset(4), GateKind::AvgDaily);
        const auto f5 = run(s, ThresholdSetting::preset(5), GateKind::AvgDaily);
        for (std::size_t i = 0; i < f3.size(); ++i) {
            if (f3[i].price_anomaly) EXPECT_TRUE(f4[i].price_anomaly);
            if (f4[i].price_anomaly) EXPECT_TRUE(f5[i].price_anomaly);
        }
    }
}

TEST(DetectSeriesTest, ScaleInvariance) {
    const auto base = oracle::random_series(44, 3000);
    for (double c : {0.5, 16.0}) {
        auto vs = base;
        auto ps = base;
        for (auto& k : vs.candles) k.volume *= c;
        for (auto& k : ps.candles) {
            k.open *= c;
            k.high *= c;
            k.low *= c;
            k.close *= c;
        }
        for (auto kind : kAllKinds) {
            const auto st = ThresholdSetting::preset(5);
            const auto a = run(base, st, kind);
            const auto v = run(vs, st, kind);
            const auto p = run(ps, st, kind);
            for (std::size_t i = 0; i < a.size(); ++i) {
                EXPECT_EQ(v[i].volume_anomaly, a[i].volume_anomaly);
                EXPECT_EQ(v[i].eligible, a[i].eligible);
                EXPECT_EQ(v[i].combined, a[i].combined);
                EXPECT_EQ(p[i].price_anomaly, a[i].price_anomaly);
            }
        }
    }
}

std::vector<AnomalyFlag> combined_at(std::initializer_list<int> hours) {
    std::vector<AnomalyFlag> flags;
    for (int h = 0; h < 30; ++h) {
        AnomalyFlag f;
        f.timestamp = hour(h);
        f.volume = h;
        for (int x : hours) f.combined = f.combined || x == h;
        flags.push_back(f);
    }
    return flags;
}

TEST(ClusterTest, SingleCandle) {
    const auto ev = cluster_events(combined_at({5}), "X", 3);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].start, hour(5));
    EXPECT_EQ(ev[0].end, hour(5));
    EXPECT_EQ(ev[0].candle_count, 1);
    EXPECT_EQ(ev[0].symbol, "X");
}

TEST(ClusterTest, RunMerges) {
    const auto ev = cluster_events(combined_at({5, 6, 7}), "X", 3);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].start, hour(5));
    EXPECT_EQ(ev[0].end, hour(7));
    EXPECT_EQ(ev[0].peak_time, hour(7));
    EXPECT_EQ(ev[0].peak_volume, 7.0);
}

TEST(ClusterTest, GapSplits) {
    EXPECT_EQ(cluster_events(combined_at({5, 20}), "X", 3).size(), 2u);
    EXPECT_EQ(cluster_events(combined_at({5, 8}), "X", 3).size(), 1u);
    EXPECT_EQ(cluster_events(combined_at({5, 9}), "X", 3).size(), 2u);
}

TEST(ClusterTest, EventsNeverExceedCombined) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<AnomalyFlag> flags;
        int combined = 0;
        for (int h = 0; h < 200; ++h) {
            AnomalyFlag f;
            f.timestamp = hour(h);
            f.combined = rng() % 10 == 0;
            combined += f.combined;
            flags.push_back(f);
        }
        const int gap = static_cast<int>(rng() % 6);
        const auto ev = cluster_events(flags, "X", gap);
        EXPECT_LE(static_cast<int>(ev.size()), combined);
        int covered = 0;
        for (const auto& e : ev) {
            EXPECT_LE(e.start, e.end);
            covered += e.candle_count;
        }
        EXPECT_EQ(covered, combined);
        EventClusterer inc("X", gap);
        for (const auto& f : flags) inc.add(f);
        EXPECT_EQ(inc.finish().size(), ev.size());
    }
}

}  // namespace
}  // namespace pumpdet
