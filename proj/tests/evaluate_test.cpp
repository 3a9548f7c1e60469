#include "pumpdet/evaluate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pumpdet/error.hpp"
#include "pumpdet/report.hpp"
#include "pumpdet/synth.hpp"
#include "test_util.hpp"

namespace pumpdet {
namespace {

using testutil::hour;

DetectedEvent event(const std::string& symbol, long from, long to) {
    DetectedEvent e;
    e.symbol = symbol;
    e.start = hour(from);
    e.end = hour(to);
    e.peak_time = hour(from);
    e.candle_count = static_cast<int>(to - from + 1);
    return e;
}

GroundTruthEvent truth(const std::string& symbol, long h) { return {symbol, hour(h), "test"}; }

TEST(MatchTest, ExactHit) {
    const EventsBySymbol det{{"A", {event("A", 10, 10)}}};
    const std::vector<GroundTruthEvent> t{truth("A", 10)};
    const auto r = match_events(det, t);
    EXPECT_EQ(r.true_positives, 1);
    EXPECT_EQ(r.missed_events, 0);
    EXPECT_EQ(r.false_positive_events, 0);
    ASSERT_TRUE(r.matches[0]);
}

TEST(MatchTest, LateDetectionMissesAndCountsAsFalsePositive) {
    const EventsBySymbol det{{"A", {event("A", 15, 15)}}};
    const std::vector<GroundTruthEvent> t{truth("A", 10)};
    const auto r = match_events(det, t, MatchConfig{1, 2});
    EXPECT_EQ(r.true_positives, 0);
    EXPECT_EQ(r.missed_events, 1);
    EXPECT_EQ(r.false_positive_events, 1);
}

TEST(MatchTest, ToleranceEdgesAndSymbols) {
    const std::vector<GroundTruthEvent> t{truth("A", 10)};
    EXPECT_EQ(match_events({{"A", {event("A", 9, 9)}}}, t).true_positives, 1);
    EXPECT_EQ(match_events({{"A", {event("A", 12, 12)}}}, t).true_positives, 1);
    EXPECT_EQ(match_events({{"A", {event("A", 8, 8)}}}, t).true_positives, 0);
    EXPECT_EQ(match_events({{"A", {event("A", 13, 13)}}}, t).true_positives, 0);
    EXPECT_EQ(match_events({{"A", {event("A", 2, 8)}}}, t).true_positives, 0);
    EXPECT_EQ(match_events({{"A", {event("A", 2, 9)}}}, t).true_positives, 1);
    EXPECT_EQ(match_events({{"B", {event("B", 10, 10)}}}, t).true_positives, 0);
}

TEST(MatchTest, OneDetectionServesOneTruth) {
    const EventsBySymbol det{{"A", {event("A", 10, 11)}}};
    const std::vector<GroundTruthEvent> t{truth("A", 11), truth("A", 10)};
    const auto r = match_events(det, t);
    EXPECT_EQ(r.true_positives, 1);
    EXPECT_EQ(r.missed_events, 1);
    EXPECT_TRUE(r.matches[1]);  // earliest truth wins
    EXPECT_FALSE(r.matches[0]);
}

TEST(MatchTest, FortyTruthTwentySixMatched) {
    std::vector<GroundTruthEvent> t;
    EventsBySymbol det;
    for (int k = 0; k < 40; ++k) {
        const std::string sym = "S" + std::to_string(k % 8);
        t.push_back(truth(sym, 100 * k));
        if (k < 26) det[sym].push_back(event(sym, 100 * k + 1, 100 * k + 1));
    }
    const auto r = match_events(det, t);
    EXPECT_EQ(r.true_positives, 26);
    EXPECT_EQ(r.missed_events, 14);
}

TEST(MatchTest, RandomizedInvariants) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<GroundTruthEvent> t;
        EventsBySymbol det;
        std::int64_t detected = 0;
        for (int k = 0; k < 15; ++k) t.push_back(truth("S" + std::to_string(rng() % 3), static_cast<long>(rng() % 300)));
        for (int k = 0; k < 20; ++k) {
            const std::string sym = "S" + std::to_string(rng() % 3);
            const long from = static_cast<long>(rng() % 300);
            det[sym].push_back(event(sym, from, from + static_cast<long>(rng() % 4)));
            ++detected;
        }
        std::int64_t prev_tp = -1;
        for (int w = 0; w < 6; ++w) {
            const auto r = match_events(det, t, MatchConfig{w, w});
            EXPECT_EQ(r.true_positives + r.missed_events, 15);
            EXPECT_EQ(r.true_positives + r.false_positive_events, detected);
            EXPECT_GE(r.true_positives, prev_tp);
            prev_tp = r.true_positives;
        }
    }
}

TEST(MetricsTest, Examples) {
    const auto one = metrics(1, 0, 0);
    EXPECT_EQ(one.precision, 1.0);
    EXPECT_EQ(one.recall, 1.0);
    EXPECT_EQ(one.f1, 1.0);
    const auto zero = metrics(0, 0, 0);
    EXPECT_EQ(zero.precision, 0.0);
    EXPECT_EQ(zero.recall, 0.0);
    EXPECT_EQ(zero.f1, 0.0);
    // 0.625 sits exactly on the edge of 0.62 +/- 0.005; allow for representation error.
    for (std::int64_t fp : {0, 5, 100}) EXPECT_LE(std::abs(metrics(25, fp, 15).recall - 0.62), 0.005 + 1e-12);
    EXPECT_EQ(metrics(25, 3, 15).recall, 0.625);
}

TEST(MetricsTest, SwapSymmetry) {
    for (std::int64_t tp = 0; tp < 8; ++tp) {
        for (std::int64_t fp = 0; fp < 8; ++fp) {
            for (std::int64_t fn = 0; fn < 8; ++fn) {
                const auto a = metrics(tp, fp, fn);
                const auto b = metrics(tp, fn, fp);
                EXPECT_EQ(a.precision, b.recall);
                EXPECT_EQ(a.recall, b.precision);
                EXPECT_DOUBLE_EQ(a.f1, b.f1);
                EXPECT_GE(a.f1, 0.0);
                EXPECT_LE(a.f1, 1.0);
            }
        }
    }
}

EvalReport report_row(int setting, GateKind kind, std::int64_t vol, std::int64_t price,
                     std::int64_t combined, std::int64_t tp, std::int64_t missed, std::int64_t fp) {
    EvalReport r;
    r.setting_id = setting;
    r.rule_kind = kind;
    r.d_span = 10;
    r.alpha = 2.0;
    r.rule_label = describe(EligibilityRule::defaults(kind));
    r.vol_anomaly_count = vol;
    r.price_anomaly_count = price;
    r.combined_count = combined;
    r.true_positives = tp;
    r.missed_events = missed;
    r.false_positive_events = fp;
    r.detected_events = tp + fp;
    const auto m = metrics(tp, fp, missed);
    r.precision = m.precision;
    r.recall = m.recall;
    r.f1 = m.f1;
    return r;
}

TEST(RenderTest, TableOneSettingFourRow) {
    const std::vector<EvalReport> reports{report_row(4, GateKind::TotalVolume30d, 4408, 2479, 335, 27, 13, 6)};
    EXPECT_EQ(render_report(reports, ReportFormat::Markdown),
              "### Total Volume 30d\n\n"
              "| Thresholds | Vol Ano. | Price Ano. | Combined Ano. | True Pos. | Missed | FP Events | "
              "Precision | Recall | F1 |\n"
              "|---|---|---|---|---|---|---|---|---|---|\n"
              "| Setting 4 | 4408 | 2479 | 335 | 27 | 13 | 6 | 0.8182 | 0.6750 | 0.7397 |\n");
}

TEST(RenderTest, TableThreeSettingFourRow) {
    const std::vector<EvalReport> reports{report_row(4, GateKind::Ewma, 7541, 2479, 415, 29, 11, 0)};
    const auto md = render_report(reports, ReportFormat::Markdown);
    EXPECT_NE(md.find("| Setting 4 | 7541 | 2479 | 415 | 29 | 11 | 0 | 1.0000 | 0.7250 | 0.8406 |\n"),
              std::string::npos);
    EXPECT_NE(md.find("### EWMA (d=10)"), std::string::npos);
}

TEST(RenderTest, ZerosAreRendered) {
    const std::vector<EvalReport> reports{report_row(1, GateKind::AvgDaily, 0, 0, 0, 0, 0, 0)};
    EXPECT_NE(render_report(reports, ReportFormat::Markdown)
                  .find("| Setting 1 | 0 | 0 | 0 | 0 | 0 | 0 | 0.0000 | 0.0000 | 0.0000 |"),
              std::string::npos);
    const auto csv = render_report(reports, ReportFormat::Csv);
    EXPECT_NE(csv.find("\n1,avg_daily,10,2,Average Daily Volume,0,0,0,0,0,0,0,0,0,0,0\n"), std::string::npos);
}

TEST(RenderTest, JsonRoundTripAndStability) {
    std::vector<EvalReport> reports;
    for (int s = 1; s <= 5; ++s) {
        reports.push_back(report_row(s, GateKind::EwmaVolatility, 100 * s, 50 * s, s, s, 40 - s, 2 * s));
    }
    const auto json = render_report(reports, ReportFormat::Json);
    EXPECT_EQ(parse_report_json(json), reports);
    EXPECT_EQ(render_report(reports, ReportFormat::Json), json);
    EXPECT_EQ(render_report(reports, ReportFormat::Markdown), render_report(reports, ReportFormat::Markdown));
}

std::vector<Scenario> small_corpus(int symbols, int pumps) {
    CorpusSpec cs;
    cs.symbols = symbols;
    cs.pumps_per_symbol = pumps;
    cs.base.span_days = 31 + 35 * std::max(pumps, 1);
    cs.base.seed = 40;
    return generate_corpus(cs);
}

TEST(SweepTest, FullGridDeterministic) {
    const auto corpus = small_corpus(6, 1);
    std::vector<SymbolSeries> data;
    std::vector<GroundTruthEvent> t;
    for (const auto& sc : corpus) {
        data.push_back(sc.series);
        t.insert(t.end(), sc.truth.begin(), sc.truth.end());
    }
    const auto settings = ThresholdSetting::all_presets();
    const auto rules = default_rules();
    ASSERT_EQ(rules.size(), 4u);
    SweepOptions opts;
    const auto a = sweep(data, settings, rules, t, opts);
    opts.jobs = 4;
    const auto b = sweep(data, settings, rules, t, opts);
    ASSERT_EQ(a.size(), 20u);
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].setting_id, static_cast<int>(i / 4) + 1);
        EXPECT_EQ(a[i].true_positives + a[i].missed_events, 6);
        EXPECT_LE(a[i].combined_count, a[i].vol_anomaly_count);
        EXPECT_LE(a[i].vol_anomaly_count, a[i].raw_vol_anomaly_count);
        EXPECT_LE(a[i].detected_events, a[i].combined_count);
    }
    // Setting 4 with the EWMA gate catches every constructed pump.
    const auto& s4 = a[3 * 4 + 2];
    EXPECT_EQ(s4.setting_id, 4);
    EXPECT_EQ(s4.rule_kind, GateKind::Ewma);
    EXPECT_EQ(s4.true_positives, 6);
    EXPECT_EQ(s4.false_positive_events, 0);
}

TEST(SweepTest, TruthOutsideDatasetIsIgnored) {
    const auto corpus = small_corpus(2, 1);
    std::vector<SymbolSeries> data{corpus[0].series, corpus[1].series};
    std::vector<GroundTruthEvent> t = corpus[0].truth;
    t.push_back({"ELSEWHERE_USDT", t[0].announce_time, "x"});
    t.push_back({corpus[1].series.symbol, corpus[1].series.candles.back().timestamp + std::chrono::hours(500), "x"});
    EXPECT_EQ(truth_within(data, t).size(), 1u);
    const auto r = sweep(data, std::vector{ThresholdSetting::preset(4)}, std::vector{EligibilityRule::ewma()}, t);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].true_positives + r[0].missed_events, 1);
}

TEST(SweepTest, EmptyDatasetThrows) {
    try {
        sweep({}, ThresholdSetting::all_presets(), default_rules(), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
    }
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

}  // namespace
}  // namespace pumpdet
