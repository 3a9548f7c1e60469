#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pumpdet/detect.hpp"
#include "pumpdet/ingestion.hpp"

namespace pumpdet {

/// A truth event is hit by any detected event on its symbol that overlaps
/// [announce - pre, announce + post].
struct MatchConfig {
    int pre_tolerance_hours = 1;
    int post_tolerance_hours = 2;

    void validate() const;
};

using EventsBySymbol = std::map<std::string, std::vector<DetectedEvent>>;

struct MatchResult {
    std::int64_t true_positives = 0;
    std::int64_t missed_events = 0;
    std::int64_t false_positive_events = 0;
    /// Per truth event (input order): the matched detection, if any.
    std::vector<std::optional<DetectedEvent>> matches;
};

/// Greedy: truth events in announce order, each taking the earliest unmatched
/// overlapping detection on the same symbol.
MatchResult match_events(const EventsBySymbol& detected, std::span<const GroundTruthEvent> truth,
                         const MatchConfig& cfg = {});

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// 0/0 is taken as 0 everywhere.
Metrics metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn);

struct EvalReport {
    int setting_id = 0;
    GateKind rule_kind = GateKind::Ewma;
    int d_span = 0;
    double alpha = 0.0;
    std::string rule_label;
    std::int64_t vol_anomaly_count = 0;      // eligible and above the volume threshold
    std::int64_t raw_vol_anomaly_count = 0;  // above the volume threshold, ungated
    std::int64_t price_anomaly_count = 0;
    std::int64_t combined_count = 0;
    std::int64_t detected_events = 0;
    std::int64_t true_positives = 0;
    std::int64_t missed_events = 0;
    std::int64_t false_positive_events = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct SweepOptions {
    int window_days = 30;
    int cluster_gap_hours = 3;
    MatchConfig match;
    unsigned jobs = 1;
};

/// Truth events whose symbol is in the dataset and whose announce time falls
/// inside that symbol's candle span.
std::vector<GroundTruthEvent> truth_within(std::span<const SymbolSeries> dataset,
                                           std::span<const GroundTruthEvent> truth);

/// One report per (setting, rule), ordered by setting id then rule
/// (kind, d_span, alpha). Contexts are built once per (symbol, lag, d_span)
/// and shared by every configuration needing them. Throws EmptyDataset.
std::vector<EvalReport> sweep(std::span<const SymbolSeries> dataset,
                              std::span<const ThresholdSetting> settings,
                              std::span<const EligibilityRule> rules,
                              std::span<const GroundTruthEvent> truth,
                              const SweepOptions& options = {});

/// Detected events for every (setting, rule) pair on one symbol, in the
/// order settings x rules. Exposed for the detect command and tests.
std::vector<std::vector<DetectedEvent>> detect_events_grid(
    const SymbolSeries& series, std::span<const ThresholdSetting> settings,
    std::span<const EligibilityRule> rules, int window_days, int cluster_gap_hours);

/// The full grid of published settings 1..5 against the four gates with
/// their published fractions, d = 10 and alpha = 2.
std::vector<EligibilityRule> default_rules();

/// Runs fn(i) for i in [0, n) on at most `jobs` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace pumpdet
