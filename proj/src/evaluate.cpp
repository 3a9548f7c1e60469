#include "pumpdet/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "pumpdet/error.hpp"

namespace pumpdet {

void MatchConfig::validate() const {
    if (pre_tolerance_hours < 0 || post_tolerance_hours < 0) {
        throw Error(ErrorCode::InvalidArgument, "match tolerances must be >= 0");
    }
}

MatchResult match_events(const EventsBySymbol& detected, std::span<const GroundTruthEvent> truth,
                         const MatchConfig& cfg) {
    cfg.validate();
    const std::chrono::hours pre(cfg.pre_tolerance_hours);
    const std::chrono::hours post(cfg.post_tolerance_hours);

    // Sorted copies of the detections, with a used mark per event.
    std::map<std::string, std::vector<std::pair<const DetectedEvent*, bool>>> pool;
    std::int64_t total_detected = 0;
    for (const auto& [symbol, events] : detected) {
        auto& bucket = pool[symbol];
        for (const auto& e : events) bucket.emplace_back(&e, false);
        std::stable_sort(bucket.begin(), bucket.end(),
                         [](const auto& a, const auto& b) { return a.first->start < b.first->start; });
        total_detected += static_cast<std::int64_t>(events.size());
    }

    std::vector<std::size_t> order(truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return truth[a].announce_time < truth[b].announce_time;
    });

    MatchResult result;
    result.matches.resize(truth.size());
    for (std::size_t idx : order) {
        const auto& t = truth[idx];
        const auto it = pool.find(t.symbol);
        if (it != pool.end()) {
            const Timestamp lo = t.announce_time - pre;
            const Timestamp hi = t.announce_time + post;
            for (auto& [event, used] : it->second) {
                if (used || event->end < lo) continue;
                if (event->start > hi) break;
                used = true;
                result.matches[idx] = *event;
                break;
            }
        }
        if (result.matches[idx]) {
            ++result.true_positives;
        } else {
            ++result.missed_events;
        }
    }
    result.false_positive_events = total_detected - result.true_positives;
    return result;
}

Metrics metrics(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    const auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
    Metrics m;
    m.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    m.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

std::vector<EligibilityRule> default_rules() {
    return {EligibilityRule::total_volume(), EligibilityRule::avg_daily(),
            EligibilityRule::ewma(10), EligibilityRule::ewma_volatility(10, 2.0)};
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct Partial {
    std::int64_t vol = 0;
    std::int64_t raw_vol = 0;
    std::int64_t price = 0;
    std::int64_t combined = 0;
    std::vector<DetectedEvent> events;
};

int context_span(const EligibilityRule& rule, std::span<const EligibilityRule> rules) {
    if (rule.uses_ewma()) return rule.d_span;
    // Gates that ignore the EWMA can ride on any pass already needed.
    for (const auto& r : rules) {
        if (r.uses_ewma()) return r.d_span;
    }
    return rule.d_span;
}

std::vector<Partial> process_symbol(const SymbolSeries& series,
                                    std::span<const ThresholdSetting> settings,
                                    std::span<const EligibilityRule> rules, int window_days,
                                    int cluster_gap_hours) {
    std::map<std::pair<int, int>, std::vector<RollingContext>> contexts;
    const auto contexts_for = [&](int lag, int span) -> const std::vector<RollingContext>& {
        auto [it, inserted] = contexts.try_emplace({lag, span});
        if (inserted) it->second = build_contexts(series, RollingParams{lag, span, window_days});
        return it->second;
    };

    std::vector<Partial> out(settings.size() * rules.size());
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const auto& setting = settings[s];
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const auto& rule = rules[r];
            const auto& ctx = contexts_for(setting.lag_hours, context_span(rule, rules));
            Partial& p = out[s * rules.size() + r];
            EventClusterer clusterer(series.symbol, cluster_gap_hours);
            for (std::size_t i = 0; i < series.candles.size(); ++i) {
                const AnomalyFlag f = flag_candle(series.candles[i], ctx[i], setting, rule);
                p.raw_vol += f.volume_anomaly;
                p.vol += f.volume_anomaly && f.eligible;
                p.price += f.price_anomaly;
                p.combined += f.combined;
                clusterer.add(f);
            }
            p.events = clusterer.finish();
        }
    }
    return out;
}

void validate_grid(std::span<const ThresholdSetting> settings,
                   std::span<const EligibilityRule> rules) {
    if (settings.empty() || rules.empty()) {
        throw Error(ErrorCode::InvalidArgument, "need at least one setting and one rule");
    }
    for (const auto& s : settings) s.validate();
    for (const auto& r : rules) r.validate();
}

}  // namespace

std::vector<std::vector<DetectedEvent>> detect_events_grid(
    const SymbolSeries& series, std::span<const ThresholdSetting> settings,
    std::span<const EligibilityRule> rules, int window_days, int cluster_gap_hours) {
    validate_grid(settings, rules);
    if (series.candles.empty()) {
        throw Error(ErrorCode::EmptySeries, "series '" + series.symbol + "' is empty");
    }
    auto partials = process_symbol(series, settings, rules, window_days, cluster_gap_hours);
    std::vector<std::vector<DetectedEvent>> out;
    out.reserve(partials.size());
    for (auto& p : partials) out.push_back(std::move(p.events));
    return out;
}

std::vector<GroundTruthEvent> truth_within(std::span<const SymbolSeries> dataset,
                                           std::span<const GroundTruthEvent> truth) {
    std::unordered_map<std::string, std::pair<Timestamp, Timestamp>> spans;
    for (const auto& s : dataset) {
        if (s.candles.empty()) continue;
        spans[s.symbol] = {s.candles.front().timestamp, s.candles.back().timestamp + kHour};
    }
    std::vector<GroundTruthEvent> out;
    for (const auto& t : truth) {
        const auto it = spans.find(t.symbol);
        if (it == spans.end()) continue;
        if (t.announce_time >= it->second.first && t.announce_time < it->second.second) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<EvalReport> sweep(std::span<const SymbolSeries> dataset,
                              std::span<const ThresholdSetting> settings,
                              std::span<const EligibilityRule> rules,
                              std::span<const GroundTruthEvent> truth,
                              const SweepOptions& options) {
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "no series to evaluate");
    validate_grid(settings, rules);
    options.match.validate();
    for (const auto& s : dataset) {
        if (s.candles.empty()) {
            throw Error(ErrorCode::EmptySeries, "series '" + s.symbol + "' is empty");
        }
    }

    std::vector<std::vector<Partial>> per_symbol(dataset.size());
    parallel_for(dataset.size(), options.jobs, [&](std::size_t i) {
        per_symbol[i] = process_symbol(dataset[i], settings, rules, options.window_days,
                                       options.cluster_gap_hours);
    });

    const auto scoped_truth = truth_within(dataset, truth);
    std::vector<EvalReport> reports;
    reports.reserve(settings.size() * rules.size());
    for (std::size_t s = 0; s < settings.size(); ++s) {
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const std::size_t k = s * rules.size() + r;
            EvalReport rep;
            rep.setting_id = settings[s].id;
            rep.rule_kind = rules[r].kind;
            rep.d_span = rules[r].d_span;
            rep.alpha = rules[r].alpha;
            rep.rule_label = describe(rules[r]);
            EventsBySymbol events;
            for (std::size_t i = 0; i < dataset.size(); ++i) {
                const Partial& p = per_symbol[i][k];
                rep.vol_anomaly_count += p.vol;
                rep.raw_vol_anomaly_count += p.raw_vol;
                rep.price_anomaly_count += p.price;
                rep.combined_count += p.combined;
                rep.detected_events += static_cast<std::int64_t>(p.events.size());
                auto& bucket = events[dataset[i].symbol];
                bucket.insert(bucket.end(), p.events.begin(), p.events.end());
            }
            const MatchResult m = match_events(events, scoped_truth, options.match);
            rep.true_positives = m.true_positives;
            rep.missed_events = m.missed_events;
            rep.false_positive_events = m.false_positive_events;
            const Metrics mt = metrics(m.true_positives, m.false_positive_events, m.missed_events);
            rep.precision = mt.precision;
            rep.recall = mt.recall;
            rep.f1 = mt.f1;
            reports.push_back(std::move(rep));
        }
    }
    std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
        return std::tie(a.setting_id, a.rule_kind, a.d_span, a.alpha) <
               std::tie(b.setting_id, b.rule_kind, b.d_span, b.alpha);
    });
    return reports;
}

}  // namespace pumpdet
