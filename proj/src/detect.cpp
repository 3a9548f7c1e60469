#include "pumpdet/detect.hpp"

#include <algorithm>

#include "pumpdet/error.hpp"

namespace pumpdet {

ThresholdSetting ThresholdSetting::preset(int id) {
    switch (id) {
        case 1: return {1, PriceField::Open, 0.90, 4.00, 12};
        case 2: return {2, PriceField::Open, 0.70, 3.00, 12};
        case 3: return {3, PriceField::High, 1.00, 4.00, 12};
        case 4: return {4, PriceField::High, 0.90, 4.00, 12};
        case 5: return {5, PriceField::High, 0.80, 3.00, 12};
        default: break;
    }
    throw Error(ErrorCode::InvalidArgument, "threshold setting id must be 1..5, got " +
                                                std::to_string(id));
}

std::vector<ThresholdSetting> ThresholdSetting::all_presets() {
    std::vector<ThresholdSetting> out;
    for (int id = 1; id <= 5; ++id) out.push_back(preset(id));
    return out;
}

void ThresholdSetting::validate() const {
    if (!(price_increase > 0.0)) throw Error(ErrorCode::InvalidArgument, "price_increase <= 0");
    if (!(volume_increase > 0.0)) throw Error(ErrorCode::InvalidArgument, "volume_increase <= 0");
    if (lag_hours < 1) throw Error(ErrorCode::InvalidArgument, "lag_hours < 1");
}

std::string_view to_string(PriceField field) {
    return field == PriceField::Open ? "open" : "high";
}

AnomalyFlag flag_candle(const Candle& candle, const RollingContext& ctx,
                        const ThresholdSetting& setting, const EligibilityRule& rule) {
    AnomalyFlag flag;
    flag.timestamp = candle.timestamp;
    flag.volume = candle.volume;

    const double price = setting.price_field == PriceField::Open ? candle.open : candle.high;
    if (ctx.sma_open > 0.0) flag.price_ratio = price / ctx.sma_open;
    if (ctx.sma_volume > 0.0) flag.volume_ratio = candle.volume / ctx.sma_volume;

    if (ctx.history_hours < static_cast<std::size_t>(setting.lag_hours)) return flag;

    flag.price_anomaly =
        ctx.sma_open > 0.0 && price > (1.0 + setting.price_increase) * ctx.sma_open;
    // A zero baseline counts as an unbounded increase; the gate decides.
    flag.volume_anomaly = ctx.sma_volume > 0.0
                              ? candle.volume > (1.0 + setting.volume_increase) * ctx.sma_volume
                              : candle.volume > 0.0;
    flag.eligible = eligibility(candle.volume, ctx, rule).value_or(false);
    flag.combined = flag.eligible && flag.volume_anomaly && flag.price_anomaly;
    return flag;
}

std::vector<AnomalyFlag> detect_series(const SymbolSeries& series,
                                       std::span<const RollingContext> contexts,
                                       const ThresholdSetting& setting,
                                       const EligibilityRule& rule) {
    if (series.candles.empty()) {
        throw Error(ErrorCode::EmptySeries, "series '" + series.symbol + "' is empty");
    }
    if (contexts.size() != series.candles.size()) {
        throw Error(ErrorCode::InvalidArgument, "context count does not match candle count");
    }
    std::vector<AnomalyFlag> flags;
    flags.reserve(series.candles.size());
    for (std::size_t i = 0; i < series.candles.size(); ++i) {
        flags.push_back(flag_candle(series.candles[i], contexts[i], setting, rule));
    }
    return flags;
}

std::vector<AnomalyFlag> detect_series(const SymbolSeries& series,
                                       const ThresholdSetting& setting,
                                       const EligibilityRule& rule, int window_days) {
    setting.validate();
    rule.validate();
    const RollingParams params{setting.lag_hours, rule.d_span, window_days};
    const auto contexts = build_contexts(series, params);
    return detect_series(series, contexts, setting, rule);
}

EventClusterer::EventClusterer(std::string symbol, int cluster_gap_hours)
    : symbol_(std::move(symbol)), gap_(cluster_gap_hours) {}

namespace {

void fold_ratio(std::optional<double>& acc, const std::optional<double>& value) {
    if (value && (!acc || *value > *acc)) acc = value;
}

}  // namespace

void EventClusterer::add(const AnomalyFlag& flag) {
    if (!flag.combined) return;
    if (open_ && flag.timestamp - open_->end > gap_) {
        done_.push_back(std::move(*open_));
        open_.reset();
    }
    if (!open_) {
        open_ = DetectedEvent{symbol_, flag.timestamp, flag.timestamp, flag.timestamp,
                              flag.volume, flag.price_ratio, flag.volume_ratio, 1};
        return;
    }
    open_->end = flag.timestamp;
    ++open_->candle_count;
    if (flag.volume > open_->peak_volume) {
        open_->peak_volume = flag.volume;
        open_->peak_time = flag.timestamp;
    }
    fold_ratio(open_->max_price_ratio, flag.price_ratio);
    fold_ratio(open_->max_volume_ratio, flag.volume_ratio);
}

std::vector<DetectedEvent> EventClusterer::finish() {
    if (open_) {
        done_.push_back(std::move(*open_));
        open_.reset();
    }
    return std::move(done_);
}

std::vector<DetectedEvent> cluster_events(std::span<const AnomalyFlag> flags,
                                          const std::string& symbol, int cluster_gap_hours) {
    EventClusterer clusterer(symbol, cluster_gap_hours);
    for (const auto& f : flags) clusterer.add(f);
    return clusterer.finish();
}

}  // namespace pumpdet
