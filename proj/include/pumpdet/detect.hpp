#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpdet/gates.hpp"
#include "pumpdet/marketdata.hpp"
#include "pumpdet/rolling.hpp"

namespace pumpdet {

enum class PriceField { Open, High };

/// Price/volume thresholds. The price baseline is always the SMA of open;
/// `price_field` only selects which price of the candle is compared to it.
struct ThresholdSetting {
    int id = 4;
    PriceField price_field = PriceField::High;
    double price_increase = 0.90;   // candle passes above (1 + x) * baseline
    double volume_increase = 4.00;
    int lag_hours = 12;

    /// The five published configurations, id 1..5. Throws InvalidArgument.
    static ThresholdSetting preset(int id);
    static std::vector<ThresholdSetting> all_presets();

    void validate() const;
};

std::string_view to_string(PriceField field);

struct AnomalyFlag {
    Timestamp timestamp{};
    double volume = 0.0;
    bool eligible = false;
    bool volume_anomaly = false;
    bool price_anomaly = false;
    bool combined = false;
    std::optional<double> price_ratio;   // compared price / sma_open
    std::optional<double> volume_ratio;  // volume / sma_volume
};

struct DetectedEvent {
    std::string symbol;
    Timestamp start{};
    Timestamp end{};
    Timestamp peak_time{};
    double peak_volume = 0.0;
    std::optional<double> max_price_ratio;
    std::optional<double> max_volume_ratio;
    int candle_count = 0;
};

AnomalyFlag flag_candle(const Candle& candle, const RollingContext& ctx,
                        const ThresholdSetting& setting, const EligibilityRule& rule);

/// Builds contexts with the setting's lag and the rule's EWMA span, then
/// flags every candle. Throws Error{EmptySeries}.
std::vector<AnomalyFlag> detect_series(const SymbolSeries& series,
                                       const ThresholdSetting& setting,
                                       const EligibilityRule& rule, int window_days = 30);

/// Same, over contexts the caller already built (sizes must match).
std::vector<AnomalyFlag> detect_series(const SymbolSeries& series,
                                       std::span<const RollingContext> contexts,
                                       const ThresholdSetting& setting,
                                       const EligibilityRule& rule);

/// Merges combined-anomalous candles whose successive timestamps are at most
/// `cluster_gap_hours` apart into one event.
std::vector<DetectedEvent> cluster_events(std::span<const AnomalyFlag> flags,
                                          const std::string& symbol, int cluster_gap_hours = 3);

/// Incremental form of cluster_events for callers that do not keep flags.
class EventClusterer {
public:
    EventClusterer(std::string symbol, int cluster_gap_hours);

    void add(const AnomalyFlag& flag);
    std::vector<DetectedEvent> finish();

private:
    std::string symbol_;
    std::chrono::hours gap_;
    std::optional<DetectedEvent> open_;
    std::vector<DetectedEvent> done_;
};

}  // namespace pumpdet
