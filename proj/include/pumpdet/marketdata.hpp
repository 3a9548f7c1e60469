#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "pumpdet/timeutil.hpp"

namespace pumpdet {

/// One hourly OHLCV record. Prices are in quote currency, volume in
/// quote-currency units. `synthetic` marks gap-fill candles that the
/// exchange never reported; those are always flat with zero volume.
struct Candle {
    Timestamp timestamp{};
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
    bool synthetic = false;

    friend bool operator==(const Candle&, const Candle&) = default;
};

/// Unparsed candle fields, as read from a CSV row.
struct RawCandle {
    std::string timestamp;
    std::string open;
    std::string high;
    std::string low;
    std::string close;
    std::string volume;
};

struct SymbolSeries {
    std::string symbol;
    std::chrono::hours interval = kHour;
    std::vector<Candle> candles;

    friend bool operator==(const SymbolSeries&, const SymbolSeries&) = default;
};

struct DailyTotal {
    Day date{};
    double total_volume = 0.0;
    int candle_count = 0;

    friend bool operator==(const DailyTotal&, const DailyTotal&) = default;
};

// Throws Error{MalformedRecord | OhlcViolation | NegativeVolume}. The
// returned timestamp is truncated to the hour.
Candle validate_candle(const RawCandle& raw);
Candle validate_candle(Timestamp t, double open, double high, double low, double close,
                       double volume);

/// Sorts by time, collapses duplicate timestamps (last record wins) and
/// fills every missing hour with a synthetic candle carrying the previous
/// close. Throws Error{EmptySeries}.
SymbolSeries normalize_series(SymbolSeries series);

/// One total per UTC day intersecting a normalized series.
std::vector<DailyTotal> daily_totals(const SymbolSeries& series);

}  // namespace pumpdet
