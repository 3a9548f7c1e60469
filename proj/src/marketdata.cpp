#include "pumpdet/marketdata.hpp"

#include <algorithm>
#include <cmath>

#include "pumpdet/csv.hpp"
#include "pumpdet/error.hpp"

namespace pumpdet {

namespace {

double parse_field(const std::string& text, const char* name) {
    const auto value = csv::parse_double(text);
    if (!value) {
        throw Error(ErrorCode::MalformedRecord,
                    std::string("unparseable ") + name + " '" + text + "'");
    }
    return *value;
}

}  // namespace

Candle validate_candle(Timestamp t, double open, double high, double low, double close,
                       double volume) {
    const double prices[] = {open, high, low, close};
    for (double p : prices) {
        if (!std::isfinite(p) || p < 0.0) {
            throw Error(ErrorCode::MalformedRecord, "price must be finite and non-negative");
        }
    }
    if (!std::isfinite(volume)) {
        throw Error(ErrorCode::MalformedRecord, "volume must be finite");
    }
    if (volume < 0.0) {
        throw Error(ErrorCode::NegativeVolume, "volume " + csv::format_double(volume) + " < 0");
    }
    if (low > high) throw Error(ErrorCode::OhlcViolation, "low > high");
    if (high < open || high < close) throw Error(ErrorCode::OhlcViolation, "high below open/close");
    if (low > open || low > close) throw Error(ErrorCode::OhlcViolation, "low above open/close");
    return Candle{floor_hour(t), open, high, low, close, volume, false};
}

Candle validate_candle(const RawCandle& raw) {
    const auto t = parse_rfc3339(csv::trim(raw.timestamp));
    if (!t) throw Error(ErrorCode::MalformedRecord, "bad timestamp '" + raw.timestamp + "'");
    return validate_candle(*t, parse_field(raw.open, "open"), parse_field(raw.high, "high"),
                           parse_field(raw.low, "low"), parse_field(raw.close, "close"),
                           parse_field(raw.volume, "volume"));
}

SymbolSeries normalize_series(SymbolSeries series) {
    auto& in = series.candles;
    if (in.empty()) throw Error(ErrorCode::EmptySeries, "series '" + series.symbol + "' is empty");

    for (auto& c : in) c.timestamp = floor_hour(c.timestamp);
    std::stable_sort(in.begin(), in.end(), [](const Candle& a, const Candle& b) {
        return a.timestamp < b.timestamp;
    });

    std::vector<Candle> out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        // Keep only the last of a run of equal timestamps.
        if (i + 1 < in.size() && in[i + 1].timestamp == in[i].timestamp) continue;
        if (!out.empty()) {
            const double carry = out.back().close;
            for (auto t = out.back().timestamp + kHour; t < in[i].timestamp; t += kHour) {
                out.push_back(Candle{t, carry, carry, carry, carry, 0.0, true});
            }
        }
        out.push_back(in[i]);
    }
    series.candles = std::move(out);
    series.interval = kHour;
    return series;
}

std::vector<DailyTotal> daily_totals(const SymbolSeries& series) {
    if (series.candles.empty()) {
        throw Error(ErrorCode::EmptySeries, "series '" + series.symbol + "' is empty");
    }
    std::vector<DailyTotal> totals;
    for (const auto& c : series.candles) {
        const Day d = utc_day(c.timestamp);
        if (totals.empty() || totals.back().date != d) totals.push_back(DailyTotal{d, 0.0, 0});
        totals.back().total_volume += c.volume;
        ++totals.back().candle_count;
    }
    return totals;
}

}  // namespace pumpdet
