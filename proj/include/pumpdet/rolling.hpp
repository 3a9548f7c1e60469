#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "pumpdet/marketdata.hpp"

namespace pumpdet {

struct RollingParams {
    int lag_hours = 12;       // SMA baseline window, in candles
    int ewma_span_days = 10;  // d of EWMA_d
    int window_days = 30;     // trailing window for V_tot, V_max and daily stats

    int window_hours() const { return window_days * 24; }
};

/// Trailing statistics for one candle. Every field is computed only from
/// candles strictly before it.
struct RollingContext {
    double sma_open = 0.0;      // mean open over the last lag_hours candles
    double sma_volume = 0.0;    // mean volume over the same candles
    double v_tot = 0.0;         // volume sum over the last window_hours candles
    double v_max = 0.0;         // largest single-candle volume over those candles
    double v_avg_daily = 0.0;   // v_tot / trailing 24h blocks available, clamped to [1, window_days]
    double ewma_daily = 0.0;    // EWMA of complete UTC-day totals, 0 if none
    double sigma_daily = 0.0;   // population stddev of the same day totals
    int complete_days = 0;      // complete days feeding ewma_daily / sigma_daily
    std::size_t history_hours = 0;

    friend bool operator==(const RollingContext&, const RollingContext&) = default;
};

/// Fixed-capacity window sum. Uses compensated updates, snaps to exactly zero
/// when the window holds only zeros, and re-sums from scratch once per full
/// rotation so drift cannot accumulate across long series.
class RollingSum {
public:
    explicit RollingSum(std::size_t capacity);

    void push(double value);
    double sum() const;
    double mean() const { return size_ == 0 ? 0.0 : sum() / static_cast<double>(size_); }
    std::size_t size() const { return size_; }

private:
    void add(double x);
    void resum();

    std::vector<double> ring_;
    std::size_t head_ = 0;  // oldest element once full
    std::size_t size_ = 0;
    std::size_t nonzero_ = 0;
    std::size_t since_resum_ = 0;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sliding maximum over the last `capacity` pushes (monotonic deque).
class RollingMax {
public:
    explicit RollingMax(std::size_t capacity) : capacity_(capacity) {}

    void push(double value);
    double max() const { return entries_.empty() ? 0.0 : entries_.front().second; }

private:
    std::size_t capacity_;
    std::size_t seq_ = 0;
    std::deque<std::pair<std::size_t, double>> entries_;
};

/// Single-pass builder over a normalized series: context() describes the
/// candle about to be pushed. A UTC day is closed when its hour-23 candle
/// arrives and counts as complete only if all 24 hours were seen.
class ContextBuilder {
public:
    explicit ContextBuilder(const RollingParams& params);

    RollingContext context() const;
    void push(const Candle& candle);

private:
    void close_day();

    RollingParams params_;
    RollingSum lag_open_;
    RollingSum lag_volume_;
    RollingSum window_volume_;
    RollingMax window_max_;
    std::size_t seen_ = 0;

    bool have_day_ = false;
    Day day_{};
    double day_total_ = 0.0;
    int day_count_ = 0;
    std::deque<double> complete_days_;  // oldest first, at most window_days
    double ewma_ = 0.0;
    double sigma_ = 0.0;
};

std::vector<RollingContext> build_contexts(const SymbolSeries& series,
                                           const RollingParams& params);

/// EWMA with span `d_span` over day totals given most-recent-first:
/// lambda = 2/(d+1), weight (1-lambda)^i, normalized by the weight sum.
/// Throws Error{NoCompleteDays} on empty input.
double ewma_daily(std::span<const double> recent_first, int d_span);

/// Population standard deviation; exactly 0 when all values are equal.
double population_stddev(std::span<const double> values);

}  // namespace pumpdet
