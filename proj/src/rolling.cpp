#include "pumpdet/rolling.hpp"

#include <algorithm>
#include <cmath>

#include "pumpdet/error.hpp"

namespace pumpdet {

RollingSum::RollingSum(std::size_t capacity) : ring_(std::max<std::size_t>(capacity, 1)) {}

void RollingSum::add(double x) {
    // Neumaier compensated summation.
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
    } else {
        comp_ += (x - t) + sum_;
    }
    sum_ = t;
}

void RollingSum::resum() {
    sum_ = 0.0;
    comp_ = 0.0;
    for (std::size_t k = 0; k < size_; ++k) add(ring_[(head_ + k) % ring_.size()]);
    since_resum_ = 0;
}

void RollingSum::push(double value) {
    const std::size_t cap = ring_.size();
    if (size_ == cap) {
        const double old = ring_[head_];
        if (old != 0.0) --nonzero_;
        add(-old);
        ring_[head_] = value;
        head_ = (head_ + 1) % cap;
    } else {
        ring_[(head_ + size_) % cap] = value;
        ++size_;
    }
    if (value != 0.0) ++nonzero_;
    add(value);

    if (nonzero_ == 0) {
        sum_ = 0.0;
        comp_ = 0.0;
    } else if (++since_resum_ >= cap) {
        resum();
    }
}

double RollingSum::sum() const { return nonzero_ == 0 ? 0.0 : std::max(0.0, sum_ + comp_); }

void RollingMax::push(double value) {
    while (!entries_.empty() && entries_.back().second <= value) entries_.pop_back();
    entries_.emplace_back(seq_, value);
    ++seq_;
    while (entries_.front().first + capacity_ < seq_) entries_.pop_front();
}

ContextBuilder::ContextBuilder(const RollingParams& params)
    : params_(params),
      lag_open_(static_cast<std::size_t>(params.lag_hours)),
      lag_volume_(static_cast<std::size_t>(params.lag_hours)),
      window_volume_(static_cast<std::size_t>(params.window_hours())),
      window_max_(static_cast<std::size_t>(params.window_hours())) {
    if (params.lag_hours < 1 || params.ewma_span_days < 1 || params.window_days < 1) {
        throw Error(ErrorCode::InvalidArgument,
                    "lag_hours, ewma_span_days and window_days must be >= 1");
    }
}

RollingContext ContextBuilder::context() const {
    RollingContext ctx;
    ctx.history_hours = seen_;
    ctx.sma_open = lag_open_.mean();
    ctx.sma_volume = lag_volume_.mean();
    ctx.v_tot = window_volume_.sum();
    ctx.v_max = window_max_.max();
    const auto blocks = static_cast<int>(window_volume_.size() / 24);
    ctx.v_avg_daily = ctx.v_tot / std::clamp(blocks, 1, params_.window_days);
    ctx.complete_days = static_cast<int>(complete_days_.size());
    ctx.ewma_daily = ewma_;
    ctx.sigma_daily = sigma_;
    return ctx;
}

void ContextBuilder::close_day() {
    if (have_day_ && day_count_ == 24) {
        complete_days_.push_back(day_total_);
        if (complete_days_.size() > static_cast<std::size_t>(params_.window_days)) {
            complete_days_.pop_front();
        }
        const std::vector<double> recent_first(complete_days_.rbegin(), complete_days_.rend());
        ewma_ = ewma_daily(recent_first, params_.ewma_span_days);
        sigma_ = population_stddev(recent_first);
    }
    have_day_ = false;
    day_total_ = 0.0;
    day_count_ = 0;
}

void ContextBuilder::push(const Candle& candle) {
    const Day d = utc_day(candle.timestamp);
    if (have_day_ && d != day_) close_day();
    if (!have_day_) {
        have_day_ = true;
        day_ = d;
    }
    day_total_ += candle.volume;
    ++day_count_;
    if (utc_day(candle.timestamp + kHour) != d) close_day();

    lag_open_.push(candle.open);
    lag_volume_.push(candle.volume);
    window_volume_.push(candle.volume);
    window_max_.push(candle.volume);
    ++seen_;
}

std::vector<RollingContext> build_contexts(const SymbolSeries& series,
                                           const RollingParams& params) {
    if (series.candles.empty()) {
        throw Error(ErrorCode::EmptySeries, "series '" + series.symbol + "' is empty");
    }
    ContextBuilder builder(params);
    std::vector<RollingContext> out;
    out.reserve(series.candles.size());
    for (const auto& c : series.candles) {
        out.push_back(builder.context());
        builder.push(c);
    }
    return out;
}

double ewma_daily(std::span<const double> recent_first, int d_span) {
    if (recent_first.empty()) throw Error(ErrorCode::NoCompleteDays, "no complete day totals");
    if (d_span < 1) throw Error(ErrorCode::InvalidArgument, "d_span must be >= 1");
    const auto [lo, hi] = std::minmax_element(recent_first.begin(), recent_first.end());
    if (*lo == *hi) return *lo;

    const double decay = 1.0 - 2.0 / (d_span + 1.0);
    double weight = 1.0;
    double num = 0.0;
    double den = 0.0;
    for (double x : recent_first) {
        num += weight * x;
        den += weight;
        weight *= decay;
    }
    return std::clamp(num / den, *lo, *hi);
}

double population_stddev(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) return 0.0;
    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

}  // namespace pumpdet
