#include <algorithm>
#include <cmath>
#include <thread>

#include "pumpdet/error.hpp"
#include "pumpdet/transport.hpp"

namespace pumpdet {

Clock::time_point SystemClock::now() {
    return std::chrono::time_point_cast<duration>(std::chrono::steady_clock::now());
}

void SystemClock::sleep_until(time_point t) { std::this_thread::sleep_until(t); }

Clock::time_point ManualClock::now() {
    std::lock_guard lock(mutex_);
    return now_;
}

void ManualClock::sleep_until(time_point t) {
    std::lock_guard lock(mutex_);
    now_ = std::max(now_, t);
}

void ManualClock::advance(duration d) {
    std::lock_guard lock(mutex_);
    now_ += d;
}

RateLimiter::RateLimiter(double max_rps, Clock& clock) : max_rps_(max_rps), clock_(clock) {
    if (!(max_rps > 0.0) || !std::isfinite(max_rps)) {
        throw Error(ErrorCode::InvalidArgument, "max_rps must be positive");
    }
    window_requests_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(max_rps)));
    const double window_s = std::max(1.0, static_cast<double>(window_requests_) / max_rps);
    window_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(window_s));
    issued_.reserve(window_requests_);
}

Clock::time_point RateLimiter::acquire() {
    Clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        slot = clock_.now();
        if (issued_.size() == window_requests_) {
            // The oldest of the last window_requests_ issues must leave the window first.
            slot = std::max(slot, issued_[next_] + window_);
            issued_[next_] = slot;
            next_ = (next_ + 1) % window_requests_;
        } else {
            if (!issued_.empty()) slot = std::max(slot, issued_.back());
            issued_.push_back(slot);
        }
    }
    clock_.sleep_until(slot);
    return slot;
}

}  // namespace pumpdet
