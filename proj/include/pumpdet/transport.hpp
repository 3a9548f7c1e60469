#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace pumpdet {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using QueryParams = std::map<std::string, std::string>;

/// The only way ingestion talks to an exchange. Implementations throw
/// Error{NetworkError} when no HTTP response was obtained at all.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& path, const QueryParams& query) = 0;
};

/// Time source for rate limiting and backoff, swappable for a manual clock
/// in tests.
class Clock {
public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_until(time_point t) = 0;
    void sleep_for(duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
public:
    time_point now() override;
    void sleep_until(time_point t) override;
};

/// Advances only when someone sleeps on it. Thread-safe.
class ManualClock final : public Clock {
public:
    time_point now() override;
    void sleep_until(time_point t) override;
    void advance(duration d);

private:
    std::mutex mutex_;
    time_point now_{};
};

/// Sliding-window limiter: at most `window_requests` issues in any window of
/// `window` length, with window_requests = max(1, floor(max_rps)) and
/// window = max(1 s, window_requests / max_rps). No one-second window ever
/// sees more than max_rps requests and the sustained rate never exceeds it.
/// acquire() reserves a slot under the lock and sleeps outside it, so it is
/// safe to share between concurrent fetches.
class RateLimiter {
public:
    RateLimiter(double max_rps, Clock& clock);

    /// Blocks until a request may be issued; returns the issue time.
    Clock::time_point acquire();
    double max_rps() const { return max_rps_; }

private:
    double max_rps_;
    Clock& clock_;
    std::size_t window_requests_;
    Clock::duration window_;
    std::mutex mutex_;
    std::vector<Clock::time_point> issued_;  // ring of the last window_requests_ issue times
    std::size_t next_ = 0;
};

}  // namespace pumpdet
