#pragma once

#include <cstdint>
#include <random>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pumpdet/error.hpp"
#include "pumpdet/marketdata.hpp"
#include "pumpdet/transport.hpp"

namespace pumpdet {

struct FetchPlan {
    std::string symbol;
    Timestamp start{};
    Timestamp end{};  // exclusive
    int chunk_size = 480;
    double max_rps = 3.0;
    int max_retries = 5;

    void validate() const;
    /// Hour-aligned candle slots in [start, end).
    std::int64_t span_hours() const;
    std::int64_t request_count() const;
};

struct BackoffPolicy {
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    double jitter = 0.20;  // relative, symmetric
    std::uint64_t seed = 0x5eed;
};

struct GroundTruthEvent {
    std::string symbol;
    Timestamp announce_time{};
    std::string source;

    friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) = default;
};

/// Raised when the exchange covered less than the requested span. Carries
/// whatever was received so the caller can decide what to keep.
class PartialDataError : public Error {
public:
    PartialDataError(const std::string& message, SymbolSeries received);
    const SymbolSeries& received() const noexcept { return received_; }

private:
    SymbolSeries received_;
};

/// REST client for the public market-data endpoints:
///   GET /markets                 -> JSON array of symbols (strings or {"symbol": ...})
///   GET /candles?symbol=&interval=HOUR_1&startTime=&endTime=&limit=
///                                -> JSON array of [openTimeMs, o, h, l, c, v] rows
/// startTime is inclusive, endTime exclusive, both in Unix milliseconds.
/// Numbers may be sent as JSON numbers or numeric strings. Every request,
/// including retries, passes through the shared rate limiter. One client per
/// thread; the limiter is the piece meant to be shared.
class ExchangeClient {
public:
    ExchangeClient(Transport& transport, Clock& clock, std::shared_ptr<RateLimiter> limiter,
                   BackoffPolicy backoff = {});

    /// Sorted, de-duplicated. Throws NetworkError / ApiError / DecodeError /
    /// RateLimitExhausted.
    std::vector<std::string> list_markets(int max_retries = 5);

    /// Validated and normalized. Throws NetworkError / ApiError / DecodeError /
    /// RateLimitExhausted / MalformedRecord / OhlcViolation / NegativeVolume /
    /// PartialDataError.
    SymbolSeries fetch_candles(const FetchPlan& plan);

    std::size_t requests_issued() const { return requests_; }

private:
    HttpResponse get_with_retry(const std::string& path, const QueryParams& query,
                                int max_retries, RateLimiter* extra_limiter);

    Transport& transport_;
    Clock& clock_;
    std::shared_ptr<RateLimiter> limiter_;
    BackoffPolicy backoff_;
    std::mt19937_64 jitter_rng_;
    std::size_t requests_ = 0;
};

/// Parses market-list and candle payloads; exposed for fixture tests.
std::vector<std::string> decode_markets(const std::string& body);
std::vector<Candle> decode_candles(const std::string& body);

/// Ground-truth CSV with header `symbol,announce_time,source`. Sorted by
/// announce time, exact duplicates (symbol and time) collapsed.
/// Throws EmptyFile / IoError / MalformedRecord (with line number).
std::vector<GroundTruthEvent> load_ground_truth(const std::filesystem::path& path);
void store_ground_truth(const std::vector<GroundTruthEvent>& events,
                        const std::filesystem::path& path);

/// `<dir>/<symbol>.csv` with header `timestamp,open,high,low,close,volume`.
/// Numbers are written in shortest round-trip form.
std::filesystem::path series_path(const std::filesystem::path& dir, const std::string& symbol);
void store_series(const SymbolSeries& series, const std::filesystem::path& dir);
/// Validates every row and normalizes. A missing or row-less file is
/// EmptySeries. The synthetic flag is not persisted.
SymbolSeries load_series(const std::filesystem::path& dir, const std::string& symbol);
/// Symbols with a `<symbol>.csv` in `dir`, sorted; `truth.csv` is skipped.
std::vector<std::string> list_stored_symbols(const std::filesystem::path& dir);

std::string serialize_series_csv(const SymbolSeries& series);

}  // namespace pumpdet
