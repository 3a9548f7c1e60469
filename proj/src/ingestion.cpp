#include "pumpdet/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pumpdet/csv.hpp"

namespace pumpdet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kCandleHeader = "timestamp,open,high,low,close,volume";
constexpr std::string_view kTruthHeader = "symbol,announce_time,source";

Timestamp ceil_hour(Timestamp t) {
    const Timestamp f = floor_hour(t);
    return f == t ? t : f + kHour;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
    if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) {
        lines.front().erase(0, 3);
    }
    return lines;
}

bool blank(const std::string& line) { return csv::trim(line).empty(); }

void check_symbol(const std::string& symbol) {
    if (symbol.empty() || symbol.find_first_of("/\\") != std::string::npos || symbol == "." ||
        symbol == "..") {
        throw Error(ErrorCode::InvalidArgument, "unusable symbol name '" + symbol + "'");
    }
}

double json_number(const json& v, const char* what) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        if (const auto d = csv::parse_double(v.get<std::string>())) return *d;
    }
    throw Error(ErrorCode::DecodeError, std::string("non-numeric ") + what);
}

json parse_json(const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::DecodeError, std::string("invalid JSON: ") + e.what());
    }
}

Candle decode_candle_row(const json& row) {
    double t = 0, o = 0, h = 0, l = 0, c = 0, v = 0;
    if (row.is_array()) {
        if (row.size() < 6) throw Error(ErrorCode::DecodeError, "candle row has < 6 fields");
        t = json_number(row[0], "time");
        o = json_number(row[1], "open");
        h = json_number(row[2], "high");
        l = json_number(row[3], "low");
        c = json_number(row[4], "close");
        v = json_number(row[5], "volume");
    } else if (row.is_object()) {
        const char* time_keys[] = {"startTime", "time", "timestamp", "ts"};
        const json* tv = nullptr;
        for (const char* k : time_keys) {
            if (row.contains(k)) {
                tv = &row.at(k);
                break;
            }
        }
        if (!tv) throw Error(ErrorCode::DecodeError, "candle object without time");
        for (const char* k : {"open", "high", "low", "close", "volume"}) {
            if (!row.contains(k)) throw Error(ErrorCode::DecodeError, std::string("missing ") + k);
        }
        t = json_number(*tv, "time");
        o = json_number(row.at("open"), "open");
        h = json_number(row.at("high"), "high");
        l = json_number(row.at("low"), "low");
        c = json_number(row.at("close"), "close");
        v = json_number(row.at("volume"), "volume");
    } else {
        throw Error(ErrorCode::DecodeError, "candle row is neither array nor object");
    }
    if (!std::isfinite(t)) throw Error(ErrorCode::DecodeError, "non-finite candle time");
    return validate_candle(from_unix_ms(static_cast<std::int64_t>(t)), o, h, l, c, v);
}

}  // namespace

// ===========================================================================
// FetchPlan
// ===========================================================================

void FetchPlan::validate() const {
    check_symbol(symbol);
    if (!(start < end)) throw Error(ErrorCode::InvalidArgument, "fetch plan needs start < end");
    if (chunk_size < 1) throw Error(ErrorCode::InvalidArgument, "chunk_size must be >= 1");
    if (!(max_rps > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_rps must be positive");
    if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
}

std::int64_t FetchPlan::span_hours() const {
    return std::chrono::duration_cast<std::chrono::hours>(ceil_hour(end) - floor_hour(start))
        .count();
}

std::int64_t FetchPlan::request_count() const {
    return (span_hours() + chunk_size - 1) / chunk_size;
}

PartialDataError::PartialDataError(const std::string& message, SymbolSeries received)
    : Error(ErrorCode::PartialData, message), received_(std::move(received)) {}

// ===========================================================================
// ExchangeClient
// ===========================================================================

ExchangeClient::ExchangeClient(Transport& transport, Clock& clock,
                               std::shared_ptr<RateLimiter> limiter, BackoffPolicy backoff)
    : transport_(transport),
      clock_(clock),
      limiter_(std::move(limiter)),
      backoff_(backoff),
      jitter_rng_(backoff.seed) {
    if (!limiter_) throw Error(ErrorCode::InvalidArgument, "ExchangeClient needs a rate limiter");
}

HttpResponse ExchangeClient::get_with_retry(const std::string& path, const QueryParams& query,
                                            int max_retries, RateLimiter* extra_limiter) {
    for (int attempt = 0;; ++attempt) {
        limiter_->acquire();
        if (extra_limiter) extra_limiter->acquire();
        ++requests_;

        HttpResponse response;
        bool transient = false;
        std::string failure;
        try {
            response = transport_.get(path, query);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NetworkError) throw;
            transient = true;
            failure = e.what();
        }
        if (!transient) {
            if (response.status >= 200 && response.status < 300) return response;
            if (response.status != 429 && response.status < 500) {
                throw Error(ErrorCode::ApiError, "GET " + path + " returned HTTP " +
                                                     std::to_string(response.status) + ": " +
                                                     response.body.substr(0, 512));
            }
            failure = "HTTP " + std::to_string(response.status);
        }
        if (attempt >= max_retries) {
            if (transient) throw Error(ErrorCode::NetworkError, failure);
            throw Error(ErrorCode::RateLimitExhausted,
                        "GET " + path + " still failing after " + std::to_string(max_retries) +
                            " retries (" + failure + ")");
        }
        const double u = static_cast<double>(jitter_rng_() >> 11) * 0x1.0p-53;  // [0, 1)
        const double scale = std::pow(backoff_.factor, attempt) *
                             (1.0 + backoff_.jitter * (2.0 * u - 1.0));
        clock_.sleep_for(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double, std::milli>(static_cast<double>(backoff_.base.count()) *
                                                      scale)));
    }
}

std::vector<std::string> ExchangeClient::list_markets(int max_retries) {
    const auto response = get_with_retry("/markets", {}, max_retries, nullptr);
    return decode_markets(response.body);
}

SymbolSeries ExchangeClient::fetch_candles(const FetchPlan& plan) {
    plan.validate();
    std::optional<RateLimiter> own_limit;
    if (plan.max_rps < limiter_->max_rps()) own_limit.emplace(plan.max_rps, clock_);

    const Timestamp first = floor_hour(plan.start);
    const Timestamp last = ceil_hour(plan.end);
    const auto chunk = std::chrono::hours(plan.chunk_size);

    SymbolSeries series{plan.symbol, kHour, {}};
    for (Timestamp from = first; from < last; from += chunk) {
        const Timestamp to = std::min(from + chunk, last);
        const QueryParams query{
            {"symbol", plan.symbol},
            {"interval", "HOUR_1"},
            {"startTime", std::to_string(to_unix_ms(from))},
            {"endTime", std::to_string(to_unix_ms(to))},
            {"limit", std::to_string((to - from) / kHour)},
        };
        const auto response = get_with_retry("/candles", query, plan.max_retries,
                                              own_limit ? &*own_limit : nullptr);
        for (auto& c : decode_candles(response.body)) {
            if (c.timestamp >= from && c.timestamp < to) series.candles.push_back(c);
        }
    }

    if (series.candles.empty()) {
        throw PartialDataError("no candles returned for " + plan.symbol, std::move(series));
    }
    series = normalize_series(std::move(series));
    const auto& got = series.candles;
    if (got.front().timestamp != first || got.back().timestamp + kHour != last) {
        std::string msg = plan.symbol + ": requested " + format_rfc3339(first) + " .. " +
                          format_rfc3339(last) + ", received " +
                          format_rfc3339(got.front().timestamp) + " .. " +
                          format_rfc3339(got.back().timestamp + kHour);
        throw PartialDataError(msg, std::move(series));
    }
    return series;
}

std::vector<std::string> decode_markets(const std::string& body) {
    const json doc = parse_json(body);
    if (!doc.is_array()) throw Error(ErrorCode::DecodeError, "market list is not an array");
    std::vector<std::string> out;
    out.reserve(doc.size());
    for (const auto& item : doc) {
        if (item.is_string()) {
            out.push_back(item.get<std::string>());
        } else if (item.is_object() && item.contains("symbol") && item["symbol"].is_string()) {
            out.push_back(item["symbol"].get<std::string>());
        } else {
            throw Error(ErrorCode::DecodeError, "market entry without a symbol");
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Candle> decode_candles(const std::string& body) {
    const json doc = parse_json(body);
    if (!doc.is_array()) throw Error(ErrorCode::DecodeError, "candle payload is not an array");
    std::vector<Candle> out;
    out.reserve(doc.size());
    for (const auto& row : doc) out.push_back(decode_candle_row(row));
    return out;
}

// ===========================================================================
// Ground truth
// ===========================================================================

std::vector<GroundTruthEvent> load_ground_truth(const fs::path& path) {
    const auto lines = read_lines(path);
    std::size_t header = 0;
    while (header < lines.size() && blank(lines[header])) ++header;
    if (header == lines.size()) throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
    if (csv::trim(lines[header]) != kTruthHeader) {
        throw Error(ErrorCode::MalformedRecord,
                    "expected header '" + std::string(kTruthHeader) + "'", header + 1);
    }

    std::vector<GroundTruthEvent> events;
    for (std::size_t i = header + 1; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const std::size_t line_no = i + 1;
        const auto fields = csv::split(lines[i]);
        if (!fields || fields->size() != 3) {
            throw Error(ErrorCode::MalformedRecord, "expected 3 fields", line_no);
        }
        const std::string symbol = csv::trim((*fields)[0]);
        if (symbol.empty()) throw Error(ErrorCode::MalformedRecord, "empty symbol", line_no);
        const auto when = parse_rfc3339(csv::trim((*fields)[1]));
        if (!when) {
            throw Error(ErrorCode::MalformedRecord, "bad announce_time '" + (*fields)[1] + "'",
                        line_no);
        }
        events.push_back({symbol, *when, csv::trim((*fields)[2])});
    }
    if (events.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no events");

    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.announce_time != b.announce_time) return a.announce_time < b.announce_time;
        return a.symbol < b.symbol;
    });
    events.erase(std::unique(events.begin(), events.end(),
                             [](const auto& a, const auto& b) {
                                 return a.symbol == b.symbol && a.announce_time == b.announce_time;
                             }),
                 events.end());
    return events;
}

void store_ground_truth(const std::vector<GroundTruthEvent>& events, const fs::path& path) {
    std::string out(kTruthHeader);
    out += '\n';
    for (const auto& e : events) {
        out += csv::escape(e.symbol) + ',' + format_rfc3339(e.announce_time) + ',' +
               csv::escape(e.source) + '\n';
    }
    csv::write_file_atomic(path, out);
}

// ===========================================================================
// Candle files
// ===========================================================================

fs::path series_path(const fs::path& dir, const std::string& symbol) {
    check_symbol(symbol);
    return dir / (symbol + ".csv");
}

std::string serialize_series_csv(const SymbolSeries& series) {
    std::string out(kCandleHeader);
    out += '\n';
    out.reserve(series.candles.size() * 64);
    for (const auto& c : series.candles) {
        out += format_rfc3339(c.timestamp);
        for (double v : {c.open, c.high, c.low, c.close, c.volume}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

void store_series(const SymbolSeries& series, const fs::path& dir) {
    csv::write_file_atomic(series_path(dir, series.symbol), serialize_series_csv(series));
}

SymbolSeries load_series(const fs::path& dir, const std::string& symbol) {
    const fs::path path = series_path(dir, symbol);
    if (!fs::exists(path)) throw Error(ErrorCode::EmptySeries, "no data file " + path.string());
    const auto lines = read_lines(path);
    if (lines.empty()) throw Error(ErrorCode::EmptySeries, path.string() + " is empty");
    if (csv::trim(lines[0]) != kCandleHeader) {
        throw Error(ErrorCode::MalformedRecord,
                    "expected header '" + std::string(kCandleHeader) + "'", 1);
    }

    SymbolSeries series{symbol, kHour, {}};
    series.candles.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto fields = csv::split(lines[i]);
        if (!fields || fields->size() != 6) {
            throw Error(ErrorCode::MalformedRecord, "expected 6 fields", i + 1);
        }
        const auto& f = *fields;
        try {
            series.candles.push_back(validate_candle(RawCandle{f[0], f[1], f[2], f[3], f[4], f[5]}));
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ": " + e.message(), i + 1);
        }
    }
    if (series.candles.empty()) throw Error(ErrorCode::EmptySeries, path.string() + " has no rows");
    return normalize_series(std::move(series));
}

std::vector<std::string> list_stored_symbols(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const std::string stem = entry.path().stem().string();
        if (stem == "truth") continue;
        out.push_back(stem);
    }
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace pumpdet
