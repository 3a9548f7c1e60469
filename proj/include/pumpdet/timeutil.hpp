#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pumpdet {

using Timestamp = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;

inline constexpr std::chrono::hours kHour{1};

/// Parses an RFC3339 instant ("2024-08-15T00:00:00Z", optional fractional
/// seconds, "Z" or "+hh:mm" offset; a space may replace the 'T'). Fractional
/// seconds are truncated. Returns nullopt on any syntax or range error.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);

inline Timestamp floor_hour(Timestamp t) {
    return std::chrono::floor<std::chrono::hours>(t);
}

inline Day utc_day(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

inline std::int64_t to_unix_ms(Timestamp t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

inline Timestamp from_unix_ms(std::int64_t ms) {
    return std::chrono::floor<std::chrono::seconds>(
        std::chrono::sys_time<std::chrono::milliseconds>(std::chrono::milliseconds(ms)));
}

}  // namespace pumpdet
