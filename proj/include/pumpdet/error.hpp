#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pumpdet {

enum class ErrorCode {
    MalformedRecord,
    OhlcViolation,
    NegativeVolume,
    EmptySeries,
    EmptyFile,
    EmptyDataset,
    IoError,
    NetworkError,
    ApiError,
    DecodeError,
    RateLimitExhausted,
    PartialData,
    MissingContext,
    NoCompleteDays,
    InvalidSpec,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports carries one of the codes above. Record
// parsers also attach the 1-based line number of the offending input line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> line = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    /// The message without the code and line prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
    std::string message_;
};

}  // namespace pumpdet
