#include "pumpdet/error.hpp"

namespace pumpdet {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::OhlcViolation: return "OhlcViolation";
        case ErrorCode::NegativeVolume: return "NegativeVolume";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::NetworkError: return "NetworkError";
        case ErrorCode::ApiError: return "ApiError";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::RateLimitExhausted: return "RateLimitExhausted";
        case ErrorCode::PartialData: return "PartialData";
        case ErrorCode::MissingContext: return "MissingContext";
        case ErrorCode::NoCompleteDays: return "NoCompleteDays";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) {
        out += " (line " + std::to_string(*line) + ")";
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line), message_(message) {}

}  // namespace pumpdet
