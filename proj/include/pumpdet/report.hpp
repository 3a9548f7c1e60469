#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpdet/evaluate.hpp"

namespace pumpdet {

enum class ReportFormat { Markdown, Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view text);
/// "md", "csv", "json".
std::string_view file_extension(ReportFormat format);

/// Markdown groups rows by rule with one table per rule:
///   | Thresholds | Vol Ano. | Price Ano. | Combined Ano. | True Pos. | Missed | ...
/// followed by FP events, precision, recall and F1 (4 decimals). CSV and
/// JSON carry every EvalReport field. Output is byte-stable.
std::string render_report(std::span<const EvalReport> reports, ReportFormat format);

/// Inverse of the JSON rendering. Throws DecodeError.
std::vector<EvalReport> parse_report_json(const std::string& text);

}  // namespace pumpdet
