#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pumpdet::csv {

// RFC4180-style split of one record: double quotes delimit fields that may
// contain commas, "" inside a quoted field is a literal quote. A trailing
// '\r' is ignored. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split(std::string_view line);

// Quotes a field only when it needs it.
std::string escape(std::string_view field);

// Strict decimal parse: whole string must be consumed, surrounding blanks
// are tolerated.
std::optional<double> parse_double(std::string_view text);

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

std::string trim(std::string_view text);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace pumpdet::csv
