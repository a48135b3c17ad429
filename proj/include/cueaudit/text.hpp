#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cueaudit {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);

/// Shortest round-trip decimal representation (never scientific).
std::string format_number(double v);

/// Lowercase hex of a 64-bit value, zero padded.
std::string hex64(unsigned long long v);

/// Minimal RFC 4180 CSV support.
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace cueaudit
