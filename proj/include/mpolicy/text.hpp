#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mpolicy::text {

/// Shortest decimal representation that parses back to the identical double.
std::string exact(double value);

/// Fixed-point rendering used by report CSVs.
std::string fixed(double value, int decimals = 6);

/// Strict full-string parse; throws ParseError naming `what` on failure.
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Whitespace-separated tokens.
std::vector<std::string> tokens(std::string_view line);

/// FNV-1a 64-bit digest rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace mpolicy::text
