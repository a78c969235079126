#pragma once

// Internal text helpers shared by the file formats: shortest round-trip
// double formatting, fixed-decimal CSV fields and tolerant field parsing.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace copkit::detail {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// Fixed formatting with the given number of decimals; NaN becomes "nan".
std::string format_fixed(double value, int decimals);

// Strict full-string parses; throw ParseError (with `line` when > 0) on junk.
double parse_double(std::string_view text, int line = 0);
std::int64_t parse_int(std::string_view text, int line = 0);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

// FNV-1a, used for pipeline stage fingerprints.
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 1469598103934665603ull);

}  // namespace copkit::detail
