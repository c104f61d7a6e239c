#pragma once

#include <string>

namespace regseg {

// Locale-independent decimal rendering. digits == 0 gives the shortest string
// that round-trips to the same double; otherwise `digits` significant digits.
std::string format_real(double x, int digits = 0);

// Locale-independent parse of the whole token; throws ParseError on failure.
double parse_real(const std::string& token, std::size_t line = 0);

// Rounds x to `digits` significant digits (the value format_real would print).
double round_significant(double x, int digits);

}  // namespace regseg
