#include "regseg/format.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "regseg/error.hpp"

namespace regseg {

std::string format_real(double x, int digits) {
  char buf[64];
  std::to_chars_result res;
  if (digits <= 0) {
    res = std::to_chars(buf, buf + sizeof buf, x);
  } else {
    res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  }
  if (res.ec != std::errc{}) throw InternalError("float formatting failed");
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& token, std::size_t line) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  if (first < last && *first == '+') ++first;
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (first == last || res.ec != std::errc{} || res.ptr != last) {
    throw ParseError("cannot parse '" + token + "' as a number", line);
  }
  return value;
}

double round_significant(double x, int digits) {
  if (!std::isfinite(x)) return x;
  return parse_real(format_real(x, digits));
}

}  // namespace regseg
