#include "naeth/half_integer.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "naeth/errors.hpp"

namespace naeth {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw InvalidArgument("not a half-integer: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

HalfInteger HalfInteger::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const int num = parse_int(text.substr(0, slash), text);
    const int den = parse_int(text.substr(slash + 1), text);
    if (den == 1) return from_twice(2 * num);
    if (den == 2) return from_twice(num);
    throw InvalidArgument("half-integer denominator must be 1 or 2: '" + std::string(text) + "'");
  }
  if (text.find('.') != std::string_view::npos) {
    const double v = std::stod(std::string(text));
    const double twice = 2.0 * v;
    if (std::abs(twice - std::round(twice)) > 1e-12) {
      throw InvalidArgument("not a half-integer: '" + std::string(text) + "'");
    }
    return from_twice(static_cast<int>(std::lround(twice)));
  }
  return from_int(parse_int(text, text));
}

std::string HalfInteger::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

}  // namespace naeth
