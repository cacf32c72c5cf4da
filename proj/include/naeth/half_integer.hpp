#pragma once

#include <compare>
#include <cstdlib>
#include <string>
#include <string_view>

namespace naeth {

/// Angular-momentum quantum number j in {..., -1, -1/2, 0, 1/2, 1, ...},
/// stored as the integer 2j so that arithmetic stays exact.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;

  static constexpr HalfInteger from_twice(int twice) { return HalfInteger(twice); }
  static constexpr HalfInteger from_int(int value) { return HalfInteger(2 * value); }

  /// Accepts "3", "-2", "5/2", "-1/2" and decimal forms "2.5".
  static HalfInteger parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  std::string to_string() const;

  constexpr HalfInteger operator-() const { return HalfInteger(-twice_); }
  constexpr HalfInteger operator+(HalfInteger o) const { return HalfInteger(twice_ + o.twice_); }
  constexpr HalfInteger operator-(HalfInteger o) const { return HalfInteger(twice_ - o.twice_); }
  constexpr HalfInteger abs() const { return HalfInteger(twice_ < 0 ? -twice_ : twice_); }

  constexpr auto operator<=>(const HalfInteger&) const = default;

 private:
  constexpr explicit HalfInteger(int twice) : twice_(twice) {}
  int twice_ = 0;
};

/// True when (s, m) is a valid magnitude/projection pair: s >= 0, |m| <= s,
/// and s - m integral.
constexpr bool valid_projection(HalfInteger s, HalfInteger m) {
  return s.twice() >= 0 && std::abs(m.twice()) <= s.twice() &&
         (s.twice() - m.twice()) % 2 == 0;
}

}  // namespace naeth
