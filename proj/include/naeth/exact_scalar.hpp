#pragma once

#include <gmpxx.h>

#include <string>

namespace naeth {

/// Exact real number of the form sign * sqrt(rational_square).
///
/// Clebsch-Gordan coefficients and related factorial expressions are all of
/// this form, so products and comparisons can be done without rounding.
class ExactScalar {
 public:
  ExactScalar() = default;
  /// `square` must be non-negative; it is canonicalized. A zero square forces
  /// sign 0 and vice versa.
  ExactScalar(int sign, mpq_class square);

  static ExactScalar zero() { return {}; }
  static ExactScalar one() { return ExactScalar(1, mpq_class(1)); }
  /// Exact value of a rational number r (sign(r) * sqrt(r^2)).
  static ExactScalar from_rational(const mpq_class& r);

  int sign() const { return sign_; }
  const mpq_class& rational_square() const { return square_; }
  bool is_zero() const { return sign_ == 0; }

  /// Rounds rational_square to the nearest double, then takes a correctly
  /// rounded square root.
  double to_double() const;

  std::string to_string() const;

  ExactScalar operator-() const { return ExactScalar(-sign_, square_); }
  ExactScalar operator*(const ExactScalar& o) const;

  bool operator==(const ExactScalar& o) const {
    return sign_ == o.sign_ && square_ == o.square_;
  }

 private:
  int sign_ = 0;
  mpq_class square_{0};
};

}  // namespace naeth
