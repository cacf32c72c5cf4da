#include "naeth/exact_scalar.hpp"

#include <mpfr.h>

#include "naeth/errors.hpp"

namespace naeth {

ExactScalar::ExactScalar(int sign, mpq_class square) : square_(std::move(square)) {
  square_.canonicalize();
  if (sgn(square_) < 0) throw InvalidArgument("ExactScalar: negative rational square");
  if (sgn(square_) == 0 || sign == 0) {
    sign_ = 0;
    square_ = 0;
  } else {
    sign_ = sign > 0 ? 1 : -1;
  }
}

ExactScalar ExactScalar::from_rational(const mpq_class& r) {
  return ExactScalar(sgn(r), r * r);
}

double ExactScalar::to_double() const {
  if (sign_ == 0) return 0.0;
  mpfr_t x;
  mpfr_init2(x, 53);
  mpfr_set_q(x, square_.get_mpq_t(), MPFR_RNDN);
  mpfr_sqrt(x, x, MPFR_RNDN);
  const double v = mpfr_get_d(x, MPFR_RNDN);
  mpfr_clear(x);
  return sign_ * v;
}

std::string ExactScalar::to_string() const {
  if (sign_ == 0) return "0";
  std::string out = sign_ < 0 ? "-" : "";
  if (square_ == 1) return out + "1";
  return out + "sqrt(" + square_.get_str() + ")";
}

ExactScalar ExactScalar::operator*(const ExactScalar& o) const {
  return ExactScalar(sign_ * o.sign_, square_ * o.square_);
}

}  // namespace naeth
