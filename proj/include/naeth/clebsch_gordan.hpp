#pragma once

#include <string>
#include <utility>

#include "naeth/exact_scalar.hpp"
#include "naeth/half_integer.hpp"

namespace naeth {

/// Arguments of <s, m | s', m'; k, q>: the coefficient coupling spin s' and
/// rank k into total spin s. Condon-Shortley phase convention.
struct CGKey {
  HalfInteger s, m;
  HalfInteger s_prime, m_prime;
  HalfInteger k, q;

  /// Throws InvalidArgument unless every (magnitude, projection) pair is
  /// well formed.
  void validate() const;
  std::string to_string() const;
};

/// Exact Clebsch-Gordan coefficient via the Racah single-sum formula with
/// arbitrary-precision factorials. Exact zero whenever a selection rule fails.
ExactScalar cg_exact(const CGKey& key);

/// Convenience overload returning the coefficient as a double.
double cg_value(HalfInteger s, HalfInteger m, HalfInteger s_prime,
                HalfInteger m_prime, HalfInteger k, HalfInteger q);

struct AsymptoticCG {
  double value = 0.0;
  /// (s - m) / s, the size of the neglected correction.
  double relative_error_estimate = 0.0;
  /// Set when s - m > s / 2, i.e. outside the regime s - m << s.
  bool regime_warning = false;
};

/// Leading large-s approximation of <s, m+q | s, m; k, q>, keeping only the
/// dominant term of the Racah sum.
AsymptoticCG cg_asymptotic(HalfInteger s, HalfInteger m, HalfInteger k,
                           HalfInteger q);

/// Returns (<s, m+1 | s, m; k, 1>, <s, -m | s, -m-1; k, 1>). The first equals
/// (-1)^(k+1) times the second; throws std::logic_error if that ever fails.
std::pair<ExactScalar, ExactScalar> cg_symmetry(HalfInteger s, HalfInteger m,
                                                HalfInteger k);

/// Full matrix element <alpha, m | T^(k)_q | alpha', m'> from the reduced one.
double wigner_eckart_assemble(double reduced, const CGKey& key);

}  // namespace naeth
