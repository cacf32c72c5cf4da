#pragma once

#include <span>

namespace naeth {

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  int n = 0;
};

/// Requires at least two distinct x values. Standard errors are zero when
/// n == 2 (no residual degrees of freedom).
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace naeth
