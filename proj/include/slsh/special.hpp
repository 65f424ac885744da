#pragma once

#include <cstddef>

namespace slsh {

/// Complete beta function B(a, b) for a, b > 0.
[[nodiscard]] double beta_function(double a, double b);

/// Regularized incomplete beta I_x(a, b).
///
/// Evaluated with the modified Lentz continued fraction, switching to
/// 1 - I_{1-x}(b, a) when x > (a + 1) / (a + b + 2). Absolute accuracy is
/// around 1e-14 for moderate parameters and stays below 1e-12 for a, b up to
/// a few thousand. Throws DomainError outside x in [0, 1], a > 0, b > 0.
[[nodiscard]] double regularized_incomplete_beta(double x, double a, double b);

/// P(|<w, e_1>| < alpha) for w uniform on the unit sphere S^{d-1}, d >= 2.
/// Equals I_{alpha^2}(1/2, (d - 1)/2).
[[nodiscard]] double cap_probability(double alpha, std::size_t d);

/// B(1/2, (d-1)/2) sqrt(d) / 2. At least 1 for every d >= 3.
[[nodiscard]] double sphere_beta_factor(std::size_t d);

/// sphere_beta_factor(d) - ((d-1)/d)^{(d-3)/2}.
///
/// Nonnegative for every d >= 2; this is the beta-function lower bound that
/// turns the concave cap estimate into alpha sqrt(d).
[[nodiscard]] double beta_lower_bound_margin(std::size_t d);

}  // namespace slsh
