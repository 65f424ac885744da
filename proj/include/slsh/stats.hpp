#pragma once

#include <cstdint>

namespace slsh {

struct Interval {
  double low;
  double high;
};

/// Exact two-sided Clopper-Pearson interval for a binomial proportion.
/// Endpoints are beta quantiles found by bisection on the incomplete beta.
[[nodiscard]] Interval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double confidence = 0.99);

/// sqrt(p (1 - p) / n), the standard deviation of a sample proportion.
[[nodiscard]] double binomial_sigma(double p, std::uint64_t trials);

/// Smallest x in [0, 1] with I_x(a, b) >= target.
[[nodiscard]] double beta_quantile(double target, double a, double b);

}  // namespace slsh
