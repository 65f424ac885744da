#include "slsh/stats.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "slsh/error.hpp"
#include "slsh/special.hpp"

namespace slsh {

double beta_quantile(double target, double a, double b) {
  if (!(target >= 0.0 && target <= 1.0)) throw DomainError(fmt::format("beta quantile of {}", target));
  double lo = 0.0;
  double hi = 1.0;
  // 200 halvings reach the spacing of doubles near 0 as well as near 1.
  for (int i = 0; i < 200 && lo < hi; ++i) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid == lo || mid == hi) break;
    if (regularized_incomplete_beta(mid, a, b) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Interval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double confidence) {
  if (trials == 0) throw DomainError("confidence interval needs at least one trial");
  if (hits > trials) throw DomainError(fmt::format("{} hits out of {} trials", hits, trials));
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError(fmt::format("confidence {}", confidence));
  const double tail = (1.0 - confidence) / 2.0;
  const auto k = static_cast<double>(hits);
  const auto n = static_cast<double>(trials);
  Interval ci{0.0, 1.0};
  if (hits > 0) ci.low = beta_quantile(tail, k, n - k + 1.0);
  if (hits < trials) ci.high = beta_quantile(1.0 - tail, k + 1.0, n - k);
  // Bisection brackets can land one ulp on the wrong side of p_hat.
  const double p_hat = k / n;
  ci.low = std::min(ci.low, p_hat);
  ci.high = std::max(ci.high, p_hat);
  return ci;
}

double binomial_sigma(double p, std::uint64_t trials) {
  if (trials == 0) throw DomainError("binomial sigma needs at least one trial");
  const double q = std::clamp(p, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

}  // namespace slsh
