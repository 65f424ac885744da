#include "slsh/special.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "slsh/error.hpp"

namespace slsh {

namespace {

// std::lgamma writes the global signgam on glibc; the reentrant variant keeps
// these functions safe to call from parallel regions.
double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw DomainError(fmt::format("incomplete beta did not converge for x={} a={} b={}", x, a, b));
}

}  // namespace

double beta_function(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError(fmt::format("beta({}, {}) needs positive arguments", a, b));
  return std::exp(log_beta(a, b));
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError(fmt::format("incomplete beta: x={} outside [0, 1]", x));
  if (!(a > 0.0) || !(b > 0.0) || std::isinf(a) || std::isinf(b)) {
    throw DomainError(fmt::format("incomplete beta: a={} b={} must be positive and finite", a, b));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double cap_probability(double alpha, std::size_t d) {
  if (d < 2) throw DomainError(fmt::format("cap probability needs d >= 2, got {}", d));
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError(fmt::format("cap probability: alpha={} outside [0, 1]", alpha));
  return regularized_incomplete_beta(alpha * alpha, 0.5, (static_cast<double>(d) - 1.0) / 2.0);
}

double sphere_beta_factor(std::size_t d) {
  if (d < 2) throw DomainError(fmt::format("beta lower bound needs d >= 2, got {}", d));
  const double dd = static_cast<double>(d);
  return std::exp(log_beta(0.5, (dd - 1.0) / 2.0)) * std::sqrt(dd) / 2.0;
}

double beta_lower_bound_margin(std::size_t d) {
  const double dd = static_cast<double>(d);
  const double scaled_beta = sphere_beta_factor(d);
  const double g = std::pow((dd - 1.0) / dd, (dd - 3.0) / 2.0);
  return scaled_beta - g;
}

}  // namespace slsh
