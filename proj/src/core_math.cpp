#include "slsh/core_math.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "slsh/error.hpp"

namespace slsh {

namespace {

// Largest denominator tried when recognising a double as a fraction.
constexpr std::int64_t kMaxSnapDenominator = 4096;
constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53

template <typename Coord>
double lp_norm_impl(std::size_t d, Coord coord, const LpExponent& p) {
  if (p.is_infinite()) {
    double m = 0.0;
    for (std::size_t i = 0; i < d; ++i) m = std::max(m, std::abs(coord(i)));
    return m;
  }
  if (p == LpExponent(1)) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += std::abs(coord(i));
    return s;
  }
  if (p == LpExponent(2)) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = coord(i);
      s += v * v;
    }
    return std::sqrt(s);
  }
  // Scale by the max coordinate so large exponents neither overflow nor underflow.
  double m = 0.0;
  for (std::size_t i = 0; i < d; ++i) m = std::max(m, std::abs(coord(i)));
  if (m == 0.0) return 0.0;
  const double pv = p.value();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += std::pow(std::abs(coord(i)) / m, pv);
  return m * std::pow(s, p.reciprocal());
}

void require_dimension(std::size_t d) {
  if (d == 0) throw DimensionError("dimension must be at least 1");
}

}  // namespace

LpExponent::LpExponent(double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError(fmt::format("l_p exponent must be >= 1, got {}", p));
  if (std::isinf(p)) {
    repr_ = Repr::infinite;
    real_ = std::numeric_limits<double>::infinity();
    return;
  }
  if (p < kExactIntegerLimit && std::floor(p) == p) {
    num_ = static_cast<std::int64_t>(p);
    den_ = 1;
    real_ = p;
    return;
  }
  if (p < 1e12) {
    for (std::int64_t den = 2; den <= kMaxSnapDenominator; ++den) {
      const double num = std::round(p * static_cast<double>(den));
      if (num / static_cast<double>(den) == p) {
        *this = rational(static_cast<std::int64_t>(num), den);
        return;
      }
    }
  }
  repr_ = Repr::real;
  real_ = p;
}

LpExponent LpExponent::infinity() noexcept {
  LpExponent e;
  e.repr_ = Repr::infinite;
  e.real_ = std::numeric_limits<double>::infinity();
  return e;
}

LpExponent LpExponent::rational(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < den) throw DomainError(fmt::format("l_p exponent {}/{} is not >= 1", num, den));
  const std::int64_t g = std::gcd(num, den);
  LpExponent e;
  e.repr_ = Repr::rational;
  e.num_ = num / g;
  e.den_ = den / g;
  e.real_ = static_cast<double>(e.num_) / static_cast<double>(e.den_);
  return e;
}

LpExponent LpExponent::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "INF") return infinity();
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t num = 0;
    std::int64_t den = 0;
    const auto a = std::from_chars(text.data(), text.data() + slash, num);
    const auto b = std::from_chars(text.data() + slash + 1, text.data() + text.size(), den);
    if (a.ec != std::errc{} || a.ptr != text.data() + slash || b.ec != std::errc{} ||
        b.ptr != text.data() + text.size()) {
      throw DomainError(fmt::format("cannot parse l_p exponent '{}'", text));
    }
    return rational(num, den);
  }
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
    throw DomainError(fmt::format("cannot parse l_p exponent '{}'", text));
  }
  return LpExponent(v);
}

double LpExponent::value() const noexcept { return real_; }

double LpExponent::reciprocal() const noexcept {
  switch (repr_) {
    case Repr::infinite:
      return 0.0;
    case Repr::rational:
      return static_cast<double>(den_) / static_cast<double>(num_);
    case Repr::real:
      break;
  }
  return 1.0 / real_;
}

LpExponent LpExponent::dual() const {
  switch (repr_) {
    case Repr::infinite:
      return LpExponent(1);
    case Repr::rational:
      if (num_ == den_) return infinity();
      return rational(num_, num_ - den_);
    case Repr::real:
      break;
  }
  return LpExponent(real_ / (real_ - 1.0));
}

std::string LpExponent::to_string() const {
  if (repr_ == Repr::infinite) return "inf";
  if (repr_ == Repr::rational && den_ == 1) return fmt::format("{}", num_);
  return fmt::format("{}", real_);
}

bool operator==(const LpExponent& a, const LpExponent& b) noexcept {
  if (a.repr_ != b.repr_) return false;
  switch (a.repr_) {
    case LpExponent::Repr::infinite:
      return true;
    case LpExponent::Repr::rational:
      return a.num_ == b.num_ && a.den_ == b.den_;
    case LpExponent::Repr::real:
      break;
  }
  return a.real_ == b.real_;
}

LpExponent dual_exponent(const LpExponent& p) { return p.dual(); }

double lp_norm(std::span<const double> x, const LpExponent& p) {
  require_dimension(x.size());
  return lp_norm_impl(x.size(), [&](std::size_t i) { return x[i]; }, p);
}

double lp_distance(std::span<const double> x, std::span<const double> y, const LpExponent& p) {
  require_dimension(x.size());
  if (x.size() != y.size()) {
    throw DimensionError(fmt::format("dimension mismatch: {} vs {}", x.size(), y.size()));
  }
  return lp_norm_impl(x.size(), [&](std::size_t i) { return x[i] - y[i]; }, p);
}

double delta(const LpExponent& s, std::size_t d) {
  require_dimension(d);
  const double e = std::min(0.5 - s.reciprocal(), 0.0);
  return std::pow(static_cast<double>(d), e);
}

double tau_hat(const LpExponent& p, std::size_t d) {
  require_dimension(d);
  return 4.0 * std::sqrt(3.0) * std::pow(static_cast<double>(d), std::max(1.0 - p.reciprocal(), 0.5));
}

double tau_tilde(const LpExponent& p, std::size_t d) {
  require_dimension(d);
  return 2.0 * std::pow(static_cast<double>(d), 0.5 + std::abs(0.5 - p.reciprocal()));
}

double tau_rademacher(const LpExponent& p, std::size_t d) {
  require_dimension(d);
  const double dd = static_cast<double>(d);
  return std::sqrt(8.0) * std::max(std::sqrt(dd), std::pow(dd, 1.0 - p.reciprocal()));
}

BoundConstants BoundConstants::compute(std::size_t d, const LpExponent& p) {
  require_dimension(d);
  const LpExponent q = p.dual();
  const double dq = delta(q, d);
  return BoundConstants{
      .d = d,
      .p = p,
      .delta_p = delta(p, d),
      .delta_q = dq,
      .tau_hat = slsh::tau_hat(p, d),
      .tau_tilde = slsh::tau_tilde(p, d),
      .scale_hat = std::pow(static_cast<double>(d), p.reciprocal() - 1.0),
      .scale_tilde = dq,
  };
}

NormSandwich norm_sandwich_holds(std::span<const double> z, const LpExponent& p, double slack) {
  const double zp = lp_norm(z, p);
  if (zp == 0.0) throw DomainError("norm sandwich is undefined for the zero vector");
  const std::size_t d = z.size();
  NormSandwich s{};
  s.lower = delta(p, d) * zp;
  s.middle = lp_norm(z, 2);
  s.upper = zp / delta(p.dual(), d);
  s.holds = s.lower <= s.middle * (1.0 + slack) && s.middle <= s.upper * (1.0 + slack);
  return s;
}

}  // namespace slsh
