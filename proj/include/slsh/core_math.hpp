#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace slsh {

/// Exponent p of an l_p norm, p in [1, inf].
///
/// Integral and decimal inputs are held as an exact fraction so that the
/// conjugate pairs 1 <-> inf, 2 <-> 2, 4 <-> 4/3 survive round trips without
/// drift. Anything else is held as a double. All derived exponent arithmetic
/// (1/p, 1 - 1/p, ...) happens in double precision.
class LpExponent {
 public:
  enum class Repr : std::uint8_t { rational = 0, real = 1, infinite = 2 };

  // Implicit so that `lp_norm(x, 2)` reads naturally.
  LpExponent(double p);  // NOLINT(google-explicit-constructor)

  static LpExponent infinity() noexcept;
  static LpExponent rational(std::int64_t num, std::int64_t den);

  /// Accepts "inf", integers, decimals ("1.5") and fractions ("4/3").
  static LpExponent parse(std::string_view text);

  [[nodiscard]] bool is_infinite() const noexcept { return repr_ == Repr::infinite; }
  [[nodiscard]] Repr repr() const noexcept { return repr_; }
  [[nodiscard]] std::int64_t numerator() const noexcept { return num_; }
  [[nodiscard]] std::int64_t denominator() const noexcept { return den_; }

  /// p as a double; +inf for the infinite exponent.
  [[nodiscard]] double value() const noexcept;
  /// 1/p; 0 for the infinite exponent.
  [[nodiscard]] double reciprocal() const noexcept;
  /// The conjugate q with 1/p + 1/q = 1.
  [[nodiscard]] LpExponent dual() const;

  /// "inf", or the shortest decimal that parses back to value().
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const LpExponent& a, const LpExponent& b) noexcept;

 private:
  LpExponent() = default;

  Repr repr_ = Repr::rational;
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
  double real_ = 1.0;
};

[[nodiscard]] LpExponent dual_exponent(const LpExponent& p);

/// (sum |x_i|^p)^(1/p), or max |x_i| for p = inf.
[[nodiscard]] double lp_norm(std::span<const double> x, const LpExponent& p);

/// ||x - y||_p without materialising the difference.
[[nodiscard]] double lp_distance(std::span<const double> x, std::span<const double> y,
                                 const LpExponent& p);

/// d^{min(1/2 - 1/s, 0)}, the factor sandwiching ||.||_2 between l_s norms.
[[nodiscard]] double delta(const LpExponent& s, std::size_t d);

/// 4 sqrt(3) d^{max(1 - 1/p, 1/2)}: threshold on c for the uniform-cube family.
[[nodiscard]] double tau_hat(const LpExponent& p, std::size_t d);

/// 2 d^{1/2 + |1/2 - 1/p|}: threshold on c for the unit-sphere family.
[[nodiscard]] double tau_tilde(const LpExponent& p, std::size_t d);

/// sqrt(8) max{d^{1/2}, d^{1 - 1/p}}: threshold on c for the Rademacher family.
[[nodiscard]] double tau_rademacher(const LpExponent& p, std::size_t d);

/// Every constant entering the bounds for a fixed (d, p).
struct BoundConstants {
  std::size_t d;
  LpExponent p;
  double delta_p;
  double delta_q;
  double tau_hat;
  double tau_tilde;
  double scale_hat;    // d^{1/p - 1}
  double scale_tilde;  // delta_q

  static BoundConstants compute(std::size_t d, const LpExponent& p);
};

struct NormSandwich {
  bool holds;
  double lower;   // delta_p ||z||_p
  double middle;  // ||z||_2
  double upper;   // ||z||_p / delta_q
};

/// Evaluates delta_p ||z||_p <= ||z||_2 <= ||z||_p / delta_q with a relative
/// slack on each comparison. Throws DomainError for z = 0.
[[nodiscard]] NormSandwich norm_sandwich_holds(std::span<const double> z, const LpExponent& p,
                                               double slack = 1e-12);

}  // namespace slsh
