#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "slsh/binary_io.hpp"
#include "slsh/core_math.hpp"
#include "slsh/rng.hpp"

namespace slsh {

/// Distribution of the projection vector w.
enum class FamilyKind : std::uint8_t {
  rademacher = 0,              // w_i uniform in {-1, +1}, scale d^{1/p - 1}
  uniform_cube = 1,            // w_i ~ U(-1, 1), scale d^{1/p - 1}
  unit_sphere = 2,             // w uniform on S^{d-1}, scale delta_q
  lq_sphere_experimental = 3,  // w from the cone measure on the l_q sphere, scale 1
};

[[nodiscard]] std::string_view to_string(FamilyKind kind) noexcept;
[[nodiscard]] FamilyKind parse_family_kind(std::string_view text);

/// True for the families whose close points always land in adjacent buckets.
[[nodiscard]] constexpr bool has_adjacency_guarantee(FamilyKind kind) noexcept {
  return kind != FamilyKind::lq_sphere_experimental;
}

/// Multiplier applied to <w, x> before flooring.
[[nodiscard]] double family_scale(FamilyKind kind, const LpExponent& p, std::size_t d);

/// Draws one projection vector into `out` using `rng`. `q` is only read for
/// the l_q-sphere family. Shared by HashFunction::sample and the Monte Carlo
/// estimators so both see the same distribution for the same seed.
void draw_projection(FamilyKind kind, const LpExponent& q, Rng& rng, std::span<double> out);

/// Exponent record: representation tag followed by two little-endian doubles
/// (numerator and denominator, the value and 0, or two zeros for infinity).
void write_exponent(binary::Writer& out, const LpExponent& p);
[[nodiscard]] LpExponent read_exponent(binary::Reader& in);

/// <a, b>; pairwise summation once the dimension exceeds 4096.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// h(x) = floor(scale * <w, x>). Immutable after construction.
class HashFunction {
 public:
  /// Samples w from the family. For lq_sphere_experimental, `q` defaults to
  /// the dual exponent of p. The same arguments always give the same w.
  static HashFunction sample(FamilyKind kind, const LpExponent& p, std::size_t d, std::uint64_t seed,
                             std::optional<LpExponent> q = std::nullopt);

  /// Builds a hash function around an explicit vector (tests, fixtures).
  static HashFunction from_vector(FamilyKind kind, const LpExponent& p, std::vector<double> w,
                                  std::uint64_t seed = 0, std::optional<LpExponent> q = std::nullopt);

  /// scale * <w, x>, before flooring.
  [[nodiscard]] double project(std::span<const double> x) const;
  [[nodiscard]] std::int64_t operator()(std::span<const double> x) const;

  [[nodiscard]] FamilyKind kind() const noexcept { return kind_; }
  [[nodiscard]] const LpExponent& p() const noexcept { return p_; }
  [[nodiscard]] const LpExponent& q() const noexcept { return q_; }
  [[nodiscard]] std::size_t dim() const noexcept { return w_.size(); }
  [[nodiscard]] std::span<const double> w() const noexcept { return w_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// Self-describing binary record: kind, p, q, d, seed, scale, w.
  void write(binary::Writer& out) const;
  static HashFunction read(binary::Reader& in);

  friend bool operator==(const HashFunction&, const HashFunction&) = default;

 private:
  HashFunction(FamilyKind kind, LpExponent p, LpExponent q, std::vector<double> w, double scale,
               std::uint64_t seed)
      : kind_(kind), p_(p), q_(q), w_(std::move(w)), scale_(scale), seed_(seed) {}

  FamilyKind kind_;
  LpExponent p_;
  LpExponent q_;  // exponent of the sphere w lives on (2 except for the l_q family)
  std::vector<double> w_;
  double scale_;
  std::uint64_t seed_;
};

[[nodiscard]] inline std::int64_t hash_eval(const HashFunction& h, std::span<const double> x) { return h(x); }

/// |h(x) - h(y)| <= 1, which must hold for every sampled h of an adjacency
/// family whenever ||x - y||_p <= 1. Throws ContractInapplicable when the
/// points are farther apart or the family carries no guarantee.
[[nodiscard]] bool adjacency_certificate(const HashFunction& h, std::span<const double> x,
                                         std::span<const double> y);

}  // namespace slsh
