#include "slsh/hashing.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "slsh/error.hpp"

namespace slsh {

namespace {

constexpr std::size_t kPairwiseThreshold = 4096;
constexpr std::size_t kPairwiseBlock = 128;

double pairwise_dot(const double* a, const double* b, std::size_t n) noexcept {
  if (n <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_dot(a, b, half) + pairwise_dot(a + half, b + half, n - half);
}

void normalise(std::span<double> v, double norm) {
  for (auto& x : v) x /= norm;
}

}  // namespace

void write_exponent(binary::Writer& out, const LpExponent& p) {
  out.u8(static_cast<std::uint8_t>(p.repr()));
  switch (p.repr()) {
    case LpExponent::Repr::rational:
      out.f64(static_cast<double>(p.numerator()));
      out.f64(static_cast<double>(p.denominator()));
      break;
    case LpExponent::Repr::real:
      out.f64(p.value());
      out.f64(0.0);
      break;
    case LpExponent::Repr::infinite:
      out.f64(0.0);
      out.f64(0.0);
      break;
  }
}

LpExponent read_exponent(binary::Reader& in) {
  const auto tag = in.u8();
  const double a = in.f64();
  const double b = in.f64();
  switch (static_cast<LpExponent::Repr>(tag)) {
    case LpExponent::Repr::rational:
      return LpExponent::rational(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b));
    case LpExponent::Repr::real:
      return LpExponent(a);
    case LpExponent::Repr::infinite:
      return LpExponent::infinity();
  }
  throw FormatError(fmt::format("unknown exponent tag {}", tag));
}

std::string_view to_string(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::rademacher:
      return "rademacher";
    case FamilyKind::uniform_cube:
      return "uniform_cube";
    case FamilyKind::unit_sphere:
      return "unit_sphere";
    case FamilyKind::lq_sphere_experimental:
      return "lq_sphere_experimental";
  }
  return "unknown";
}

FamilyKind parse_family_kind(std::string_view text) {
  for (auto k : {FamilyKind::rademacher, FamilyKind::uniform_cube, FamilyKind::unit_sphere,
                 FamilyKind::lq_sphere_experimental}) {
    if (text == to_string(k)) return k;
  }
  throw DomainError(fmt::format("unknown hash family '{}'", text));
}

double family_scale(FamilyKind kind, const LpExponent& p, std::size_t d) {
  if (d == 0) throw DimensionError("dimension must be at least 1");
  switch (kind) {
    case FamilyKind::rademacher:
    case FamilyKind::uniform_cube:
      return std::pow(static_cast<double>(d), p.reciprocal() - 1.0);
    case FamilyKind::unit_sphere:
      return delta(p.dual(), d);
    case FamilyKind::lq_sphere_experimental:
      return 1.0;
  }
  throw DomainError("unknown hash family");
}

void draw_projection(FamilyKind kind, const LpExponent& q, Rng& rng, std::span<double> out) {
  switch (kind) {
    case FamilyKind::rademacher:
      for (auto& x : out) x = rng.coin() ? 1.0 : -1.0;
      return;
    case FamilyKind::uniform_cube:
      for (auto& x : out) x = 2.0 * rng.uniform01() - 1.0;
      return;
    case FamilyKind::unit_sphere:
      for (;;) {
        rng.fill_normal(out);
        const double n = lp_norm(out, 2);
        if (n > 0.0) {
          normalise(out, n);
          return;
        }
      }
    case FamilyKind::lq_sphere_experimental:
      for (;;) {
        if (q.is_infinite()) {
          // exp(-|t|^q) tends to the uniform density on [-1, 1].
          for (auto& x : out) x = 2.0 * rng.uniform01() - 1.0;
        } else {
          const double shape = q.reciprocal();
          for (auto& x : out) {
            const double g = std::pow(rng.gamma(shape), shape);
            x = rng.coin() ? g : -g;
          }
        }
        const double n = lp_norm(out, q);
        if (n > 0.0) {
          normalise(out, n);
          return;
        }
      }
  }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = std::min(a.size(), b.size());
  if (n > kPairwiseThreshold) return pairwise_dot(a.data(), b.data(), n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

HashFunction HashFunction::sample(FamilyKind kind, const LpExponent& p, std::size_t d, std::uint64_t seed,
                                  std::optional<LpExponent> q) {
  if (d == 0) throw DimensionError("cannot sample a hash function in dimension 0");
  const LpExponent sphere_q = kind == FamilyKind::lq_sphere_experimental ? q.value_or(p.dual()) : LpExponent(2);
  std::vector<double> w(d);
  Rng rng(seed);
  draw_projection(kind, sphere_q, rng, w);
  return HashFunction(kind, p, sphere_q, std::move(w), family_scale(kind, p, d), seed);
}

HashFunction HashFunction::from_vector(FamilyKind kind, const LpExponent& p, std::vector<double> w,
                                       std::uint64_t seed, std::optional<LpExponent> q) {
  if (w.empty()) throw DimensionError("hash vector must be nonempty");
  const LpExponent sphere_q = kind == FamilyKind::lq_sphere_experimental ? q.value_or(p.dual()) : LpExponent(2);
  const double scale = family_scale(kind, p, w.size());
  return HashFunction(kind, p, sphere_q, std::move(w), scale, seed);
}

double HashFunction::project(std::span<const double> x) const {
  if (x.size() != w_.size()) {
    throw DimensionError(fmt::format("hash of dimension {} applied to point of dimension {}", w_.size(), x.size()));
  }
  return scale_ * dot(w_, x);
}

std::int64_t HashFunction::operator()(std::span<const double> x) const {
  return static_cast<std::int64_t>(std::floor(project(x)));
}

void HashFunction::write(binary::Writer& out) const {
  out.u8(static_cast<std::uint8_t>(kind_));
  write_exponent(out, p_);
  write_exponent(out, q_);
  out.u64(w_.size());
  out.u64(seed_);
  out.f64(scale_);
  for (double x : w_) out.f64(x);
}

HashFunction HashFunction::read(binary::Reader& in) {
  const auto tag = in.u8();
  if (tag > static_cast<std::uint8_t>(FamilyKind::lq_sphere_experimental)) {
    throw FormatError(fmt::format("unknown hash family tag {}", tag));
  }
  const auto kind = static_cast<FamilyKind>(tag);
  const LpExponent p = read_exponent(in);
  const LpExponent q = read_exponent(in);
  const std::uint64_t d = in.u64();
  if (d == 0 || d > in.remaining() / 8) throw FormatError("hash function record has an invalid dimension");
  const std::uint64_t seed = in.u64();
  const double scale = in.f64();
  std::vector<double> w(d);
  for (auto& x : w) x = in.f64();
  return HashFunction(kind, p, q, std::move(w), scale, seed);
}

bool adjacency_certificate(const HashFunction& h, std::span<const double> x, std::span<const double> y) {
  if (!has_adjacency_guarantee(h.kind())) {
    throw ContractInapplicable(fmt::format("family {} carries no adjacency guarantee", to_string(h.kind())));
  }
  const double dist = lp_distance(x, y, h.p());
  if (dist > 1.0) {
    throw ContractInapplicable(fmt::format("points are {} apart in l_{}; the guarantee needs <= 1", dist,
                                           h.p().to_string()));
  }
  const std::int64_t diff = h(x) - h(y);
  return diff >= -1 && diff <= 1;
}

}  // namespace slsh
