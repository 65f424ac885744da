#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "slsh/core_math.hpp"
#include "slsh/hashing.hpp"
#include "slsh/rng.hpp"

namespace slsh {

/// Direction profiles for test vectors. two_coordinate is (C, C, 0, ..., 0),
/// the direction on which Rademacher projections vanish half of the time.
enum class VectorShape : std::uint8_t { axis, flat, two_coordinate };

[[nodiscard]] std::string_view to_string(VectorShape shape) noexcept;
[[nodiscard]] VectorShape parse_vector_shape(std::string_view text);

/// Vector of the given shape in dimension d with ||v||_p = norm.
[[nodiscard]] std::vector<double> shape_vector(VectorShape shape, std::size_t d, const LpExponent& p, double norm);

/// Monte Carlo estimate of P(|<w, x>| < alpha).
struct AntiConcEstimate {
  FamilyKind kind;
  LpExponent p;
  std::size_t d;
  std::vector<double> x;
  double alpha;
  std::uint64_t trials;
  std::uint64_t hits;
  double p_hat;
  double ci_low;
  double ci_high;
  std::optional<double> bound;  // none for families without a proven bound

  [[nodiscard]] bool vacuous() const noexcept { return !bound || *bound > 1.0; }
};

/// Proven small-ball bound: 2 sqrt(3) alpha / ||x||_2 for the cube,
/// alpha sqrt(d) / ||x||_2 for the sphere, none otherwise.
[[nodiscard]] std::optional<double> small_ball_bound(FamilyKind kind, std::size_t d, double alpha, double x_norm2);

/// Draws `trials` projection vectors (trial t seeded by derive_seed(seed, t))
/// and counts |<w, x>| < alpha. Throws on x = 0 or trials = 0.
[[nodiscard]] AntiConcEstimate estimate_small_ball(FamilyKind kind, const LpExponent& p, std::span<const double> x,
                                                   double alpha, std::uint64_t trials, std::uint64_t seed);

/// Same as estimate_small_ball for every alpha, reusing one pool of draws so
/// the estimates are monotone in alpha by construction.
[[nodiscard]] std::vector<AntiConcEstimate> estimate_small_ball_grid(FamilyKind kind, const LpExponent& p,
                                                                     std::span<const double> x,
                                                                     std::span<const double> alphas,
                                                                     std::uint64_t trials, std::uint64_t seed,
                                                                     std::optional<LpExponent> q = std::nullopt);

/// <w, x> for `trials` fresh draws of w; the raw sample behind the estimators.
[[nodiscard]] std::vector<double> sample_projections(FamilyKind kind, const LpExponent& q, std::span<const double> x,
                                                     std::uint64_t trials, std::uint64_t seed);

/// Empirical Levy concentration: the largest fraction of `sorted` inside a
/// closed window of length lambda.
[[nodiscard]] double levy_concentration(std::span<const double> sorted, double lambda);

/// lambda / sqrt(sum Var + lambda^2 / 12). Not clamped to 1.
[[nodiscard]] double theoretical_q_bound(std::span<const double> variances, double lambda);

/// Produces a pair (x, y) from a random stream.
using PairGenerator = std::function<std::pair<std::vector<double>, std::vector<double>>(Rng&)>;

/// Pairs with x - y of a fixed shape and l_p length, anchored at a random x.
struct FarPairGenerator {
  VectorShape shape;
  LpExponent p;
  std::size_t d;
  double distance;
  double spread = 10.0;  // x is uniform in [-spread, spread]^d

  std::pair<std::vector<double>, std::vector<double>> operator()(Rng& rng) const;
};

/// c threshold of an adjacency family; throws for the l_q family.
[[nodiscard]] double family_tau(FamilyKind kind, const LpExponent& p, std::size_t d);

/// Proven bound on P(|h(x) - h(y)| <= 1) for ||x - y||_p > c: tau / c for the
/// cube and sphere, 1 - (1 - tau/c)^2 / 2 for Rademacher.
[[nodiscard]] std::optional<double> false_positive_bound(FamilyKind kind, const LpExponent& p, std::size_t d,
                                                         double c);

struct FalsePositiveEstimate {
  FamilyKind kind;
  LpExponent p;
  std::size_t d;
  double c;
  std::uint64_t trials;
  std::uint64_t hits;             // |h(x) - h(y)| <= 1
  std::uint64_t dominating_hits;  // |scale <w, x - y>| <= 2
  double p_fp_hat;
  double dominating_hat;
  double ci_low;
  double ci_high;
  std::optional<double> bound;
  bool hypothesis_holds;  // c > tau for the family

  [[nodiscard]] bool vacuous() const noexcept { return !bound || *bound > 1.0 || !hypothesis_holds; }
};

/// Estimates the false-positive probability over fresh hash draws; trial t
/// uses derive_seed(seed, t) for both the hash and the pair.
[[nodiscard]] FalsePositiveEstimate estimate_false_positive_rate(FamilyKind kind, const LpExponent& p, std::size_t d,
                                                                 double c, std::uint64_t trials, std::uint64_t seed,
                                                                 const PairGenerator& pairs);

struct ConjectureRow {
  double epsilon;
  std::uint64_t trials;
  std::uint64_t hits;
  double p_hat;
  double ratio;  // p_hat / (epsilon sqrt(d)); 0 when epsilon = 0
};

/// Small-ball table for w from the l_q sphere (cone measure) against the flat
/// unit vector of the dual l_p sphere. Evidence only; never judged.
[[nodiscard]] std::vector<ConjectureRow> conjecture_probe(const LpExponent& q, std::size_t d,
                                                          std::span<const double> epsilons, std::uint64_t trials,
                                                          std::uint64_t seed);

}  // namespace slsh
