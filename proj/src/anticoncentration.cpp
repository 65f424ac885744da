#include "slsh/anticoncentration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "slsh/error.hpp"
#include "slsh/stats.hpp"

namespace slsh {

namespace {

constexpr double kConfidence = 0.99;

LpExponent sphere_exponent(FamilyKind kind, const LpExponent& p, std::optional<LpExponent> q) {
  return kind == FamilyKind::lq_sphere_experimental ? q.value_or(p.dual()) : LpExponent(2);
}

void require_trials(std::uint64_t trials) {
  if (trials == 0) throw DomainError("at least one trial is required");
}

}  // namespace

std::string_view to_string(VectorShape shape) noexcept {
  switch (shape) {
    case VectorShape::axis:
      return "axis";
    case VectorShape::flat:
      return "flat";
    case VectorShape::two_coordinate:
      return "two_coordinate";
  }
  return "unknown";
}

VectorShape parse_vector_shape(std::string_view text) {
  for (auto s : {VectorShape::axis, VectorShape::flat, VectorShape::two_coordinate}) {
    if (text == to_string(s)) return s;
  }
  throw DomainError(fmt::format("unknown vector shape '{}'", text));
}

std::vector<double> shape_vector(VectorShape shape, std::size_t d, const LpExponent& p, double norm) {
  if (d == 0) throw DimensionError("dimension must be at least 1");
  if (!(norm >= 0.0)) throw DomainError(fmt::format("vector norm {} must be nonnegative", norm));
  std::vector<double> v(d, 0.0);
  std::size_t support = 1;
  if (shape == VectorShape::flat) support = d;
  if (shape == VectorShape::two_coordinate) support = std::min<std::size_t>(2, d);
  // ||(t, ..., t, 0, ...)||_p = t k^{1/p} for k nonzero entries.
  const double t = norm / std::pow(static_cast<double>(support), p.reciprocal());
  std::fill_n(v.begin(), support, t);
  return v;
}

std::optional<double> small_ball_bound(FamilyKind kind, std::size_t d, double alpha, double x_norm2) {
  switch (kind) {
    case FamilyKind::uniform_cube:
      return 2.0 * std::sqrt(3.0) * alpha / x_norm2;
    case FamilyKind::unit_sphere:
      return alpha * std::sqrt(static_cast<double>(d)) / x_norm2;
    case FamilyKind::rademacher:
    case FamilyKind::lq_sphere_experimental:
      break;
  }
  return std::nullopt;
}

std::vector<double> sample_projections(FamilyKind kind, const LpExponent& q, std::span<const double> x,
                                       std::uint64_t trials, std::uint64_t seed) {
  if (x.empty()) throw DimensionError("dimension must be at least 1");
  std::vector<double> out(trials);
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel
  {
    std::vector<double> w(x.size());
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      Rng rng(seed, static_cast<std::uint64_t>(t));
      draw_projection(kind, q, rng, w);
      out[static_cast<std::size_t>(t)] = dot(w, x);
    }
  }
  return out;
}

AntiConcEstimate estimate_small_ball(FamilyKind kind, const LpExponent& p, std::span<const double> x, double alpha,
                                     std::uint64_t trials, std::uint64_t seed) {
  const double alphas[] = {alpha};
  return estimate_small_ball_grid(kind, p, x, alphas, trials, seed).front();
}

std::vector<AntiConcEstimate> estimate_small_ball_grid(FamilyKind kind, const LpExponent& p,
                                                       std::span<const double> x, std::span<const double> alphas,
                                                       std::uint64_t trials, std::uint64_t seed,
                                                       std::optional<LpExponent> q) {
  require_trials(trials);
  const double norm2 = lp_norm(x, 2);
  if (norm2 == 0.0) throw DomainError("small-ball probability is undefined for x = 0");
  for (double a : alphas) {
    if (!(a >= 0.0)) throw DomainError(fmt::format("alpha {} must be nonnegative", a));
  }

  auto proj = sample_projections(kind, sphere_exponent(kind, p, q), x, trials, seed);
  for (auto& v : proj) v = std::abs(v);
  std::sort(proj.begin(), proj.end());

  std::vector<AntiConcEstimate> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    // Strict inequality: count |<w, x>| < alpha.
    const auto hits = static_cast<std::uint64_t>(std::lower_bound(proj.begin(), proj.end(), alpha) - proj.begin());
    const auto ci = clopper_pearson(hits, trials, kConfidence);
    out.push_back(AntiConcEstimate{
        .kind = kind,
        .p = p,
        .d = x.size(),
        .x = std::vector<double>(x.begin(), x.end()),
        .alpha = alpha,
        .trials = trials,
        .hits = hits,
        .p_hat = static_cast<double>(hits) / static_cast<double>(trials),
        .ci_low = ci.low,
        .ci_high = ci.high,
        .bound = small_ball_bound(kind, x.size(), alpha, norm2),
    });
  }
  return out;
}

double levy_concentration(std::span<const double> sorted, double lambda) {
  if (sorted.empty()) throw DomainError("Levy concentration of an empty sample");
  if (!(lambda >= 0.0)) throw DomainError(fmt::format("window length {} must be nonnegative", lambda));
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw DomainError("samples must be sorted");
  std::size_t best = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    j = std::max(j, i);
    while (j < sorted.size() && sorted[j] <= sorted[i] + lambda) ++j;
    best = std::max(best, j - i);
  }
  return static_cast<double>(best) / static_cast<double>(sorted.size());
}

double theoretical_q_bound(std::span<const double> variances, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError(fmt::format("window length {} must be nonnegative", lambda));
  double total = 0.0;
  for (double v : variances) {
    if (!(v >= 0.0)) throw DomainError(fmt::format("variance {} must be nonnegative", v));
    total += v;
  }
  const double denom = std::sqrt(total + lambda * lambda / 12.0);
  // Both zero: a point mass sits in every window.
  if (denom == 0.0) return 1.0;
  return lambda / denom;
}

std::pair<std::vector<double>, std::vector<double>> FarPairGenerator::operator()(Rng& rng) const {
  const auto z = shape_vector(shape, d, p, distance);
  std::vector<double> x(d);
  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) {
    x[i] = rng.uniform(-spread, spread);
    y[i] = x[i] - z[i];
  }
  return {std::move(x), std::move(y)};
}

double family_tau(FamilyKind kind, const LpExponent& p, std::size_t d) {
  switch (kind) {
    case FamilyKind::rademacher:
      return tau_rademacher(p, d);
    case FamilyKind::uniform_cube:
      return tau_hat(p, d);
    case FamilyKind::unit_sphere:
      return tau_tilde(p, d);
    case FamilyKind::lq_sphere_experimental:
      break;
  }
  throw DomainError(fmt::format("family {} has no proven threshold", to_string(kind)));
}

std::optional<double> false_positive_bound(FamilyKind kind, const LpExponent& p, std::size_t d, double c) {
  if (!(c > 0.0)) throw DomainError(fmt::format("approximation factor {} must be positive", c));
  switch (kind) {
    case FamilyKind::uniform_cube:
    case FamilyKind::unit_sphere:
      return family_tau(kind, p, d) / c;
    case FamilyKind::rademacher: {
      const double r = 1.0 - family_tau(kind, p, d) / c;
      return 1.0 - r * r / 2.0;
    }
    case FamilyKind::lq_sphere_experimental:
      break;
  }
  return std::nullopt;
}

FalsePositiveEstimate estimate_false_positive_rate(FamilyKind kind, const LpExponent& p, std::size_t d, double c,
                                                   std::uint64_t trials, std::uint64_t seed,
                                                   const PairGenerator& pairs) {
  require_trials(trials);
  if (d == 0) throw DimensionError("dimension must be at least 1");
  const auto bound = false_positive_bound(kind, p, d, c);
  const bool hypothesis = kind != FamilyKind::lq_sphere_experimental && c > family_tau(kind, p, d);
  const LpExponent q = sphere_exponent(kind, p, std::nullopt);
  const double scale = family_scale(kind, p, d);

  std::uint64_t hits = 0;
  std::uint64_t dominating = 0;
  std::atomic<bool> bad_pair{false};
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel reduction(+ : hits, dominating)
  {
    std::vector<double> w(d);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      Rng rng(seed, static_cast<std::uint64_t>(t));
      draw_projection(kind, q, rng, w);
      const auto [x, y] = pairs(rng);
      if (x.size() != d || y.size() != d || !(lp_distance(x, y, p) > c)) {
        bad_pair.store(true, std::memory_order_relaxed);
        continue;
      }
      const double a = scale * dot(w, x);
      const double b = scale * dot(w, y);
      const double gap = std::floor(a) - std::floor(b);
      if (std::abs(gap) <= 1.0) ++hits;
      // |floor(a) - floor(b)| <= 1 forces |a - b| < 2, so on the same draws
      // the exact event is a subset of this one.
      if (std::abs(a - b) <= 2.0) ++dominating;
    }
  }
  if (bad_pair.load()) {
    throw DomainError(fmt::format("pair generator produced a pair not farther than c = {} in dimension {}", c, d));
  }

  const auto ci = clopper_pearson(hits, trials, kConfidence);
  return FalsePositiveEstimate{
      .kind = kind,
      .p = p,
      .d = d,
      .c = c,
      .trials = trials,
      .hits = hits,
      .dominating_hits = dominating,
      .p_fp_hat = static_cast<double>(hits) / static_cast<double>(trials),
      .dominating_hat = static_cast<double>(dominating) / static_cast<double>(trials),
      .ci_low = ci.low,
      .ci_high = ci.high,
      .bound = bound,
      .hypothesis_holds = hypothesis,
  };
}

std::vector<ConjectureRow> conjecture_probe(const LpExponent& q, std::size_t d, std::span<const double> epsilons,
                                            std::uint64_t trials, std::uint64_t seed) {
  require_trials(trials);
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw DomainError(fmt::format("epsilon {} must be nonnegative", e));
  }
  const auto x = shape_vector(VectorShape::flat, d, q.dual(), 1.0);
  const auto estimates =
      estimate_small_ball_grid(FamilyKind::lq_sphere_experimental, q.dual(), x, epsilons, trials, seed, q);
  std::vector<ConjectureRow> rows;
  rows.reserve(estimates.size());
  for (const auto& e : estimates) {
    const double scale = e.alpha * std::sqrt(static_cast<double>(d));
    rows.push_back(ConjectureRow{
        .epsilon = e.alpha,
        .trials = e.trials,
        .hits = e.hits,
        .p_hat = e.p_hat,
        .ratio = scale > 0.0 ? e.p_hat / scale : 0.0,
    });
  }
  return rows;
}

}  // namespace slsh
