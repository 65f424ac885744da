// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `acceptance 3 7` runs only criteria 3 and 7.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "commands.hpp"
#include "slsh/anticoncentration.hpp"
#include "slsh/index.hpp"
#include "slsh/oracle.hpp"
#include "slsh/rng.hpp"
#include "slsh/special.hpp"
#include "slsh/stats.hpp"

using namespace slsh;
using namespace slsh::cli;

namespace {

const LpExponent kInf = LpExponent::infinity();

struct Outcome {
  bool pass;
  std::string summary;
  std::vector<std::string> notes;  // printed under the verdict line
};

// ------------------------------------------------------------------ 1
Outcome uniform_cube_small_ball() {
  VerifyBoundsSpec spec;
  spec.false_positive = false;
  spec.kinds = {FamilyKind::uniform_cube};
  spec.small_ball_dims = {2, 8, 64};
  spec.alpha_fractions = {0.05, 0.1, 0.25, 0.5};
  spec.trials = 100000;
  spec.seed = 1001;
  spec.seeds = 5;
  const auto rows = run_verify_bounds(spec);
  std::size_t judged = 0;
  std::size_t p_hat_over = 0;
  std::size_t ci_over = 0;
  double worst_gap = -1.0;
  for (const auto& r : rows) {
    if (r.vacuous) continue;
    ++judged;
    p_hat_over += r.p_hat > *r.bound ? 1 : 0;
    ci_over += r.ci_low > *r.bound ? 1 : 0;
    worst_gap = std::max(worst_gap, r.p_hat - *r.bound);
  }
  return {p_hat_over == 0 && ci_over == 0 && judged > 0,
          fmt::format("{} cells ({} non-vacuous): p_hat > bound in {}, ci_low > bound in {}; max(p_hat - bound) = {:.4f}",
                      rows.size(), judged, p_hat_over, ci_over, worst_gap),
          {}};
}

// ------------------------------------------------------------------ 2
Outcome circle_exactness() {
  const std::vector<double> x{1.0, 0.0};
  const std::vector<double> alphas{0.05, 0.1, 0.3, 0.7};
  const auto est = estimate_small_ball_grid(FamilyKind::unit_sphere, 2, x, alphas, 100000, 2002);
  bool ok = true;
  double worst = 0.0;
  std::vector<std::string> notes;
  for (const auto& e : est) {
    const double exact = 2.0 / std::numbers::pi * std::asin(e.alpha);
    const double err = std::abs(e.p_hat - exact);
    worst = std::max(worst, err);
    const bool dominated = e.p_hat <= e.alpha * std::sqrt(2.0);
    ok = ok && err <= 0.01 && dominated;
    notes.push_back(fmt::format("alpha={:<4} p_hat={:.5f} exact={:.5f} bound={:.5f}", e.alpha, e.p_hat, exact,
                                e.alpha * std::sqrt(2.0)));
  }
  return {ok, fmt::format("max |p_hat - (2/pi) asin(alpha)| = {:.5f} (tolerance 0.01); all p_hat <= alpha sqrt 2", worst),
          notes};
}

// ------------------------------------------------------------------ 3
Outcome cap_below_alpha_sqrt_d() {
  std::vector<std::size_t> dims;
  for (std::size_t d = 2; d <= 64; ++d) dims.push_back(d);
  dims.push_back(256);
  dims.push_back(1024);
  std::size_t violations = 0;
  double min_slack = 1e300;
  for (auto d : dims) {
    for (int i = 1; i <= 200; ++i) {
      const double a = i / 200.0;
      const double slack = a * std::sqrt(static_cast<double>(d)) - cap_probability(a, d);
      min_slack = std::min(min_slack, slack);
      violations += slack < -1e-9 ? 1 : 0;
    }
  }
  return {violations == 0,
          fmt::format("{} dimensions x 200 alphas, {} violations; min(alpha sqrt d - cap) = {:.3e}", dims.size(),
                      violations, min_slack),
          {}};
}

// ------------------------------------------------------------------ 4
Outcome beta_lower_bound() {
  std::size_t bad_margin = 0;
  std::size_t bad_factor = 0;
  double min_margin = 1e300;
  double min_factor = 1e300;
  for (std::size_t d = 2; d <= 10000; ++d) {
    const double m = beta_lower_bound_margin(d);
    min_margin = std::min(min_margin, m);
    bad_margin += m < 0.0 ? 1 : 0;
    if (d >= 3) {
      const double f = sphere_beta_factor(d);
      min_factor = std::min(min_factor, f);
      bad_factor += f < 1.0 ? 1 : 0;
    }
  }
  // The factor tends to sqrt(pi/2) from above; spot-check far beyond the grid.
  for (std::size_t d : {100000u, 1000000u, 100000000u}) bad_factor += sphere_beta_factor(d) < 1.0 ? 1 : 0;
  return {bad_margin == 0 && bad_factor == 0,
          fmt::format("d in [2, 1e4]: min margin = {:.6f}, min B(1/2,(d-1)/2) sqrt(d)/2 = {:.6f} (d >= 3)", min_margin,
                      min_factor),
          {}};
}

// ------------------------------------------------------------------ 5
Outcome false_positive_lemmas() {
  struct Cell {
    FamilyKind kind;
    LpExponent p;
  };
  const Cell cells[] = {{FamilyKind::uniform_cube, 1},
                        {FamilyKind::uniform_cube, 2},
                        {FamilyKind::unit_sphere, 2},
                        {FamilyKind::unit_sphere, kInf}};
  const std::uint64_t trials = 100000;
  std::size_t count = 0;
  std::size_t failures = 0;
  double worst = -1.0;
  std::vector<std::string> notes;
  for (const auto& cell : cells) {
    for (std::size_t d : {4u, 16u}) {
      const double tau = family_tau(cell.kind, cell.p, d);
      for (double k : {4.0, 10.0, 20.0}) {
        const double c = k * tau;
        double cell_worst = 0.0;
        for (auto shape : {VectorShape::axis, VectorShape::flat, VectorShape::two_coordinate}) {
          const FarPairGenerator gen{shape, cell.p, d, c * (1.0 + 1e-9)};
          const auto e = estimate_false_positive_rate(cell.kind, cell.p, d, c, trials, 5005 + count, gen);
          const double bound = tau / c;
          const double limit = bound + 3.0 * binomial_sigma(bound, trials);
          ++count;
          failures += e.p_fp_hat > limit ? 1 : 0;
          worst = std::max(worst, e.p_fp_hat - limit);
          cell_worst = std::max(cell_worst, e.p_fp_hat);
        }
        notes.push_back(fmt::format("{:<12} p={:<3} d={:<2} c={:>2}tau: max p_fp = {:.5f} vs tau/c = {:.4f}",
                                    to_string(cell.kind), cell.p.to_string(), d, k, cell_worst, 1.0 / k));
      }
    }
  }
  return {failures == 0,
          fmt::format("{} cells (3 pair shapes each), {} above tau/c + 3 sigma; max(p_fp - limit) = {:.5f}", count,
                      failures, worst),
          notes};
}

// ------------------------------------------------------------------ 6
Outcome rademacher_degeneracy() {
  const std::size_t d = 16;
  const double C = 1e6;
  std::vector<double> z(d, 0.0);
  z[0] = z[1] = C;
  // <v, z> is one of -2C, 0, 2C, so |<v, z>| < 1 is exactly the zero event.
  const auto zero = estimate_small_ball(FamilyKind::rademacher, 2, z, 1.0, 100000, 6006);

  const double dist = lp_norm(z, 2);
  const double c = dist / (1.0 + 1e-9);
  const PairGenerator same_z = [&](Rng& rng) {
    std::vector<double> x(d);
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = rng.uniform(-10.0, 10.0);
      y[i] = x[i] - z[i];
    }
    return std::pair{x, y};
  };
  const auto cube = estimate_false_positive_rate(FamilyKind::uniform_cube, 2, d, c, 100000, 6007, same_z);
  const auto rad = estimate_false_positive_rate(FamilyKind::rademacher, 2, d, c, 100000, 6008, same_z);
  const bool ok = zero.p_hat >= 0.48 && zero.p_hat <= 0.52 && cube.p_fp_hat < 0.01;
  return {ok,
          fmt::format("P(<v,z> = 0) = {:.4f} (want [0.48, 0.52]); uniform-cube p_fp = {:.5f} (want < 0.01, bound {:.2e})",
                      zero.p_hat, cube.p_fp_hat, *cube.bound),
          {fmt::format("rademacher p_fp on the same z = {:.4f}", rad.p_fp_hat)}};
}

// ------------------------------------------------------------------ 7
Outcome zero_false_negatives() {
  const std::size_t n_planted = 50;
  const std::size_t n_total = 2000;
  const std::size_t seeds = 10;
  const std::size_t fast_query_levels = 6;  // automatic L would store 2000 * 3^9 entries
  std::size_t cells = 0;
  std::size_t bad_cells = 0;
  std::size_t radius_one_pairs = 0;
  std::size_t queries_total = 0;
  std::vector<std::string> notes;
  for (const LpExponent p : {LpExponent(1), LpExponent(2), kInf}) {
    for (auto kind : {FamilyKind::uniform_cube, FamilyKind::unit_sphere}) {
      for (auto variant : {Variant::fast_query, Variant::fast_preprocessing}) {
        for (std::size_t d : {4u, 8u}) {
          double min_recall = 1.0;
          double min_precision = 1.0;
          std::size_t cell_queries = 0;
          std::size_t within_r = 0;
          for (std::size_t s = 0; s < seeds; ++s) {
            const std::uint64_t seed = derive_seed(7007, cells * seeds + s);
            GenDataSpec planted;
            planted.shape = DataShape::planted_pairs;
            planted.n = n_planted;
            planted.d = d;
            planted.p = p;
            planted.seed = seed;
            planted.scale = 2.0;
            planted.distances = {0.5, 0.999, 1.0, 0.25, 0.75};
            planted.background = n_total - n_planted;
            auto gen = run_gen_data(planted);

            GenDataSpec extra;
            extra.shape = DataShape::uniform_cube_points;
            extra.n = 50;
            extra.d = d;
            extra.p = p;
            extra.seed = seed ^ 0x5a5a5a5aULL;
            extra.scale = 2.0;
            Dataset queries = *gen.queries;
            const auto perturbed = run_gen_data(extra).data;
            for (std::size_t i = 0; i < perturbed.size(); ++i) queries.push_back(perturbed[i]);

            IndexConfig cfg;
            cfg.p = p;
            cfg.d = d;
            cfg.kind = kind;
            cfg.variant = variant;
            cfg.c = 2.0 * family_tau(kind, p, d);
            cfg.levels = variant == Variant::fast_query ? fast_query_levels : 0;
            cfg.master_seed = seed;
            const auto index = Index::build(gen.data, cfg);
            const auto report = recall_report(index, gen.data, queries);
            min_recall = std::min(min_recall, report.min_recall);
            min_precision = std::min(min_precision, report.min_precision);
            cell_queries += queries.size();
            for (const auto& row : report.rows) within_r += row.within_r;
          }
          ++cells;
          queries_total += cell_queries;
          radius_one_pairs += within_r;
          const bool ok = min_recall == 1.0 && min_precision == 1.0;
          bad_cells += ok ? 0 : 1;
          if (!ok) {
            notes.push_back(fmt::format("{} {} p={} d={}: recall {} precision {}", to_string(kind), to_string(variant),
                                        p.to_string(), d, min_recall, min_precision));
          }
        }
      }
    }
  }
  return {bad_cells == 0,
          fmt::format("{} cells x {} queries: {} cells below recall/precision 1; {} radius-1 (query, point) pairs checked",
                      cells, queries_total / cells, bad_cells, radius_one_pairs),
          notes};
}

// ------------------------------------------------------------------ 8
Outcome levy_cross_check() {
  LevySpec spec;
  spec.dims = {4, 16};
  spec.shape = VectorShape::flat;
  spec.lambda_fractions = {0.1, 0.5, 1.0};
  spec.trials = 100000;
  spec.seed = 8008;
  const auto rows = run_levy(spec);
  std::vector<std::string> notes;
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && !r.violated;
    notes.push_back(fmt::format("d={:<2} lambda={:.2f}: empirical {:.5f} <= bound {:.5f} + 3 sigma ({:.5f})", r.d,
                                r.lambda, r.empirical_q, r.theoretical_q, 3 * r.sigma));
  }
  return {ok, fmt::format("{} (d, lambda) cells, all within bound + 3 sigma: {}", rows.size(), ok ? "yes" : "no"),
          notes};
}

// ------------------------------------------------------------------ 9
Outcome storage_and_determinism() {
  std::vector<std::string> failures;
  GenDataSpec gs;
  gs.n = 500;
  gs.d = 5;
  gs.seed = 9009;
  gs.scale = 3.0;
  const auto data = run_gen_data(gs).data;
  gs.n = 100;
  gs.seed = 9010;
  const auto queries = run_gen_data(gs).data;

  for (auto variant : {Variant::fast_query, Variant::fast_preprocessing}) {
    IndexConfig cfg;
    cfg.p = 2;
    cfg.d = 5;
    cfg.kind = FamilyKind::uniform_cube;
    cfg.variant = variant;
    cfg.c = 2.0 * family_tau(cfg.kind, 2, 5);
    cfg.levels = 4;
    cfg.master_seed = 9;
    const auto index = Index::build(data, cfg);
    const std::size_t expected = variant == Variant::fast_query ? data.size() * 81 : data.size();
    if (index.entries().size() != expected) {
      failures.push_back(fmt::format("{} stores {} entries, expected {}", to_string(variant), index.entries().size(),
                                     expected));
    }
    const auto bytes = index.serialize();
    const auto back = Index::deserialize(bytes);
    if (back.serialize() != bytes) failures.push_back(fmt::format("{} re-serialization differs", to_string(variant)));
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto a = index.query(queries[i]);
      const auto b = back.query(queries[i]);
      bool same = a.neighbors.size() == b.neighbors.size();
      for (std::size_t k = 0; same && k < a.neighbors.size(); ++k) {
        same = a.neighbors[k].id == b.neighbors[k].id && a.neighbors[k].distance == b.neighbors[k].distance;
      }
      if (!same) {
        failures.push_back(fmt::format("{} query {} differs after deserialization", to_string(variant), i));
        break;
      }
    }
  }

  // Manifest replay: run, echo the spec through the manifest, rerun from it.
  VerifyBoundsSpec vb;
  vb.small_ball_dims = {2, 8};
  vb.false_positive_dims = {4};
  vb.trials = 20000;
  vb.seeds = 2;
  vb.seed = 9011;
  const auto first = bound_rows_csv(run_verify_bounds(vb));
  const auto manifest = make_manifest("verify-bounds", to_json(vb), {"report.csv"});
  const auto replayed = bound_rows_csv(run_verify_bounds(verify_bounds_spec_from_json(manifest.at("params"))));
  if (first != replayed) failures.emplace_back("verify-bounds CSV differs after manifest replay");

  LevySpec ls;
  ls.trials = 20000;
  ls.seed = 9012;
  const auto levy_first = levy_rows_csv(run_levy(ls));
  const auto levy_manifest = make_manifest("levy", to_json(ls), {"levy.csv"});
  if (levy_first != levy_rows_csv(run_levy(levy_spec_from_json(levy_manifest.at("params"))))) {
    failures.emplace_back("levy CSV differs after manifest replay");
  }

  BenchSpec bs;
  bs.levels = {3};
  bs.seed = 9013;
  const auto bench_first = bench_rows_csv(run_bench_index(data, queries, bs));
  const auto bench_manifest = make_manifest("bench-index", to_json(bs), {"bench.csv"});
  if (bench_first != bench_rows_csv(run_bench_index(data, queries, bench_spec_from_json(bench_manifest.at("params"))))) {
    failures.emplace_back("bench-index CSV differs after manifest replay");
  }

  return {failures.empty(),
          failures.empty() ? std::string("entry counts n and n*3^L exact; 100-query round trip identical; "
                                         "verify-bounds, levy and bench-index CSVs reproduce byte for byte")
                           : fmt::format("{} problems", failures.size()),
          failures};
}

// ------------------------------------------------------------------ 10
struct ScalingPoint {
  std::size_t n;
  std::size_t levels;
  double candidates;
  double buckets;
};

// All data sits in a thin shell just outside distance c of a small query
// cluster, so every candidate is a genuine false positive. Smaller datasets are
// prefixes of the largest one. Each size is averaged over independent hash draws.
std::vector<ScalingPoint> scaling_sweep(FamilyKind kind, std::optional<double> calibrated) {
  const std::size_t d = 8;
  const LpExponent p = 2;
  const double c = 4.0 * family_tau(kind, p, d);
  const std::size_t n_queries = 200;
  const std::size_t index_seeds = 100;
  const std::size_t sizes[] = {10000, 20000, 40000};
  Rng rng(10010);

  Dataset queries(d, p);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < n_queries; ++i) {
    rng.fill_normal(v);
    const double norm = lp_norm(v, p);
    const double r = rng.uniform01();
    for (auto& x : v) x *= r / norm;  // inside the unit ball around the origin
    queries.push_back(v);
  }

  std::vector<std::vector<double>> shell;
  while (shell.size() < sizes[2]) {
    rng.fill_normal(v);
    const double norm = lp_norm(v, p);
    const double r = rng.uniform(c + 1.0, 1.25 * c);
    for (auto& x : v) x *= r / norm;
    bool far = true;
    for (std::size_t q = 0; far && q < queries.size(); ++q) far = lp_distance(queries[q], v, p) > c;
    if (far) shell.push_back(v);
  }

  std::vector<ScalingPoint> out;
  for (std::size_t n : sizes) {
    Dataset data(d, p);
    for (std::size_t i = 0; i < n; ++i) data.push_back(shell[i]);
    IndexConfig cfg;
    cfg.p = p;
    cfg.d = d;
    cfg.kind = kind;
    cfg.variant = Variant::fast_preprocessing;
    cfg.c = c;
    cfg.calibrated_p_fp = calibrated;
    double candidates = 0.0;
    double buckets = 0.0;
    std::size_t levels = 0;
    for (std::size_t s = 0; s < index_seeds; ++s) {
      cfg.master_seed = derive_seed(10012, s);
      const auto index = Index::build(data, cfg);
      levels = index.levels();
      for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto r = index.query(queries[q]);
        candidates += static_cast<double>(r.stats.candidates_scanned);
        buckets += static_cast<double>(r.stats.buckets_probed);
      }
    }
    const double samples = static_cast<double>(index_seeds * n_queries);
    out.push_back({n, levels, candidates / samples, buckets / samples});
  }
  return out;
}

Outcome scaling_trend() {
  const auto pts = scaling_sweep(FamilyKind::uniform_cube, std::nullopt);
  std::vector<double> ratios;
  std::vector<double> work_ratios;
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    notes.push_back(fmt::format("uniform_cube n={:<6} L={} mean candidates {:.3f}, buckets probed {:.0f}", pts[i].n,
                                pts[i].levels, pts[i].candidates, pts[i].buckets));
    if (i > 0) {
      ratios.push_back(pts[i].candidates / pts[i - 1].candidates);
      work_ratios.push_back((pts[i].candidates + pts[i].buckets) / (pts[i - 1].candidates + pts[i - 1].buckets));
    }
  }
  const double mean_ratio = (ratios[0] + ratios[1]) / 2.0;
  const double mean_work = (work_ratios[0] + work_ratios[1]) / 2.0;
  notes.push_back(fmt::format("candidate ratios per doubling {:.3f}, {:.3f}; probes + candidates ratios {:.3f}, {:.3f}",
                              ratios[0], ratios[1], work_ratios[0], work_ratios[1]));
  notes.push_back(
      "L is chosen from the proven p_fp = 1/4 and stays constant across this range, so candidates grow "
      "linearly in n; the sublinear part of the query cost is the 3^L probe term");

  const auto sphere = scaling_sweep(FamilyKind::unit_sphere, std::nullopt);
  notes.push_back(fmt::format("unit_sphere (info): L = {}, {}, {}; candidates {:.3f}, {:.3f}, {:.3f}", sphere[0].levels,
                              sphere[1].levels, sphere[2].levels, sphere[0].candidates, sphere[1].candidates,
                              sphere[2].candidates));
  return {mean_ratio < 1.8,
          fmt::format("mean candidates-scanned ratio per doubling = {:.3f} (want < 1.8); total work ratio {:.3f}",
                      mean_ratio, mean_work),
          notes};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "uniform-cube anti-concentration", uniform_cube_small_ball},
      {2, "sphere anti-concentration at d=2", circle_exactness},
      {3, "cap probability below alpha sqrt(d)", cap_below_alpha_sqrt_d},
      {4, "beta-function lower bound", beta_lower_bound},
      {5, "false-positive lemmas", false_positive_lemmas},
      {6, "Rademacher degeneracy", rademacher_degeneracy},
      {7, "zero false negatives", zero_false_negatives},
      {8, "Levy concentration cross-check", levy_cross_check},
      {9, "storage and determinism", storage_and_determinism},
      {10, "scaling trend", scaling_trend},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what()), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("[{}] {:>2}. {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.summary, secs);
    for (const auto& note : o.notes) fmt::print("        {}\n", note);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  fmt::print("{} criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
