#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>

#include "slsh/error.hpp"
#include "slsh/rng.hpp"
#include "slsh/stats.hpp"

namespace slsh::cli {

using nlohmann::ordered_json;

namespace {

template <typename T>
void require_nonempty(const std::vector<T>& grid, std::string_view name) {
  if (grid.empty()) throw DomainError(fmt::format("grid '{}' is empty", name));
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); }

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

template <typename T, typename F>
ordered_json map_json(const std::vector<T>& xs, F f) {
  ordered_json out = ordered_json::array();
  for (const auto& x : xs) out.push_back(f(x));
  return out;
}

ordered_json exps_json(const std::vector<LpExponent>& ps) {
  return map_json(ps, [](const LpExponent& p) { return p.to_string(); });
}

// Pushes y = x + t * u with ||x - y||_p <= target, shrinking t by one ulp-ish
// step at a time when rounding lands just above the target.
std::vector<double> place_partner(std::span<const double> x, std::span<const double> unit, double target,
                                  const LpExponent& p) {
  std::vector<double> y(x.size());
  double t = target;
  for (int attempt = 0; attempt < 200; ++attempt) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + t * unit[i];
    if (lp_distance(x, y, p) <= target) return y;
    t = std::nextafter(t, 0.0) * (1.0 - 0x1p-50);
  }
  throw Error(fmt::format("could not place a partner at distance {}", target));
}

}  // namespace

std::string_view to_string(DataShape shape) noexcept {
  switch (shape) {
    case DataShape::gaussian:
      return "gaussian";
    case DataShape::uniform_cube_points:
      return "uniform_cube_points";
    case DataShape::planted_pairs:
      return "planted_pairs";
  }
  return "?";
}

DataShape parse_data_shape(std::string_view text) {
  for (auto s : {DataShape::gaussian, DataShape::uniform_cube_points, DataShape::planted_pairs}) {
    if (text == to_string(s)) return s;
  }
  throw DomainError(fmt::format("unknown dataset shape '{}'", text));
}

// ---------------------------------------------------------------- gen-data

GeneratedData run_gen_data(const GenDataSpec& spec) {
  if (spec.n == 0) throw DomainError("n must be at least 1");
  if (spec.d == 0) throw DimensionError("d must be at least 1");
  if (!(spec.scale > 0.0)) throw DomainError("scale must be positive");

  Rng rng(spec.seed);
  std::vector<double> row(spec.d);
  GeneratedData out{Dataset(spec.d, spec.p), std::nullopt, {}};

  auto gaussian_row = [&] {
    rng.fill_normal(row);
    for (auto& v : row) v *= spec.scale;
  };

  switch (spec.shape) {
    case DataShape::gaussian:
      for (std::size_t i = 0; i < spec.n; ++i) {
        gaussian_row();
        out.data.push_back(row);
      }
      break;
    case DataShape::uniform_cube_points:
      for (std::size_t i = 0; i < spec.n; ++i) {
        for (auto& v : row) v = rng.uniform(-spec.scale, spec.scale);
        out.data.push_back(row);
      }
      break;
    case DataShape::planted_pairs: {
      require_nonempty(spec.distances, "distances");
      for (double dist : spec.distances) {
        if (!(dist >= 0.0) || !std::isfinite(dist)) throw DomainError(fmt::format("bad planted distance {}", dist));
      }
      Dataset queries(spec.d, spec.p);
      std::vector<double> unit(spec.d);
      for (std::size_t i = 0; i < spec.n; ++i) {
        for (auto& v : row) v = rng.uniform(-spec.scale, spec.scale);
        double norm = 0.0;
        do {
          rng.fill_normal(unit);
          norm = lp_norm(unit, spec.p);
        } while (norm == 0.0);
        for (auto& u : unit) u /= norm;
        const double target = spec.distances[i % spec.distances.size()];
        auto y = place_partner(row, unit, target, spec.p);
        out.data.push_back(row);
        queries.push_back(y);
        out.pair_distances.push_back(lp_distance(row, y, spec.p));
      }
      for (std::size_t i = 0; i < spec.background; ++i) {
        gaussian_row();
        out.data.push_back(row);
      }
      out.queries = std::move(queries);
      break;
    }
  }
  return out;
}

// ----------------------------------------------------------- verify-bounds

std::vector<BoundRow> run_verify_bounds(const VerifyBoundsSpec& spec) {
  if (!spec.small_ball && !spec.false_positive) throw DomainError("no bound family selected");
  require_nonempty(spec.kinds, "kinds");
  require_nonempty(spec.shapes, "shapes");
  if (spec.seeds == 0) throw DomainError("seed sweep must contain at least one seed");
  if (spec.trials == 0) throw DomainError("trials must be positive");
  if (!(spec.bound_multiplier > 0.0)) throw DomainError("bound multiplier must be positive");

  std::vector<BoundRow> rows;
  auto judge = [&](BoundRow& r, std::optional<double> bound) {
    if (bound) bound = *bound * spec.bound_multiplier;
    r.bound = bound;
    r.vacuous = r.vacuous || !bound || *bound > 1.0;
    r.violated = !r.vacuous && r.ci_low > *r.bound;
  };

  if (spec.small_ball) {
    require_nonempty(spec.small_ball_dims, "small-ball dimensions");
    require_nonempty(spec.alpha_fractions, "alpha");
    for (auto kind : spec.kinds) {
      for (auto d : spec.small_ball_dims) {
        for (auto shape : spec.shapes) {
          const auto x = shape_vector(shape, d, 2, 1.0);
          const double norm2 = lp_norm(x, 2);
          std::vector<double> alphas;
          for (double f : spec.alpha_fractions) alphas.push_back(f * norm2);
          for (std::size_t s = 0; s < spec.seeds; ++s) {
            const auto seed = derive_seed(spec.seed, s);
            for (const auto& e : estimate_small_ball_grid(kind, 2, x, alphas, spec.trials, seed)) {
              BoundRow r{BoundTest::small_ball, kind, 2, d, e.alpha, e.trials, e.hits, e.p_hat, e.ci_low,
                         e.ci_high, std::nullopt, false, shape, seed, false};
              judge(r, e.bound);
              rows.push_back(std::move(r));
            }
          }
        }
      }
    }
  }

  if (spec.false_positive) {
    require_nonempty(spec.false_positive_dims, "false-positive dimensions");
    require_nonempty(spec.c_multipliers, "c multipliers");
    require_nonempty(spec.ps, "p");
    for (auto kind : spec.kinds) {
      for (const auto& p : spec.ps) {
        for (auto d : spec.false_positive_dims) {
          const double tau = family_tau(kind, p, d);
          for (double k : spec.c_multipliers) {
            const double c = k * tau;
            for (auto shape : spec.shapes) {
              // Strictly beyond c, as the lemmas require.
              const FarPairGenerator gen{shape, p, d, c * (1.0 + 1e-9)};
              for (std::size_t s = 0; s < spec.seeds; ++s) {
                const auto seed = derive_seed(spec.seed, s);
                const auto e = estimate_false_positive_rate(kind, p, d, c, spec.trials, seed, gen);
                BoundRow r{BoundTest::false_positive, kind, p, d, c, e.trials, e.hits, e.p_fp_hat, e.ci_low,
                           e.ci_high, std::nullopt, !e.hypothesis_holds, shape, seed, false};
                judge(r, e.bound);
                rows.push_back(std::move(r));
              }
            }
          }
        }
      }
    }
  }
  return rows;
}

namespace {
std::string_view test_name(BoundTest t) { return t == BoundTest::small_ball ? "small_ball" : "false_positive"; }

std::string_view verdict(const BoundRow& r) {
  if (r.vacuous) return "vacuous";
  return r.violated ? "violated" : "ok";
}
}  // namespace

std::string bound_rows_csv(const std::vector<BoundRow>& rows) {
  std::string out = "kind,p,d,alpha_or_c,trials,hits,p_hat,ci_low,ci_high,bound,vacuous,test,shape,seed,verdict\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.kind), r.p.to_string(), r.d,
                       format_double(r.alpha_or_c), r.trials, r.hits, format_double(r.p_hat),
                       format_double(r.ci_low), format_double(r.ci_high), fmt_opt(r.bound), r.vacuous ? 1 : 0,
                       test_name(r.test), to_string(r.shape), r.seed, verdict(r));
  }
  return out;
}

ordered_json bound_rows_json(const std::vector<BoundRow>& rows) {
  return map_json(rows, [](const BoundRow& r) {
    return ordered_json{{"kind", to_string(r.kind)},
                        {"p", r.p.to_string()},
                        {"d", r.d},
                        {"alpha_or_c", r.alpha_or_c},
                        {"trials", r.trials},
                        {"hits", r.hits},
                        {"p_hat", r.p_hat},
                        {"ci_low", r.ci_low},
                        {"ci_high", r.ci_high},
                        {"bound", opt_json(r.bound)},
                        {"vacuous", r.vacuous},
                        {"test", test_name(r.test)},
                        {"shape", to_string(r.shape)},
                        {"seed", r.seed},
                        {"verdict", verdict(r)}};
  });
}

// ------------------------------------------------------------- bench-index

std::vector<BenchRow> run_bench_index(const Dataset& data, const Dataset& queries, const BenchSpec& spec) {
  require_nonempty(spec.kinds, "kinds");
  require_nonempty(spec.variants, "variants");
  require_nonempty(spec.levels, "levels");
  if (spec.cs.empty()) require_nonempty(spec.c_multipliers, "c multipliers");
  if (spec.seeds == 0) throw DomainError("seed sweep must contain at least one seed");
  if (data.empty() || queries.empty()) throw DomainError("bench-index needs a nonempty dataset and query set");
  if (data.dim() != queries.dim()) {
    throw DimensionError(fmt::format("queries have dimension {}, data {}", queries.dim(), data.dim()));
  }
  if (!(data.p() == queries.p())) throw DomainError("dataset and queries are tagged with different p");

  const auto& p = data.p();
  const std::size_t d = data.dim();
  std::vector<BenchRow> rows;
  for (auto kind : spec.kinds) {
    const double tau = family_tau(kind, p, d);
    std::vector<double> cs = spec.cs;
    if (cs.empty()) {
      for (double k : spec.c_multipliers) cs.push_back(k * tau);
    }
    for (auto variant : spec.variants) {
      for (double c : cs) {
        for (auto levels : spec.levels) {
          for (std::size_t s = 0; s < spec.seeds; ++s) {
            IndexConfig cfg;
            cfg.p = p;
            cfg.d = d;
            cfg.c = c;
            cfg.kind = kind;
            cfg.variant = variant;
            cfg.levels = levels;
            cfg.master_seed = derive_seed(spec.seed, s);
            cfg.unsafe_override = spec.unsafe_override;
            cfg.max_entries = spec.max_entries;
            const auto index = Index::build(data, cfg);

            QueryStats total{};
            const Searcher search = [&](std::span<const double> q) {
              const auto res = index.query(q);
              total.buckets_probed += res.stats.buckets_probed;
              total.candidates_scanned += res.stats.candidates_scanned;
              total.distance_evaluations += res.stats.distance_evaluations;
              std::vector<std::uint32_t> ids;
              ids.reserve(res.neighbors.size());
              for (const auto& nb : res.neighbors) ids.push_back(nb.id);
              return ids;
            };
            const auto t0 = std::chrono::steady_clock::now();
            const auto report = recall_report(search, data, queries, c);
            const auto t1 = std::chrono::steady_clock::now();
            const double nq = static_cast<double>(queries.size());
            // recall_report also scans the data by brute force; the query
            // timing below therefore includes the oracle and is an upper bound.
            rows.push_back(BenchRow{
                kind,
                variant,
                p,
                d,
                data.size(),
                c,
                tau,
                index.levels(),
                cfg.master_seed,
                queries.size(),
                report.min_recall,
                report.mean_recall,
                report.min_precision,
                static_cast<double>(total.candidates_scanned) / nq,
                static_cast<double>(total.buckets_probed) / nq,
                static_cast<double>(total.distance_evaluations) / nq,
                index.stats().entries,
                index.stats().wall_ms,
                std::chrono::duration<double, std::micro>(t1 - t0).count() / nq,
                report.counterexamples,
            });
          }
        }
      }
    }
  }
  return rows;
}

std::string bench_rows_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "kind,variant,p,d,n,c,tau,levels,seed,queries,recall_min,recall_mean,precision_min,mean_candidates,"
      "mean_buckets,mean_distance_evals,entries\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.kind),
                       to_string(r.variant), r.p.to_string(), r.d, r.n, format_double(r.c), format_double(r.tau),
                       r.levels, r.seed, r.queries, format_double(r.recall_min), format_double(r.recall_mean),
                       format_double(r.precision_min), format_double(r.mean_candidates),
                       format_double(r.mean_buckets), format_double(r.mean_distance_evals), r.entries);
  }
  return out;
}

std::string bench_timings_csv(const std::vector<BenchRow>& rows) {
  std::string out = "kind,variant,c,levels,seed,build_ms,query_us\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{:.3f},{:.3f}\n", to_string(r.kind), to_string(r.variant),
                       format_double(r.c), r.levels, r.seed, r.build_ms, r.query_us);
  }
  return out;
}

ordered_json bench_rows_json(const std::vector<BenchRow>& rows) {
  return map_json(rows, [](const BenchRow& r) {
    return ordered_json{{"kind", to_string(r.kind)},
                        {"variant", to_string(r.variant)},
                        {"p", r.p.to_string()},
                        {"d", r.d},
                        {"n", r.n},
                        {"c", r.c},
                        {"tau", r.tau},
                        {"levels", r.levels},
                        {"seed", r.seed},
                        {"queries", r.queries},
                        {"recall_min", r.recall_min},
                        {"recall_mean", r.recall_mean},
                        {"precision_min", r.precision_min},
                        {"mean_candidates", r.mean_candidates},
                        {"mean_buckets", r.mean_buckets},
                        {"mean_distance_evals", r.mean_distance_evals},
                        {"entries", r.entries}};
  });
}

// -------------------------------------------------------- probe-conjecture

std::vector<ProbeRow> run_probe_conjecture(const ProbeSpec& spec) {
  require_nonempty(spec.dims, "dimensions");
  require_nonempty(spec.epsilons, "epsilon");
  std::vector<ProbeRow> rows;
  for (auto d : spec.dims) {
    for (const auto& r : conjecture_probe(spec.q, d, spec.epsilons, spec.trials, derive_seed(spec.seed, d))) {
      rows.push_back({spec.q, d, r});
    }
  }
  return rows;
}

std::string probe_rows_csv(const std::vector<ProbeRow>& rows) {
  std::string out = "q,d,epsilon,trials,hits,p_hat,ratio\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.q.to_string(), r.d, format_double(r.row.epsilon), r.row.trials,
                       r.row.hits, format_double(r.row.p_hat), format_double(r.row.ratio));
  }
  return out;
}

ordered_json probe_rows_json(const std::vector<ProbeRow>& rows) {
  return map_json(rows, [](const ProbeRow& r) {
    return ordered_json{{"q", r.q.to_string()},     {"d", r.d},           {"epsilon", r.row.epsilon},
                        {"trials", r.row.trials},   {"hits", r.row.hits}, {"p_hat", r.row.p_hat},
                        {"ratio", r.row.ratio}};
  });
}

// -------------------------------------------------------------------- levy

std::vector<LevyRow> run_levy(const LevySpec& spec) {
  require_nonempty(spec.dims, "dimensions");
  require_nonempty(spec.lambda_fractions, "lambda");
  std::vector<LevyRow> rows;
  for (auto d : spec.dims) {
    const auto x = shape_vector(spec.shape, d, 2, 1.0);
    const double norm2 = lp_norm(x, 2);
    auto samples = sample_projections(FamilyKind::uniform_cube, 2, x, spec.trials, derive_seed(spec.seed, d));
    std::sort(samples.begin(), samples.end());
    std::vector<double> variances;
    for (double xi : x) variances.push_back(xi * xi / 3.0);  // Var(w_i) = 1/3 on [-1, 1]
    for (double f : spec.lambda_fractions) {
      const double lambda = f * norm2;
      const double emp = levy_concentration(samples, lambda);
      const double theo = std::min(1.0, theoretical_q_bound(variances, lambda));
      const double sigma = binomial_sigma(theo, spec.trials);
      rows.push_back({d, spec.shape, lambda, spec.trials, emp, theo, sigma, emp > theo + 3.0 * sigma});
    }
  }
  return rows;
}

std::string levy_rows_csv(const std::vector<LevyRow>& rows) {
  std::string out = "d,shape,lambda,samples,empirical_q,theoretical_q,sigma,verdict\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.d, to_string(r.shape), format_double(r.lambda), r.samples,
                       format_double(r.empirical_q), format_double(r.theoretical_q), format_double(r.sigma),
                       r.violated ? "violated" : "ok");
  }
  return out;
}

ordered_json levy_rows_json(const std::vector<LevyRow>& rows) {
  return map_json(rows, [](const LevyRow& r) {
    return ordered_json{{"d", r.d},
                        {"shape", to_string(r.shape)},
                        {"lambda", r.lambda},
                        {"samples", r.samples},
                        {"empirical_q", r.empirical_q},
                        {"theoretical_q", r.theoretical_q},
                        {"sigma", r.sigma},
                        {"verdict", r.violated ? "violated" : "ok"}};
  });
}

// --------------------------------------------------------------- manifests

ordered_json make_manifest(const std::string& command, ordered_json params, const std::vector<std::string>& outputs) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return ordered_json{{"schema_version", kManifestSchemaVersion},
                      {"command", command},
                      {"params", std::move(params)},
                      {"outputs", outputs},
                      {"timestamp", stamp}};
}

ordered_json to_json(const VerifyBoundsSpec& s) {
  return ordered_json{
      {"small_ball", s.small_ball},
      {"false_positive", s.false_positive},
      {"kinds", map_json(s.kinds, [](FamilyKind k) { return std::string(to_string(k)); })},
      {"p", exps_json(s.ps)},
      {"small_ball_dims", s.small_ball_dims},
      {"false_positive_dims", s.false_positive_dims},
      {"alpha_fractions", s.alpha_fractions},
      {"c_multipliers", s.c_multipliers},
      {"shapes", map_json(s.shapes, [](VectorShape v) { return std::string(to_string(v)); })},
      {"trials", s.trials},
      {"seed", s.seed},
      {"seeds", s.seeds},
      {"bound_multiplier", s.bound_multiplier},
  };
}

ordered_json to_json(const GenDataSpec& s) {
  return ordered_json{{"shape", to_string(s.shape)}, {"n", s.n},         {"d", s.d},
                      {"p", s.p.to_string()},        {"seed", s.seed},   {"scale", s.scale},
                      {"distances", s.distances},    {"background", s.background}};
}

ordered_json to_json(const BenchSpec& s) {
  return ordered_json{
      {"kinds", map_json(s.kinds, [](FamilyKind k) { return std::string(to_string(k)); })},
      {"variants", map_json(s.variants, [](Variant v) { return std::string(to_string(v)); })},
      {"c_multipliers", s.c_multipliers},
      {"c", s.cs},
      {"levels", s.levels},
      {"seed", s.seed},
      {"seeds", s.seeds},
      {"unsafe_override", s.unsafe_override},
      {"max_entries", s.max_entries},
  };
}

ordered_json to_json(const ProbeSpec& s) {
  return ordered_json{{"q", s.q.to_string()},
                      {"dims", s.dims},
                      {"epsilons", s.epsilons},
                      {"trials", s.trials},
                      {"seed", s.seed}};
}

ordered_json to_json(const LevySpec& s) {
  return ordered_json{{"dims", s.dims},
                      {"shape", to_string(s.shape)},
                      {"lambda_fractions", s.lambda_fractions},
                      {"trials", s.trials},
                      {"seed", s.seed}};
}

}  // namespace slsh::cli

namespace slsh::cli {

namespace {

template <typename F>
auto parse_list(const ordered_json& j, F f) {
  std::vector<decltype(f(std::string{}))> out;
  for (const auto& v : j) out.push_back(f(v.get<std::string>()));
  return out;
}

LpExponent exp_from(const std::string& s) { return LpExponent::parse(s); }

}  // namespace

VerifyBoundsSpec verify_bounds_spec_from_json(const ordered_json& j) {
  VerifyBoundsSpec s;
  s.small_ball = j.at("small_ball").get<bool>();
  s.false_positive = j.at("false_positive").get<bool>();
  s.kinds = parse_list(j.at("kinds"), [](const std::string& t) { return parse_family_kind(t); });
  s.ps = parse_list(j.at("p"), exp_from);
  s.small_ball_dims = j.at("small_ball_dims").get<std::vector<std::size_t>>();
  s.false_positive_dims = j.at("false_positive_dims").get<std::vector<std::size_t>>();
  s.alpha_fractions = j.at("alpha_fractions").get<std::vector<double>>();
  s.c_multipliers = j.at("c_multipliers").get<std::vector<double>>();
  s.shapes = parse_list(j.at("shapes"), [](const std::string& t) { return parse_vector_shape(t); });
  s.trials = j.at("trials").get<std::uint64_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.seeds = j.at("seeds").get<std::size_t>();
  s.bound_multiplier = j.at("bound_multiplier").get<double>();
  return s;
}

GenDataSpec gen_data_spec_from_json(const ordered_json& j) {
  GenDataSpec s;
  s.shape = parse_data_shape(j.at("shape").get<std::string>());
  s.n = j.at("n").get<std::size_t>();
  s.d = j.at("d").get<std::size_t>();
  s.p = exp_from(j.at("p").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.scale = j.at("scale").get<double>();
  s.distances = j.at("distances").get<std::vector<double>>();
  s.background = j.at("background").get<std::size_t>();
  return s;
}

BenchSpec bench_spec_from_json(const ordered_json& j) {
  BenchSpec s;
  s.kinds = parse_list(j.at("kinds"), [](const std::string& t) { return parse_family_kind(t); });
  s.variants = parse_list(j.at("variants"), [](const std::string& t) { return parse_variant(t); });
  s.c_multipliers = j.at("c_multipliers").get<std::vector<double>>();
  s.cs = j.at("c").get<std::vector<double>>();
  s.levels = j.at("levels").get<std::vector<std::size_t>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.seeds = j.at("seeds").get<std::size_t>();
  s.unsafe_override = j.at("unsafe_override").get<bool>();
  s.max_entries = j.at("max_entries").get<std::uint64_t>();
  return s;
}

ProbeSpec probe_spec_from_json(const ordered_json& j) {
  ProbeSpec s;
  s.q = exp_from(j.at("q").get<std::string>());
  s.dims = j.at("dims").get<std::vector<std::size_t>>();
  s.epsilons = j.at("epsilons").get<std::vector<double>>();
  s.trials = j.at("trials").get<std::uint64_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

LevySpec levy_spec_from_json(const ordered_json& j) {
  LevySpec s;
  s.dims = j.at("dims").get<std::vector<std::size_t>>();
  s.shape = parse_vector_shape(j.at("shape").get<std::string>());
  s.lambda_fractions = j.at("lambda_fractions").get<std::vector<double>>();
  s.trials = j.at("trials").get<std::uint64_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace slsh::cli
