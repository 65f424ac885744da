#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "slsh/error.hpp"

namespace {

using namespace slsh;
using namespace slsh::cli;
using nlohmann::ordered_json;

constexpr int kExitVerdict = 1;
constexpr int kExitError = 2;

enum class Format { csv, json };

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw DomainError(fmt::format("unknown format '{}' (csv|json)", s));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path));
  out << text;
  if (!out) throw Error(fmt::format("failed writing '{}'", path));
}

void write_manifest(const std::string& out, const std::string& command, ordered_json params,
                    std::vector<std::string> outputs) {
  write_text(out + ".manifest.json", make_manifest(command, std::move(params), outputs).dump(2) + "\n");
}

ordered_json load_manifest_params(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open manifest '{}'", path));
  const auto j = ordered_json::parse(in);
  if (j.at("schema_version").get<int>() != kManifestSchemaVersion) {
    throw FormatError(fmt::format("manifest schema {} is not supported", j.at("schema_version").get<int>()));
  }
  if (j.at("command").get<std::string>() != command) {
    throw DomainError(fmt::format("manifest is for '{}', not '{}'", j.at("command").get<std::string>(), command));
  }
  return j.at("params");
}

template <typename T, typename F>
std::vector<T> parse_each(const std::vector<std::string>& xs, F f) {
  std::vector<T> out;
  for (const auto& x : xs) out.push_back(f(x));
  return out;
}

std::vector<LpExponent> parse_exponents(const std::vector<std::string>& xs) {
  return parse_each<LpExponent>(xs, [](const std::string& s) { return LpExponent::parse(s); });
}

std::vector<FamilyKind> parse_kinds(const std::vector<std::string>& xs) {
  return parse_each<FamilyKind>(xs, [](const std::string& s) { return parse_family_kind(s); });
}

std::string emit(Format f, const std::string& csv, const ordered_json& json) {
  return f == Format::csv ? csv : json.dump(2) + "\n";
}

// Small helper carrying the flags every reporting command shares.
struct Common {
  std::string out;
  std::string format = "csv";
  std::string manifest;

  void attach(CLI::App* app) {
    app->add_option("--out", out, "Output path")->required();
    app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--manifest", manifest, "Replay the parameters recorded in a manifest");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locality-sensitive hashing without false negatives: bound checks and index benchmarks"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a dataset file");
  GenDataSpec gen_spec;
  std::string gen_shape = "gaussian";
  std::string gen_p = "2";
  std::string gen_out;
  std::string gen_manifest;
  gen->add_option("--shape", gen_shape, "gaussian | uniform_cube_points | planted_pairs");
  gen->add_option("--n", gen_spec.n, "Number of points (pairs for planted_pairs)");
  gen->add_option("--d", gen_spec.d, "Dimension");
  gen->add_option("--p", gen_p, "l_p exponent tag (number, a/b or inf)");
  gen->add_option("--seed", gen_spec.seed, "RNG seed");
  gen->add_option("--scale", gen_spec.scale, "Gaussian sigma or cube half-width");
  gen->add_option("--distances", gen_spec.distances, "planted_pairs: distances cycled over the pairs")
      ->delimiter(',');
  gen->add_option("--background", gen_spec.background, "planted_pairs: extra gaussian points");
  gen->add_option("--out", gen_out, "Dataset path")->required();
  gen->add_option("--manifest", gen_manifest, "Replay the parameters recorded in a manifest");

  // ----------------------------------------------------------- verify-bounds
  auto* vb = app.add_subcommand("verify-bounds", "Monte Carlo check of the small-ball and false-positive bounds");
  VerifyBoundsSpec vb_spec;
  Common vb_common;
  std::string vb_mode = "all";
  std::vector<std::string> vb_kinds{"uniform_cube", "unit_sphere"};
  std::vector<std::string> vb_ps{"1", "2", "inf"};
  std::vector<std::string> vb_shapes{"axis", "flat", "two_coordinate"};
  vb->add_option("--mode", vb_mode, "small-ball | false-positive | all")
      ->check(CLI::IsMember({"small-ball", "false-positive", "all"}));
  vb->add_option("--kinds", vb_kinds, "Hash families")->delimiter(',');
  vb->add_option("--p", vb_ps, "l_p exponents for the false-positive grid")->delimiter(',');
  vb->add_option("--d", vb_spec.small_ball_dims, "Small-ball dimensions")->delimiter(',');
  vb->add_option("--fp-d", vb_spec.false_positive_dims, "False-positive dimensions")->delimiter(',');
  vb->add_option("--alpha", vb_spec.alpha_fractions, "alpha as fractions of ||x||_2")->delimiter(',');
  vb->add_option("--c-multipliers", vb_spec.c_multipliers, "c as multiples of tau")->delimiter(',');
  vb->add_option("--shapes", vb_shapes, "axis, flat, two_coordinate")->delimiter(',');
  vb->add_option("--trials", vb_spec.trials, "Trials per cell");
  vb->add_option("--seed", vb_spec.seed, "Master seed");
  vb->add_option("--seeds", vb_spec.seeds, "Seed sweep size");
  vb->add_option("--bound-multiplier", vb_spec.bound_multiplier, "Scale every bound (self-test)");
  vb_common.attach(vb);

  // ------------------------------------------------------------- bench-index
  auto* bench = app.add_subcommand("bench-index", "Build indexes over a config grid and score them");
  BenchSpec bench_spec;
  Common bench_common;
  std::string bench_data;
  std::string bench_queries;
  std::vector<std::string> bench_kinds{"uniform_cube", "unit_sphere"};
  std::vector<std::string> bench_variants{"fast_query", "fast_preprocessing"};
  bench->add_option("--data", bench_data, "Dataset file");
  bench->add_option("--queries", bench_queries, "Query file");
  bench->add_option("--kinds", bench_kinds, "Hash families")->delimiter(',');
  bench->add_option("--variants", bench_variants, "fast_query, fast_preprocessing")->delimiter(',');
  bench->add_option("--c-multipliers", bench_spec.c_multipliers, "c as multiples of tau")->delimiter(',');
  bench->add_option("--c", bench_spec.cs, "Absolute c values (override multipliers)")->delimiter(',');
  bench->add_option("--levels", bench_spec.levels, "Level counts, 0 = automatic")->delimiter(',');
  bench->add_option("--seed", bench_spec.seed, "Master seed");
  bench->add_option("--seeds", bench_spec.seeds, "Seed sweep size");
  bench->add_flag("--unsafe-override", bench_spec.unsafe_override, "Allow c <= tau");
  bench->add_option("--max-entries", bench_spec.max_entries, "Refuse indexes larger than this");
  bench_common.attach(bench);

  // ------------------------------------------------------------------ build
  auto* build = app.add_subcommand("build", "Build one index and serialize it");
  std::string build_data;
  std::string build_out;
  std::string build_kind = "uniform_cube";
  std::string build_variant = "fast_preprocessing";
  std::optional<double> build_c;
  double build_c_mult = 2.0;
  std::size_t build_levels = 0;
  std::uint64_t build_seed = 0;
  bool build_unsafe = false;
  std::uint64_t build_max_entries = std::uint64_t{1} << 26;
  build->add_option("--data", build_data, "Dataset file")->required();
  build->add_option("--out", build_out, "Index file")->required();
  build->add_option("--kind", build_kind, "Hash family");
  build->add_option("--variant", build_variant, "fast_query or fast_preprocessing");
  build->add_option("--c", build_c, "Approximation factor");
  build->add_option("--c-multiplier", build_c_mult, "c as a multiple of tau when --c is absent");
  build->add_option("--levels", build_levels, "Level count, 0 = automatic");
  build->add_option("--seed", build_seed, "Master seed")->required();
  build->add_flag("--unsafe-override", build_unsafe, "Allow c <= tau");
  build->add_option("--max-entries", build_max_entries, "Refuse indexes larger than this");

  // ------------------------------------------------------------------ query
  auto* query = app.add_subcommand("query", "Query a serialized index");
  std::string query_index;
  std::string query_queries;
  std::string query_out;
  query->add_option("--index", query_index, "Index file")->required();
  query->add_option("--queries", query_queries, "Query file")->required();
  query->add_option("--out", query_out, "JSON lines output")->required();

  // ------------------------------------------------------- probe-conjecture
  auto* probe = app.add_subcommand("probe-conjecture", "Small-ball table for l_q sphere projections");
  ProbeSpec probe_spec;
  Common probe_common;
  std::string probe_q = "2";
  probe->add_option("--q", probe_q, "Sphere exponent q");
  probe->add_option("--d", probe_spec.dims, "Dimensions")->delimiter(',');
  probe->add_option("--epsilon", probe_spec.epsilons, "Epsilon grid")->delimiter(',');
  probe->add_option("--trials", probe_spec.trials, "Trials per dimension");
  probe->add_option("--seed", probe_spec.seed, "Master seed");
  probe_common.attach(probe);

  // ------------------------------------------------------------------- levy
  auto* levy = app.add_subcommand("levy", "Levy concentration of uniform-cube projections vs its bound");
  LevySpec levy_spec;
  Common levy_common;
  std::string levy_shape = "flat";
  levy->add_option("--d", levy_spec.dims, "Dimensions")->delimiter(',');
  levy->add_option("--shape", levy_shape, "axis, flat, two_coordinate");
  levy->add_option("--lambda", levy_spec.lambda_fractions, "lambda as fractions of ||x||_2")->delimiter(',');
  levy->add_option("--trials", levy_spec.trials, "Samples per dimension");
  levy->add_option("--seed", levy_spec.seed, "Master seed");
  levy_common.attach(levy);

  // --seed is mandatory for every randomized command unless a manifest supplies it.
  auto require_seed = [](CLI::App* sub, const std::string& manifest) {
    if (manifest.empty() && sub->count("--seed") == 0) throw CLI::RequiredError("--seed");
  };

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      require_seed(gen, gen_manifest);
      if (!gen_manifest.empty()) {
        gen_spec = gen_data_spec_from_json(load_manifest_params(gen_manifest, "gen-data"));
      } else {
        if (gen->count("--n") == 0 || gen->count("--d") == 0) throw CLI::RequiredError("--n and --d");
        gen_spec.shape = parse_data_shape(gen_shape);
        gen_spec.p = LpExponent::parse(gen_p);
      }
      const auto generated = run_gen_data(gen_spec);
      std::vector<std::string> outputs{gen_out};
      save_dataset(gen_out, generated.data);
      if (generated.queries) {
        save_dataset(gen_out + ".queries", *generated.queries);
        std::string truth = "pair,data_id,query_id,distance\n";
        for (std::size_t i = 0; i < generated.pair_distances.size(); ++i) {
          truth += fmt::format("{},{},{},{}\n", i, i, i, format_double(generated.pair_distances[i]));
        }
        write_text(gen_out + ".truth.csv", truth);
        outputs.push_back(gen_out + ".queries");
        outputs.push_back(gen_out + ".truth.csv");
      }
      write_manifest(gen_out, "gen-data", to_json(gen_spec), outputs);
      return 0;
    }

    if (*vb) {
      require_seed(vb, vb_common.manifest);
      if (!vb_common.manifest.empty()) {
        vb_spec = verify_bounds_spec_from_json(load_manifest_params(vb_common.manifest, "verify-bounds"));
      } else {
        vb_spec.small_ball = vb_mode != "false-positive";
        vb_spec.false_positive = vb_mode != "small-ball";
        vb_spec.kinds = parse_kinds(vb_kinds);
        vb_spec.ps = parse_exponents(vb_ps);
        vb_spec.shapes = parse_each<VectorShape>(vb_shapes, [](const std::string& s) { return parse_vector_shape(s); });
      }
      const auto rows = run_verify_bounds(vb_spec);
      const auto fmt_kind = parse_format(vb_common.format);
      write_text(vb_common.out, emit(fmt_kind, bound_rows_csv(rows), bound_rows_json(rows)));
      write_manifest(vb_common.out, "verify-bounds", to_json(vb_spec), {vb_common.out});
      std::size_t violated = 0;
      std::size_t vacuous = 0;
      for (const auto& r : rows) {
        violated += r.violated ? 1 : 0;
        vacuous += r.vacuous ? 1 : 0;
      }
      std::cerr << fmt::format("verify-bounds: {} cells, {} vacuous, {} violated\n", rows.size(), vacuous, violated);
      return violated == 0 ? 0 : kExitVerdict;
    }

    if (*bench) {
      require_seed(bench, bench_common.manifest);
      if (!bench_common.manifest.empty()) {
        const auto params = load_manifest_params(bench_common.manifest, "bench-index");
        bench_spec = bench_spec_from_json(params.at("spec"));
        bench_data = params.at("data").get<std::string>();
        bench_queries = params.at("queries").get<std::string>();
      } else {
        if (bench_data.empty() || bench_queries.empty()) throw CLI::RequiredError("--data and --queries");
        bench_spec.kinds = parse_kinds(bench_kinds);
        bench_spec.variants =
            parse_each<Variant>(bench_variants, [](const std::string& s) { return parse_variant(s); });
      }
      const auto data = load_dataset(bench_data);
      const auto queries = load_dataset(bench_queries);
      const auto rows = run_bench_index(data, queries, bench_spec);
      const auto fmt_kind = parse_format(bench_common.format);
      write_text(bench_common.out, emit(fmt_kind, bench_rows_csv(rows), bench_rows_json(rows)));
      write_text(bench_common.out + ".timings.csv", bench_timings_csv(rows));
      std::string cex = "kind,variant,c,levels,seed,query_id,point_id,distance\n";
      bool perfect = true;
      for (const auto& r : rows) {
        perfect = perfect && r.recall_min == 1.0 && r.precision_min == 1.0;
        for (const auto& e : r.counterexamples) {
          cex += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r.kind), to_string(r.variant), format_double(r.c),
                             r.levels, r.seed, e.query_id, e.point_id, format_double(e.distance));
        }
      }
      write_text(bench_common.out + ".counterexamples.csv", cex);
      ordered_json params{{"data", bench_data}, {"queries", bench_queries}, {"spec", to_json(bench_spec)}};
      write_manifest(bench_common.out, "bench-index", std::move(params),
                     {bench_common.out, bench_common.out + ".timings.csv", bench_common.out + ".counterexamples.csv"});
      if (!perfect) std::cerr << "bench-index: recall or precision below 1\n";
      return perfect ? 0 : kExitVerdict;
    }

    if (*build) {
      auto data = load_dataset(build_data);
      IndexConfig cfg;
      cfg.p = data.p();
      cfg.d = data.dim();
      cfg.kind = parse_family_kind(build_kind);
      cfg.variant = parse_variant(build_variant);
      cfg.c = build_c ? *build_c : build_c_mult * family_tau(cfg.kind, cfg.p, cfg.d);
      cfg.levels = build_levels;
      cfg.master_seed = build_seed;
      cfg.unsafe_override = build_unsafe;
      cfg.max_entries = build_max_entries;
      const auto index = Index::build(std::move(data), cfg);
      const auto bytes = index.serialize();
      std::ofstream out(build_out, std::ios::binary);
      if (!out) throw Error(fmt::format("cannot open '{}' for writing", build_out));
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw Error(fmt::format("failed writing '{}'", build_out));
      ordered_json params{{"data", build_data},       {"kind", build_kind},   {"variant", build_variant},
                          {"c", cfg.c},               {"levels", index.levels()}, {"seed", build_seed},
                          {"unsafe_override", build_unsafe}, {"max_entries", build_max_entries}};
      write_manifest(build_out, "build", std::move(params), {build_out});
      std::cerr << fmt::format("build: {} points, L = {}, {} entries\n", index.points().size(), index.levels(),
                               index.entries().size());
      return 0;
    }

    if (*query) {
      std::ifstream in(query_index, std::ios::binary);
      if (!in) throw Error(fmt::format("cannot open index '{}'", query_index));
      const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const auto index = Index::deserialize(bytes);
      const auto queries = load_dataset(query_queries);
      std::string out;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto res = index.query(queries[i]);
        ordered_json neighbors = ordered_json::array();
        for (const auto& nb : res.neighbors) neighbors.push_back({{"id", nb.id}, {"distance", nb.distance}});
        ordered_json line{{"query", i},
                          {"neighbors", std::move(neighbors)},
                          {"stats",
                           {{"buckets_probed", res.stats.buckets_probed},
                            {"candidates_scanned", res.stats.candidates_scanned},
                            {"distance_evaluations", res.stats.distance_evaluations},
                            {"duplicates_suppressed", res.stats.duplicates_suppressed}}}};
        out += line.dump() + "\n";
      }
      write_text(query_out, out);
      write_manifest(query_out, "query", {{"index", query_index}, {"queries", query_queries}}, {query_out});
      return 0;
    }

    if (*probe) {
      require_seed(probe, probe_common.manifest);
      if (!probe_common.manifest.empty()) {
        probe_spec = probe_spec_from_json(load_manifest_params(probe_common.manifest, "probe-conjecture"));
      } else {
        probe_spec.q = LpExponent::parse(probe_q);
      }
      const auto rows = run_probe_conjecture(probe_spec);
      write_text(probe_common.out,
                 emit(parse_format(probe_common.format), probe_rows_csv(rows), probe_rows_json(rows)));
      write_manifest(probe_common.out, "probe-conjecture", to_json(probe_spec), {probe_common.out});
      return 0;
    }

    if (*levy) {
      require_seed(levy, levy_common.manifest);
      if (!levy_common.manifest.empty()) {
        levy_spec = levy_spec_from_json(load_manifest_params(levy_common.manifest, "levy"));
      } else {
        levy_spec.shape = parse_vector_shape(levy_shape);
      }
      const auto rows = run_levy(levy_spec);
      write_text(levy_common.out, emit(parse_format(levy_common.format), levy_rows_csv(rows), levy_rows_json(rows)));
      write_manifest(levy_common.out, "levy", to_json(levy_spec), {levy_common.out});
      bool ok = true;
      for (const auto& r : rows) ok = ok && !r.violated;
      return ok ? 0 : kExitVerdict;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
