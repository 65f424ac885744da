#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slsh/anticoncentration.hpp"
#include "slsh/core_math.hpp"
#include "slsh/dataset.hpp"
#include "slsh/hashing.hpp"
#include "slsh/index.hpp"
#include "slsh/oracle.hpp"

namespace slsh::cli {

inline constexpr int kManifestSchemaVersion = 1;

// ---------------------------------------------------------------- gen-data

enum class DataShape { gaussian, uniform_cube_points, planted_pairs };

struct GenDataSpec {
  DataShape shape = DataShape::gaussian;
  std::size_t n = 0;
  std::size_t d = 0;
  LpExponent p = 2;
  std::uint64_t seed = 0;
  double scale = 10.0;                            // gaussian sigma or cube half-width
  std::vector<double> distances{0.5, 0.999, 1.0};  // planted_pairs, cycled over the pairs
  std::size_t background = 0;                     // planted_pairs: extra gaussian points in the data file
};

struct GeneratedData {
  Dataset data;
  std::optional<Dataset> queries;     // planted_pairs: partner of data row i is query row i
  std::vector<double> pair_distances;  // planted_pairs: ||data_i - query_i||_p as written
};

[[nodiscard]] GeneratedData run_gen_data(const GenDataSpec& spec);

// ----------------------------------------------------------- verify-bounds

enum class BoundTest { small_ball, false_positive };

struct VerifyBoundsSpec {
  bool small_ball = true;
  bool false_positive = true;
  std::vector<FamilyKind> kinds{FamilyKind::uniform_cube, FamilyKind::unit_sphere};
  std::vector<LpExponent> ps{LpExponent(1), LpExponent(2), LpExponent::infinity()};  // false-positive cells
  std::vector<std::size_t> small_ball_dims{2, 8, 64};
  std::vector<std::size_t> false_positive_dims{4, 16};
  std::vector<double> alpha_fractions{0.05, 0.1, 0.25, 0.5};  // alpha = fraction * ||x||_2
  std::vector<double> c_multipliers{4, 10, 20};                // c = k * tau
  std::vector<VectorShape> shapes{VectorShape::axis, VectorShape::flat, VectorShape::two_coordinate};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  std::size_t seeds = 5;
  double bound_multiplier = 1.0;  // self-test knob; values < 1 must produce violations
};

struct BoundRow {
  BoundTest test;
  FamilyKind kind;
  LpExponent p;
  std::size_t d;
  double alpha_or_c;
  std::uint64_t trials;
  std::uint64_t hits;
  double p_hat;
  double ci_low;
  double ci_high;
  std::optional<double> bound;
  bool vacuous;
  VectorShape shape;
  std::uint64_t seed;
  bool violated;  // non-vacuous bound below the whole confidence interval
};

[[nodiscard]] std::vector<BoundRow> run_verify_bounds(const VerifyBoundsSpec& spec);
[[nodiscard]] std::string bound_rows_csv(const std::vector<BoundRow>& rows);
[[nodiscard]] nlohmann::ordered_json bound_rows_json(const std::vector<BoundRow>& rows);

// ------------------------------------------------------------- bench-index

struct BenchSpec {
  std::vector<FamilyKind> kinds{FamilyKind::uniform_cube, FamilyKind::unit_sphere};
  std::vector<Variant> variants{Variant::fast_query, Variant::fast_preprocessing};
  std::vector<double> c_multipliers{2.0};  // c = k * tau(kind, p, d)
  std::vector<double> cs;                  // absolute c values, used instead when nonempty
  std::vector<std::size_t> levels{0};
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  bool unsafe_override = false;
  std::uint64_t max_entries = std::uint64_t{1} << 26;
};

struct BenchRow {
  FamilyKind kind;
  Variant variant;
  LpExponent p;
  std::size_t d;
  std::size_t n;
  double c;
  double tau;
  std::size_t levels;
  std::uint64_t seed;
  std::size_t queries;
  double recall_min;
  double recall_mean;
  double precision_min;
  double mean_candidates;
  double mean_buckets;
  double mean_distance_evals;
  std::uint64_t entries;
  // Wall-clock figures; kept out of the deterministic CSV.
  double build_ms;
  double query_us;
  std::vector<Counterexample> counterexamples;
};

[[nodiscard]] std::vector<BenchRow> run_bench_index(const Dataset& data, const Dataset& queries,
                                                    const BenchSpec& spec);
[[nodiscard]] std::string bench_rows_csv(const std::vector<BenchRow>& rows);
[[nodiscard]] std::string bench_timings_csv(const std::vector<BenchRow>& rows);
[[nodiscard]] nlohmann::ordered_json bench_rows_json(const std::vector<BenchRow>& rows);

// -------------------------------------------------------- probe-conjecture

struct ProbeSpec {
  LpExponent q = 2;
  std::vector<std::size_t> dims{16, 64, 256};
  std::vector<double> epsilons{0.0, 0.001, 0.005, 0.01, 0.05};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
};

struct ProbeRow {
  LpExponent q;
  std::size_t d;
  ConjectureRow row;
};

[[nodiscard]] std::vector<ProbeRow> run_probe_conjecture(const ProbeSpec& spec);
[[nodiscard]] std::string probe_rows_csv(const std::vector<ProbeRow>& rows);
[[nodiscard]] nlohmann::ordered_json probe_rows_json(const std::vector<ProbeRow>& rows);

// -------------------------------------------------------------------- levy

struct LevySpec {
  std::vector<std::size_t> dims{4, 16};
  VectorShape shape = VectorShape::flat;
  std::vector<double> lambda_fractions{0.1, 0.5, 1.0};  // lambda = fraction * ||x||_2
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
};

struct LevyRow {
  std::size_t d;
  VectorShape shape;
  double lambda;
  std::uint64_t samples;
  double empirical_q;
  double theoretical_q;  // clamped to 1
  double sigma;
  bool violated;  // empirical > theoretical + 3 sigma
};

[[nodiscard]] std::vector<LevyRow> run_levy(const LevySpec& spec);
[[nodiscard]] std::string levy_rows_csv(const std::vector<LevyRow>& rows);
[[nodiscard]] nlohmann::ordered_json levy_rows_json(const std::vector<LevyRow>& rows);

// --------------------------------------------------------------- manifests

/// Run manifest: schema version, command, resolved parameters, outputs and
/// the only wall-clock timestamp of the run.
[[nodiscard]] nlohmann::ordered_json make_manifest(const std::string& command, nlohmann::ordered_json params,
                                                   const std::vector<std::string>& outputs);

[[nodiscard]] nlohmann::ordered_json to_json(const VerifyBoundsSpec& spec);
[[nodiscard]] nlohmann::ordered_json to_json(const GenDataSpec& spec);
[[nodiscard]] nlohmann::ordered_json to_json(const BenchSpec& spec);
[[nodiscard]] nlohmann::ordered_json to_json(const ProbeSpec& spec);
[[nodiscard]] nlohmann::ordered_json to_json(const LevySpec& spec);

// Inverses of to_json, used to replay a manifest's params.
[[nodiscard]] VerifyBoundsSpec verify_bounds_spec_from_json(const nlohmann::ordered_json& j);
[[nodiscard]] GenDataSpec gen_data_spec_from_json(const nlohmann::ordered_json& j);
[[nodiscard]] BenchSpec bench_spec_from_json(const nlohmann::ordered_json& j);
[[nodiscard]] ProbeSpec probe_spec_from_json(const nlohmann::ordered_json& j);
[[nodiscard]] LevySpec levy_spec_from_json(const nlohmann::ordered_json& j);

[[nodiscard]] std::string_view to_string(DataShape shape) noexcept;
[[nodiscard]] DataShape parse_data_shape(std::string_view text);

}  // namespace slsh::cli
