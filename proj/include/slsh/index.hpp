#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "slsh/core_math.hpp"
#include "slsh/dataset.hpp"
#include "slsh/hashing.hpp"

namespace slsh {

/// Where the 3^L adjacency enumeration happens.
enum class Variant : std::uint8_t {
  fast_query = 0,          // every point stored under all 3^L offset paths
  fast_preprocessing = 1,  // every point stored once; queries probe 3^L paths
};

[[nodiscard]] std::string_view to_string(Variant v) noexcept;
[[nodiscard]] Variant parse_variant(std::string_view text);

/// Parameters of a c-approximate near-neighbour index with radius 1.
/// Inputs are expected pre-scaled so that the search radius is 1.
struct IndexConfig {
  LpExponent p = 2;
  std::size_t d = 0;
  double c = 0.0;
  FamilyKind kind = FamilyKind::uniform_cube;
  Variant variant = Variant::fast_preprocessing;
  std::size_t levels = 0;  // 0 selects L automatically
  std::uint64_t master_seed = 0;
  bool unsafe_override = false;  // allow c <= tau
  std::uint64_t max_entries = std::uint64_t{1} << 26;
  std::optional<double> calibrated_p_fp;  // replaces the proven bound in L selection

  [[nodiscard]] double tau() const;
  /// Per-level false-positive probability used for L selection.
  [[nodiscard]] double p_fp() const;
  [[nodiscard]] double a() const;  // -ln p_fp
  [[nodiscard]] static double b();  // ln 3
  [[nodiscard]] double gamma() const { return b() / a(); }

  /// Throws ConstraintViolation / DomainError for unusable configurations.
  void validate() const;

  friend bool operator==(const IndexConfig&, const IndexConfig&) = default;
};

/// Number of hash levels for n points.
///
/// fast_query: ceil(ln(n/d) / a), so about d far points survive all levels.
/// fast_preprocessing: the integer minimiser of 3^L + n p_fp^L.
/// Both are clamped to at least 1. Throws ConstraintViolation if p_fp >= 1.
[[nodiscard]] std::size_t choose_levels(Variant variant, std::size_t n, std::size_t d, double p_fp);

/// 128-bit fingerprint of an L-tuple of bucket ids.
struct Fingerprint {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
};

[[nodiscard]] Fingerprint fingerprint(std::span<const std::int64_t> path) noexcept;

struct BuildStats {
  double wall_ms = 0.0;
  std::uint64_t entries = 0;
  std::uint64_t bytes = 0;
  friend bool operator==(const BuildStats&, const BuildStats&) = default;
};

struct QueryStats {
  std::uint64_t buckets_probed = 0;
  std::uint64_t candidates_scanned = 0;  // ids read from probed buckets
  std::uint64_t distance_evaluations = 0;
  std::uint64_t duplicates_suppressed = 0;
};

struct Neighbor {
  std::uint32_t id;
  double distance;
};

struct QueryResult {
  std::vector<Neighbor> neighbors;  // ascending id
  QueryStats stats;
};

/// c-approximate near-neighbour index with no false negatives: every point
/// within l_p distance 1 of a query is returned, nothing beyond c is.
class Index {
 public:
  struct Entry {
    Fingerprint key;
    std::uint32_t id;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  /// Throws DimensionError, ConstraintViolation or CapacityError.
  static Index build(Dataset points, IndexConfig config);

  [[nodiscard]] QueryResult query(std::span<const double> q) const;

  /// Bucket path (h_1(x), ..., h_L(x)).
  [[nodiscard]] std::vector<std::int64_t> path(std::span<const double> x) const;

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  static Index deserialize(std::span<const std::uint8_t> bytes);

  [[nodiscard]] const IndexConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t levels() const noexcept { return hashes_.size(); }
  [[nodiscard]] const std::vector<HashFunction>& hash_functions() const noexcept { return hashes_; }
  [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
  [[nodiscard]] const Dataset& points() const noexcept { return points_; }
  [[nodiscard]] const BuildStats& stats() const noexcept { return stats_; }

 private:
  Index(IndexConfig config, std::vector<HashFunction> hashes, std::vector<Entry> entries, Dataset points,
        BuildStats stats)
      : config_(std::move(config)),
        hashes_(std::move(hashes)),
        entries_(std::move(entries)),
        points_(std::move(points)),
        stats_(stats) {}

  void probe(const Fingerprint& key, std::vector<std::uint32_t>& out, QueryStats& stats) const;

  IndexConfig config_;
  std::vector<HashFunction> hashes_;
  std::vector<Entry> entries_;  // sorted by (key, id)
  Dataset points_;
  BuildStats stats_;
};

/// Calls f(path) for every offset path (base_i + e_i), e in {-1, 0, 1}^L,
/// in lexicographic order of e.
template <typename F>
void for_each_offset_path(std::span<const std::int64_t> base, F&& f) {
  const std::size_t L = base.size();
  std::vector<int> e(L, -1);
  std::vector<std::int64_t> path(L);
  for (;;) {
    for (std::size_t i = 0; i < L; ++i) path[i] = base[i] + e[i];
    f(std::span<const std::int64_t>(path));
    std::size_t i = L;
    while (i > 0) {
      --i;
      if (e[i] < 1) {
        ++e[i];
        break;
      }
      e[i] = -1;
      if (i == 0) return;
    }
    if (L == 0) return;
  }
}

}  // namespace slsh
