#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "slsh/core_math.hpp"
#include "slsh/dataset.hpp"
#include "slsh/index.hpp"

namespace slsh {

// Brute-force ground truth. Deliberately a plain scan: it is what the index
// is checked against.

/// Ids i with ||x_i - q||_p <= radius, ascending.
[[nodiscard]] std::vector<std::uint32_t> range_search_exact(const Dataset& data, std::span<const double> q,
                                                            double radius, const LpExponent& p);

struct GroundTruth {
  std::uint32_t query_id;
  std::vector<std::uint32_t> within_r;  // distance <= 1
  std::vector<std::uint32_t> within_c;  // distance <= c
  std::optional<Neighbor> nearest;      // lowest id among ties
};

[[nodiscard]] GroundTruth ground_truth(const Dataset& data, std::span<const double> q, std::uint32_t query_id,
                                       double c, const LpExponent& p);

/// One JSON object per line: query, within_r, within_c, nearest {id, distance}.
void write_ground_truth_jsonl(std::ostream& out, std::span<const GroundTruth> truth);

/// A radius-1 point the searcher failed to return.
struct Counterexample {
  std::uint32_t query_id;
  std::uint32_t point_id;
  double distance;
};

struct RecallRow {
  std::uint32_t query_id;
  double recall;     // |returned & within_r| / |within_r|; 1 when within_r is empty
  double precision;  // |returned & within_c| / |returned|; 1 when nothing is returned
  std::size_t returned;
  std::size_t within_r;
};

struct RecallReport {
  std::vector<RecallRow> rows;
  std::vector<Counterexample> counterexamples;
  double min_recall = 1.0;
  double min_precision = 1.0;
  double mean_recall = 1.0;
};

/// Ids a searcher returns for a query.
using Searcher = std::function<std::vector<std::uint32_t>(std::span<const double>)>;

[[nodiscard]] RecallReport recall_report(const Searcher& search, const Dataset& data, const Dataset& queries,
                                         double c);
[[nodiscard]] RecallReport recall_report(const Index& index, const Dataset& data, const Dataset& queries);

}  // namespace slsh
