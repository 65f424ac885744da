#include "slsh/oracle.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "slsh/error.hpp"

namespace slsh {

std::vector<std::uint32_t> range_search_exact(const Dataset& data, std::span<const double> q, double radius,
                                              const LpExponent& p) {
  if (!(radius >= 0.0)) throw DomainError(fmt::format("radius {} must be nonnegative", radius));
  if (q.size() != data.dim()) {
    throw DimensionError(fmt::format("query of dimension {} against dataset of dimension {}", q.size(), data.dim()));
  }
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (lp_distance(data[i], q, p) <= radius) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

GroundTruth ground_truth(const Dataset& data, std::span<const double> q, std::uint32_t query_id, double c,
                         const LpExponent& p) {
  if (q.size() != data.dim()) {
    throw DimensionError(fmt::format("query of dimension {} against dataset of dimension {}", q.size(), data.dim()));
  }
  GroundTruth gt{query_id, {}, {}, std::nullopt};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    const double dist = lp_distance(data[i], q, p);
    if (dist <= 1.0) gt.within_r.push_back(id);
    if (dist <= c) gt.within_c.push_back(id);
    if (!gt.nearest || dist < gt.nearest->distance) gt.nearest = Neighbor{id, dist};
  }
  return gt;
}

void write_ground_truth_jsonl(std::ostream& out, std::span<const GroundTruth> truth) {
  for (const auto& gt : truth) {
    nlohmann::ordered_json j;
    j["query"] = gt.query_id;
    j["within_r"] = gt.within_r;
    j["within_c"] = gt.within_c;
    if (gt.nearest) {
      j["nearest"] = {{"id", gt.nearest->id}, {"distance", gt.nearest->distance}};
    } else {
      j["nearest"] = nullptr;
    }
    out << j.dump() << '\n';
  }
}

RecallReport recall_report(const Searcher& search, const Dataset& data, const Dataset& queries, double c) {
  if (queries.empty()) throw DomainError("recall report needs at least one query");
  RecallReport report;
  double recall_sum = 0.0;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto q = queries[qi];
    const auto qid = static_cast<std::uint32_t>(qi);
    const auto gt = ground_truth(data, q, qid, c, data.p());
    auto returned = search(q);
    std::sort(returned.begin(), returned.end());
    returned.erase(std::unique(returned.begin(), returned.end()), returned.end());

    std::vector<std::uint32_t> hit_r;
    std::set_intersection(returned.begin(), returned.end(), gt.within_r.begin(), gt.within_r.end(),
                          std::back_inserter(hit_r));
    std::vector<std::uint32_t> hit_c;
    std::set_intersection(returned.begin(), returned.end(), gt.within_c.begin(), gt.within_c.end(),
                          std::back_inserter(hit_c));

    RecallRow row{qid, 1.0, 1.0, returned.size(), gt.within_r.size()};
    if (!gt.within_r.empty()) {
      row.recall = static_cast<double>(hit_r.size()) / static_cast<double>(gt.within_r.size());
    }
    if (!returned.empty()) row.precision = static_cast<double>(hit_c.size()) / static_cast<double>(returned.size());

    if (hit_r.size() < gt.within_r.size()) {
      std::vector<std::uint32_t> missed;
      std::set_difference(gt.within_r.begin(), gt.within_r.end(), hit_r.begin(), hit_r.end(),
                          std::back_inserter(missed));
      for (const auto id : missed) report.counterexamples.push_back({qid, id, lp_distance(data[id], q, data.p())});
    }
    report.min_recall = std::min(report.min_recall, row.recall);
    report.min_precision = std::min(report.min_precision, row.precision);
    recall_sum += row.recall;
    report.rows.push_back(row);
  }
  report.mean_recall = recall_sum / static_cast<double>(queries.size());
  return report;
}

RecallReport recall_report(const Index& index, const Dataset& data, const Dataset& queries) {
  if (!(index.config().p == data.p())) {
    throw DomainError(fmt::format("index searches l_{} but the dataset is tagged l_{}", index.config().p.to_string(),
                                  data.p().to_string()));
  }
  const Searcher search = [&](std::span<const double> q) {
    std::vector<std::uint32_t> ids;
    for (const auto& nb : index.query(q).neighbors) ids.push_back(nb.id);
    return ids;
  };
  return recall_report(search, data, queries, index.config().c);
}

}  // namespace slsh
