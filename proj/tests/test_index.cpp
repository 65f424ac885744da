#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slsh/error.hpp"
#include "slsh/anticoncentration.hpp"
#include "slsh/index.hpp"
#include "slsh/oracle.hpp"
#include "slsh/rng.hpp"

using namespace slsh;

namespace {

const LpExponent kInf = LpExponent::infinity();

IndexConfig config_for(FamilyKind kind, Variant variant, const LpExponent& p, std::size_t d, double c_over_tau,
                       std::size_t levels = 0, std::uint64_t seed = 1) {
  IndexConfig cfg;
  cfg.p = p;
  cfg.d = d;
  cfg.kind = kind;
  cfg.variant = variant;
  cfg.c = c_over_tau * family_tau(kind, p, d);
  cfg.levels = levels;
  cfg.master_seed = seed;
  return cfg;
}

Dataset random_points(std::size_t n, std::size_t d, const LpExponent& p, std::uint64_t seed, double spread = 50.0) {
  Dataset data(d, p);
  Rng rng(seed);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = rng.uniform(-spread, spread);
    data.push_back(row);
  }
  return data;
}

std::vector<std::uint32_t> ids(const QueryResult& r) {
  std::vector<std::uint32_t> out;
  for (const auto& nb : r.neighbors) out.push_back(nb.id);
  return out;
}

}  // namespace

TEST(ChooseLevels, SinglePoint) {
  EXPECT_EQ(choose_levels(Variant::fast_query, 1, 4, 0.5), 1u);
  EXPECT_EQ(choose_levels(Variant::fast_preprocessing, 1, 4, 0.5), 1u);
}

TEST(ChooseLevels, FastPreprocessingIsTheIntegerMinimiser) {
  // Frozen from the exhaustive oracle: cost(6) = 729 + 1371.7 < cost(7) = 2187 + 457.2.
  EXPECT_EQ(oracle::argmin_levels(1e6, 1.0 / 3.0), 6u);
  EXPECT_EQ(choose_levels(Variant::fast_preprocessing, 1000000, 8, 1.0 / 3.0), 6u);
  for (double p_fp : {0.05, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.9}) {
    for (std::size_t n : {2u, 10u, 1000u, 40000u, 1000000u, 50000000u}) {
      EXPECT_EQ(choose_levels(Variant::fast_preprocessing, n, 8, p_fp), oracle::argmin_levels(double(n), p_fp))
          << "n=" << n << " p=" << p_fp;
    }
  }
}

TEST(ChooseLevels, FastQueryLeavesAboutDFarPoints) {
  EXPECT_EQ(choose_levels(Variant::fast_query, 1000, 8, 1.0 / std::exp(1.0)), 5u);  // ceil(ln 125)
  for (double p_fp : {0.1, 0.25, 0.5, 0.75}) {
    for (std::size_t n : {9u, 100u, 2000u, 123456u}) {
      EXPECT_EQ(choose_levels(Variant::fast_query, n, 8, p_fp), oracle::smallest_levels_below(double(n), 8, p_fp))
          << "n=" << n << " p=" << p_fp;
    }
  }
}

TEST(ChooseLevels, RejectsUselessFamilies) {
  EXPECT_THROW((void)choose_levels(Variant::fast_query, 100, 4, 1.0), ConstraintViolation);
  EXPECT_THROW((void)choose_levels(Variant::fast_query, 0, 4, 0.5), DomainError);
}

TEST(IndexConfig, ExponentBookkeeping) {
  const auto cfg = config_for(FamilyKind::unit_sphere, Variant::fast_query, 2, 4, 4.0);
  EXPECT_NEAR(cfg.p_fp(), 0.25, 1e-15);
  EXPECT_NEAR(cfg.a(), std::log(4.0), 1e-15);
  EXPECT_NEAR(IndexConfig::b(), std::log(3.0), 1e-15);
  EXPECT_NEAR(cfg.gamma(), std::log(3.0) / std::log(4.0), 1e-15);
}

TEST(IndexBuild, RejectsCAtOrBelowTau) {
  auto cfg = config_for(FamilyKind::uniform_cube, Variant::fast_preprocessing, 2, 4, 1.0);
  const auto data = random_points(10, 4, 2, 1);
  EXPECT_THROW((void)Index::build(data, cfg), ConstraintViolation);
  cfg.unsafe_override = true;
  cfg.levels = 2;
  EXPECT_NO_THROW((void)Index::build(data, cfg));
}

TEST(IndexBuild, RejectsBadInputs) {
  const auto data = random_points(10, 4, 2, 1);
  auto cfg = config_for(FamilyKind::uniform_cube, Variant::fast_preprocessing, 2, 3, 2.0);
  EXPECT_THROW((void)Index::build(data, cfg), DimensionError);
  auto lq = config_for(FamilyKind::uniform_cube, Variant::fast_preprocessing, 2, 4, 2.0);
  lq.kind = FamilyKind::lq_sphere_experimental;
  EXPECT_THROW((void)Index::build(data, lq), DomainError);
  auto big = config_for(FamilyKind::uniform_cube, Variant::fast_query, 2, 4, 2.0, 10);
  big.max_entries = 1000;
  EXPECT_THROW((void)Index::build(data, big), CapacityError);
  EXPECT_THROW((void)Index::build(Dataset(4, 2), config_for(FamilyKind::uniform_cube, Variant::fast_query, 2, 4, 2.0)),
               DomainError);
}

TEST(IndexBuild, EntryCounts) {
  const auto one = random_points(1, 4, 2, 3);
  const auto fq = Index::build(one, config_for(FamilyKind::uniform_cube, Variant::fast_query, 2, 4, 2.0, 1));
  EXPECT_EQ(fq.entries().size(), 3u);
  const auto five = random_points(5, 4, 2, 3);
  const auto fp = Index::build(five, config_for(FamilyKind::uniform_cube, Variant::fast_preprocessing, 2, 4, 2.0));
  EXPECT_EQ(fp.entries().size(), 5u);
}

TEST(IndexBuild, EveryPointStoredUnderItsPaths) {
  const auto data = random_points(200, 6, 2, 4);
  const auto fq = Index::build(data, config_for(FamilyKind::unit_sphere, Variant::fast_query, 2, 6, 2.0, 4));
  std::map<std::uint32_t, std::size_t> copies;
  for (const auto& e : fq.entries()) ++copies[e.id];
  ASSERT_EQ(copies.size(), 200u);
  for (const auto& [id, count] : copies) EXPECT_EQ(count, 81u);

  const auto fp = Index::build(data, config_for(FamilyKind::unit_sphere, Variant::fast_preprocessing, 2, 6, 2.0, 4));
  ASSERT_EQ(fp.entries().size(), 200u);
  for (const auto& e : fp.entries()) EXPECT_EQ(e.key, fingerprint(fp.path(data[e.id])));
}

TEST(IndexQuery, IdenticalPointsShareABucket) {
  Dataset data(3, 2);
  for (int i = 0; i < 3; ++i) data.push_back(std::vector<double>{1.5, -2.0, 0.25});
  for (auto variant : {Variant::fast_query, Variant::fast_preprocessing}) {
    const auto index = Index::build(data, config_for(FamilyKind::uniform_cube, variant, 2, 3, 2.0));
    const auto r = index.query(data[0]);
    EXPECT_EQ(ids(r), (std::vector<std::uint32_t>{0, 1, 2}));
    for (const auto& nb : r.neighbors) EXPECT_EQ(nb.distance, 0.0);
  }
}

TEST(IndexQuery, PlantedNearPairsAreAlwaysFound) {
  for (auto variant : {Variant::fast_query, Variant::fast_preprocessing}) {
    for (const LpExponent p : {LpExponent(1), LpExponent(2), kInf}) {
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t d = 4;
        std::vector<double> x(d);
        std::vector<double> u(d);
        for (auto& v : x) v = rng.uniform(-20, 20);
        rng.fill_normal(u);
        const double un = lp_norm(u, p);
        for (double r : {0.999, 1.0}) {
          std::vector<double> y(d);
          for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + r * u[i] / un;
          if (lp_distance(x, y, p) > 1.0) continue;
          Dataset data(d, p);
          data.push_back(x);
          const auto kind = seed % 2 ? FamilyKind::uniform_cube : FamilyKind::unit_sphere;
          const auto index = Index::build(data, config_for(kind, variant, p, d, 2.0, 3, seed));
          EXPECT_EQ(ids(index.query(y)), (std::vector<std::uint32_t>{0}));
        }
      }
    }
  }
}

TEST(IndexQuery, FarPointsAreNeverReturned) {
  const std::size_t d = 4;
  auto cfg = config_for(FamilyKind::uniform_cube, Variant::fast_preprocessing, 2, d, 2.0, 2);
  Dataset data(d, 2);
  data.push_back(std::vector<double>{0, 0, 0, 0});
  data.push_back(std::vector<double>{2 * cfg.c, 0, 0, 0});
  const auto index = Index::build(data, cfg);
  const auto r = index.query(std::vector<double>{0, 0, 0, 0});
  EXPECT_EQ(ids(r), (std::vector<std::uint32_t>{0}));
}

TEST(IndexQuery, VariantsAgreeOnTheRadiusOneSet) {
  const std::size_t d = 4;
  Dataset data = random_points(500, d, 2, 6, 3.0);  // dense, so many radius-1 neighbours
  const auto fq = Index::build(data, config_for(FamilyKind::unit_sphere, Variant::fast_query, 2, d, 2.0, 3));
  const auto fp = Index::build(data, config_for(FamilyKind::unit_sphere, Variant::fast_preprocessing, 2, d, 2.0, 3));
  const auto queries = random_points(100, d, 2, 7, 3.0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto exact = range_search_exact(data, queries[i], 1.0, 2);
    auto within = [&](const QueryResult& r) {
      std::vector<std::uint32_t> out;
      for (const auto& nb : r.neighbors) {
        if (nb.distance <= 1.0) out.push_back(nb.id);
      }
      return out;
    };
    EXPECT_EQ(within(fq.query(queries[i])), exact);
    EXPECT_EQ(within(fp.query(queries[i])), exact);
  }
}

TEST(IndexQuery, StatsAreConsistent) {
  const auto data = random_points(300, 4, 2, 8, 3.0);
  const auto fp = Index::build(data, config_for(FamilyKind::uniform_cube, Variant::fast_preprocessing, 2, 4, 2.0, 3));
  const auto r = fp.query(data[0]);
  EXPECT_EQ(r.stats.buckets_probed, 27u);
  EXPECT_EQ(r.stats.distance_evaluations + r.stats.duplicates_suppressed, r.stats.candidates_scanned);
  EXPECT_TRUE(std::is_sorted(r.neighbors.begin(), r.neighbors.end(),
                             [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; }));
  const auto fq = Index::build(data, config_for(FamilyKind::uniform_cube, Variant::fast_query, 2, 4, 2.0, 3));
  EXPECT_EQ(fq.query(data[0]).stats.buckets_probed, 1u);
}

TEST(OffsetPaths, LexicographicAndComplete) {
  const std::vector<std::int64_t> base{10, 20};
  std::vector<std::vector<std::int64_t>> seen;
  for_each_offset_path(base, [&](std::span<const std::int64_t> p) { seen.emplace_back(p.begin(), p.end()); });
  ASSERT_EQ(seen.size(), 9u);
  EXPECT_EQ(seen.front(), (std::vector<std::int64_t>{9, 19}));
  EXPECT_EQ(seen[1], (std::vector<std::int64_t>{9, 20}));
  EXPECT_EQ(seen.back(), (std::vector<std::int64_t>{11, 21}));
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
}

TEST(Fingerprint, DistinguishesPaths) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> keys;
  std::size_t n = 0;
  const std::vector<std::int64_t> base{0, 0, 0, 0, 0, 0};
  for_each_offset_path(base, [&](std::span<const std::int64_t> p) {
    const auto f = fingerprint(p);
    keys.emplace(f.hi, f.lo);
    ++n;
  });
  EXPECT_EQ(keys.size(), n);
  const std::vector<std::int64_t> a{1, 2};
  const std::vector<std::int64_t> b{2, 1};
  EXPECT_NE(fingerprint(a), fingerprint(b));
}

TEST(IndexSerialization, RoundTrip) {
  const auto data = random_points(300, 5, 3, 9, 4.0);
  const auto queries = random_points(100, 5, 3, 10, 4.0);
  for (auto variant : {Variant::fast_query, Variant::fast_preprocessing}) {
    const auto index = Index::build(data, config_for(FamilyKind::uniform_cube, variant, 3, 5, 2.0, 3));
    const auto bytes = index.serialize();
    const auto back = Index::deserialize(bytes);
    EXPECT_EQ(back.serialize(), bytes);
    EXPECT_EQ(back.config(), index.config());
    EXPECT_EQ(back.hash_functions(), index.hash_functions());
    EXPECT_EQ(back.entries(), index.entries());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      EXPECT_EQ(ids(back.query(queries[i])), ids(index.query(queries[i])));
    }
  }
}

TEST(IndexSerialization, CorruptStreams) {
  const auto data = random_points(20, 3, 2, 11);
  const auto index = Index::build(data, config_for(FamilyKind::unit_sphere, Variant::fast_preprocessing, 2, 3, 2.0));
  const auto bytes = index.serialize();
  EXPECT_THROW((void)Index::deserialize({}), FormatError);

  auto flipped = bytes;
  flipped[flipped.size() - 30] ^= 0x40;
  EXPECT_THROW((void)Index::deserialize(flipped), ChecksumError);

  auto versioned = bytes;
  versioned[8] += 1;  // version field follows the 8-byte magic
  EXPECT_THROW((void)Index::deserialize(versioned), VersionMismatch);

  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 5);
  EXPECT_THROW((void)Index::deserialize(truncated), FormatError);

  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW((void)Index::deserialize(magic), FormatError);
}

TEST(IndexDeterminism, SameSeedSameStructure) {
  const auto data = random_points(400, 4, 2, 12);
  const auto cfg = config_for(FamilyKind::unit_sphere, Variant::fast_query, 2, 4, 3.0, 0, 77);
  const auto a = Index::build(data, cfg);
  const auto b = Index::build(data, cfg);
  EXPECT_EQ(a.hash_functions(), b.hash_functions());
  EXPECT_EQ(a.entries(), b.entries());
  EXPECT_EQ(a.levels(), b.levels());
}
