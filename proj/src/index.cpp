#include "slsh/index.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "slsh/anticoncentration.hpp"
#include "slsh/binary_io.hpp"
#include "slsh/error.hpp"
#include "slsh/rng.hpp"

namespace slsh {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'S', 'H', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderBytes = sizeof(kMagic) + 4 + 8 + 8;
constexpr std::size_t kMaxLevels = 64;

std::uint64_t pow3(std::size_t L) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < L; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / 3) return std::numeric_limits<std::uint64_t>::max();
    r *= 3;
  }
  return r;
}

bool key_less(const Index::Entry& e, const Fingerprint& k) { return e.key < k; }
bool less_key(const Fingerprint& k, const Index::Entry& e) { return k < e.key; }

}  // namespace

std::string_view to_string(Variant v) noexcept {
  return v == Variant::fast_query ? "fast_query" : "fast_preprocessing";
}

Variant parse_variant(std::string_view text) {
  if (text == "fast_query") return Variant::fast_query;
  if (text == "fast_preprocessing") return Variant::fast_preprocessing;
  throw DomainError(fmt::format("unknown index variant '{}'", text));
}

double IndexConfig::tau() const { return family_tau(kind, p, d); }

double IndexConfig::p_fp() const {
  if (calibrated_p_fp) return *calibrated_p_fp;
  return *false_positive_bound(kind, p, d, c);
}

double IndexConfig::a() const { return -std::log(p_fp()); }

double IndexConfig::b() { return std::log(3.0); }

void IndexConfig::validate() const {
  if (d == 0) throw DimensionError("index dimension must be at least 1");
  if (!(c > 0.0) || std::isinf(c)) throw DomainError(fmt::format("approximation factor {} must be positive", c));
  if (!has_adjacency_guarantee(kind)) {
    throw DomainError(fmt::format("family {} cannot back an index without false negatives", to_string(kind)));
  }
  if (calibrated_p_fp && !(*calibrated_p_fp > 0.0 && *calibrated_p_fp < 1.0)) {
    throw DomainError(fmt::format("calibrated false-positive rate {} outside (0, 1)", *calibrated_p_fp));
  }
  if (levels > kMaxLevels) throw DomainError(fmt::format("{} levels exceed the limit of {}", levels, kMaxLevels));
  if (!unsafe_override && !(c > tau())) {
    throw ConstraintViolation(fmt::format("c = {} does not exceed tau = {} for {} in l_{} with d = {}", c, tau(),
                                          to_string(kind), p.to_string(), d));
  }
}

std::size_t choose_levels(Variant variant, std::size_t n, std::size_t d, double p_fp) {
  if (n == 0) throw DomainError("cannot choose levels for an empty dataset");
  if (d == 0) throw DimensionError("dimension must be at least 1");
  if (!(p_fp > 0.0)) throw DomainError(fmt::format("false-positive bound {} must be positive", p_fp));
  if (!(p_fp < 1.0)) {
    throw ConstraintViolation(fmt::format("false-positive bound {} >= 1: c does not exceed tau", p_fp));
  }
  const double a = -std::log(p_fp);
  const double nn = static_cast<double>(n);
  if (variant == Variant::fast_query) {
    const double L = std::ceil(std::log(nn / static_cast<double>(d)) / a);
    return static_cast<std::size_t>(std::clamp(L, 1.0, static_cast<double>(kMaxLevels)));
  }
  // 3^L + n p^L is convex in L; walk up while it keeps decreasing.
  const auto cost = [&](std::size_t L) {
    const double l = static_cast<double>(L);
    return std::exp(l * std::log(3.0)) + std::exp(std::log(nn) - l * a);
  };
  std::size_t L = 1;
  while (L < kMaxLevels && cost(L + 1) < cost(L)) ++L;
  return L;
}

Fingerprint fingerprint(std::span<const std::int64_t> path) noexcept {
  std::uint64_t hi = 0x243f6a8885a308d3ULL ^ path.size();
  std::uint64_t lo = 0x13198a2e03707344ULL + path.size() * 0x9e3779b97f4a7c15ULL;
  for (const auto v : path) {
    const auto u = static_cast<std::uint64_t>(v);
    hi = mix64(hi ^ mix64(u + 0xa4093822299f31d0ULL));
    lo = mix64((lo + (u ^ 0x082efa98ec4e6c89ULL)) * 0xff51afd7ed558ccdULL);
  }
  return {hi, lo};
}

Index Index::build(Dataset points, IndexConfig config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (config.d == 0) config.d = points.dim();
  if (points.dim() != config.d) {
    throw DimensionError(fmt::format("dataset dimension {} does not match index dimension {}", points.dim(), config.d));
  }
  config.validate();
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("cannot index an empty dataset");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw CapacityError("point ids are limited to 32 bits");

  const std::size_t L = config.levels ? config.levels : choose_levels(config.variant, n, config.d, config.p_fp());
  const std::uint64_t per_point = config.variant == Variant::fast_query ? pow3(L) : 1;
  if (per_point > config.max_entries / n) {
    throw CapacityError(fmt::format("{} points x {} copies exceeds the entry cap of {}", n, per_point,
                                    config.max_entries));
  }

  std::vector<HashFunction> hashes;
  hashes.reserve(L);
  for (std::size_t i = 0; i < L; ++i) {
    hashes.push_back(HashFunction::sample(config.kind, config.p, config.d, derive_seed(config.master_seed, i)));
  }

  std::vector<Entry> entries(n * per_point);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel
  {
    std::vector<std::int64_t> base(L);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto id = static_cast<std::uint32_t>(i);
      const auto x = points[id];
      for (std::size_t l = 0; l < L; ++l) base[l] = hashes[l](x);
      Entry* slot = entries.data() + static_cast<std::size_t>(i) * per_point;
      if (config.variant == Variant::fast_preprocessing) {
        *slot = Entry{fingerprint(base), id};
      } else {
        for_each_offset_path(base, [&](std::span<const std::int64_t> path) { *slot++ = Entry{fingerprint(path), id}; });
      }
    }
  }
  std::sort(entries.begin(), entries.end());

  BuildStats stats;
  stats.entries = entries.size();
  stats.bytes = entries.size() * sizeof(Entry) + points.raw().size() * sizeof(double) + L * config.d * sizeof(double);
  stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return Index(std::move(config), std::move(hashes), std::move(entries), std::move(points), stats);
}

std::vector<std::int64_t> Index::path(std::span<const double> x) const {
  if (x.size() != config_.d) {
    throw DimensionError(fmt::format("query of dimension {} against index of dimension {}", x.size(), config_.d));
  }
  std::vector<std::int64_t> out(hashes_.size());
  for (std::size_t l = 0; l < hashes_.size(); ++l) out[l] = hashes_[l](x);
  return out;
}

void Index::probe(const Fingerprint& key, std::vector<std::uint32_t>& out, QueryStats& stats) const {
  const auto lo = std::lower_bound(entries_.begin(), entries_.end(), key, key_less);
  const auto hi = std::upper_bound(lo, entries_.end(), key, less_key);
  ++stats.buckets_probed;
  stats.candidates_scanned += static_cast<std::uint64_t>(hi - lo);
  for (auto it = lo; it != hi; ++it) out.push_back(it->id);
}

QueryResult Index::query(std::span<const double> q) const {
  const auto base = path(q);
  QueryResult result;
  std::vector<std::uint32_t> candidates;
  if (config_.variant == Variant::fast_query) {
    probe(fingerprint(base), candidates, result.stats);
  } else {
    for_each_offset_path(base, [&](std::span<const std::int64_t> p) { probe(fingerprint(p), candidates, result.stats); });
  }
  std::sort(candidates.begin(), candidates.end());
  const auto last = std::unique(candidates.begin(), candidates.end());
  result.stats.duplicates_suppressed = static_cast<std::uint64_t>(candidates.end() - last);
  candidates.erase(last, candidates.end());

  for (const auto id : candidates) {
    ++result.stats.distance_evaluations;
    const double dist = lp_distance(points_[id], q, config_.p);
    if (dist <= config_.c) result.neighbors.push_back(Neighbor{id, dist});
  }
  return result;
}

std::vector<std::uint8_t> Index::serialize() const {
  binary::Writer body;
  write_exponent(body, config_.p);
  body.u64(config_.d);
  body.f64(config_.c);
  body.u8(static_cast<std::uint8_t>(config_.kind));
  body.u8(static_cast<std::uint8_t>(config_.variant));
  body.u64(config_.levels);
  body.u64(config_.master_seed);
  body.u8(config_.unsafe_override ? 1 : 0);
  body.u64(config_.max_entries);
  body.u8(config_.calibrated_p_fp ? 1 : 0);
  body.f64(config_.calibrated_p_fp.value_or(0.0));

  body.u64(hashes_.size());
  for (const auto& h : hashes_) h.write(body);

  body.u64(points_.size());
  body.u64(points_.dim());
  write_exponent(body, points_.p());
  for (double v : points_.raw()) body.f64(v);

  body.u64(entries_.size());
  for (const auto& e : entries_) {
    body.u64(e.key.hi);
    body.u64(e.key.lo);
    body.u32(e.id);
  }

  body.f64(stats_.wall_ms);
  body.u64(stats_.entries);
  body.u64(stats_.bytes);

  binary::Writer out;
  for (char ch : kMagic) out.u8(static_cast<std::uint8_t>(ch));
  out.u32(kFormatVersion);
  out.u64(body.bytes().size());
  out.u64(binary::checksum(body.bytes()));
  out.raw(body.bytes());
  return std::move(out).bytes();
}

Index Index::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw FormatError("empty index stream");
  if (bytes.size() < kHeaderBytes) throw FormatError("index stream truncated inside the header");
  binary::Reader header(bytes.first(kHeaderBytes));
  for (char ch : kMagic) {
    if (header.u8() != static_cast<std::uint8_t>(ch)) throw FormatError("not an index stream (bad magic)");
  }
  const auto version = header.u32();
  if (version != kFormatVersion) {
    throw VersionMismatch(fmt::format("index format version {} is not supported (expected {})", version,
                                      kFormatVersion));
  }
  const auto length = header.u64();
  const auto sum = header.u64();
  const auto payload = bytes.subspan(kHeaderBytes);
  if (payload.size() != length) {
    throw FormatError(fmt::format("index body is {} bytes, header says {}", payload.size(), length));
  }
  if (binary::checksum(payload) != sum) throw ChecksumError("index checksum mismatch");

  binary::Reader in(payload);
  IndexConfig config;
  config.p = read_exponent(in);
  config.d = in.u64();
  config.c = in.f64();
  const auto kind = in.u8();
  const auto variant = in.u8();
  if (kind > static_cast<std::uint8_t>(FamilyKind::lq_sphere_experimental) || variant > 1) {
    throw FormatError("index config has an unknown family or variant tag");
  }
  config.kind = static_cast<FamilyKind>(kind);
  config.variant = static_cast<Variant>(variant);
  config.levels = in.u64();
  config.master_seed = in.u64();
  config.unsafe_override = in.u8() != 0;
  config.max_entries = in.u64();
  const bool calibrated = in.u8() != 0;
  const double calibrated_value = in.f64();
  if (calibrated) config.calibrated_p_fp = calibrated_value;

  const auto L = in.u64();
  if (L == 0 || L > kMaxLevels) throw FormatError(fmt::format("index has {} levels", L));
  std::vector<HashFunction> hashes;
  hashes.reserve(L);
  for (std::uint64_t i = 0; i < L; ++i) {
    hashes.push_back(HashFunction::read(in));
    if (hashes.back().dim() != config.d) throw FormatError("hash function dimension disagrees with the index");
  }

  const auto n = in.u64();
  const auto d = in.u64();
  if (d != config.d || d == 0 || n > in.remaining() / (8 * d)) throw FormatError("index dataset section is malformed");
  const LpExponent data_p = read_exponent(in);
  std::vector<double> rows(n * d);
  for (auto& v : rows) v = in.f64();
  Dataset points(d, data_p, std::move(rows));

  const auto count = in.u64();
  if (count > in.remaining() / 20) throw FormatError("index entry section is truncated");
  std::vector<Entry> entries(count);
  for (auto& e : entries) {
    e.key.hi = in.u64();
    e.key.lo = in.u64();
    e.id = in.u32();
    if (e.id >= n) throw FormatError(fmt::format("entry references point {} of {}", e.id, n));
  }
  if (!std::is_sorted(entries.begin(), entries.end())) throw FormatError("index entries are not sorted");

  BuildStats stats;
  stats.wall_ms = in.f64();
  stats.entries = in.u64();
  stats.bytes = in.u64();
  if (in.remaining() != 0) throw FormatError("trailing bytes after index body");
  return Index(std::move(config), std::move(hashes), std::move(entries), std::move(points), stats);
}

}  // namespace slsh
