#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "slsh/core_math.hpp"

namespace slsh {

/// Row-major set of n points in R^d, tagged with the l_p exponent it is
/// meant to be searched under.
class Dataset {
 public:
  Dataset(std::size_t d, LpExponent p);
  Dataset(std::size_t d, LpExponent p, std::vector<double> rows);

  void push_back(std::span<const double> point);

  [[nodiscard]] std::size_t size() const noexcept { return d_ == 0 ? 0 : data_.size() / d_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] std::size_t dim() const noexcept { return d_; }
  [[nodiscard]] const LpExponent& p() const noexcept { return p_; }
  [[nodiscard]] std::span<const double> operator[](std::size_t i) const noexcept {
    return {data_.data() + i * d_, d_};
  }
  [[nodiscard]] std::span<const double> raw() const noexcept { return data_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t d_;
  LpExponent p_;
  std::vector<double> data_;
};

/// Text format: a header line `n d p` followed by n lines of d numbers in
/// shortest round-trip decimal form. p is written as `inf` or a decimal.
void write_dataset(std::ostream& out, const Dataset& data);
[[nodiscard]] Dataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& data);
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path);

/// Shortest decimal that parses back to exactly `v`.
[[nodiscard]] std::string format_double(double v);

}  // namespace slsh
