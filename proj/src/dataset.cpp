#include "slsh/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "slsh/error.hpp"

namespace slsh {

namespace {

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto r = std::from_chars(token.data(), token.data() + token.size(), v);
  if (r.ec != std::errc{} || r.ptr != token.data() + token.size()) {
    throw FormatError(fmt::format("line {}: cannot parse number '{}'", line, token));
  }
  return v;
}

}  // namespace

Dataset::Dataset(std::size_t d, LpExponent p) : d_(d), p_(p) {
  if (d == 0) throw DimensionError("dataset dimension must be at least 1");
}

Dataset::Dataset(std::size_t d, LpExponent p, std::vector<double> rows) : d_(d), p_(p), data_(std::move(rows)) {
  if (d == 0) throw DimensionError("dataset dimension must be at least 1");
  if (data_.size() % d != 0) {
    throw DimensionError(fmt::format("{} values do not split into rows of {}", data_.size(), d));
  }
}

void Dataset::push_back(std::span<const double> point) {
  if (point.size() != d_) {
    throw DimensionError(fmt::format("point of dimension {} added to dataset of dimension {}", point.size(), d_));
  }
  data_.insert(data_.end(), point.begin(), point.end());
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, r.ptr};
}

void write_dataset(std::ostream& out, const Dataset& data) {
  out << data.size() << ' ' << data.dim() << ' ' << data.p().to_string() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset file is empty");
  std::istringstream header(line);
  std::size_t n = 0;
  std::size_t d = 0;
  std::string p_text;
  if (!(header >> n >> d >> p_text)) throw FormatError(fmt::format("bad dataset header '{}'", line));
  Dataset data(d, LpExponent::parse(p_text));

  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw FormatError(fmt::format("dataset truncated after {} of {} rows", i, n));
    std::size_t j = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
      if (j >= d) throw FormatError(fmt::format("line {}: more than {} values", i + 2, d));
      row[j++] = parse_double(std::string_view(line).substr(pos, end - pos), i + 2);
      pos = end;
    }
    if (j != d) throw FormatError(fmt::format("line {}: expected {} values, found {}", i + 2, d, j));
    data.push_back(row);
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw FormatError(fmt::format("dataset has more rows than the {} its header declares", n));
    }
  }
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  write_dataset(out, data);
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return read_dataset(in);
}

}  // namespace slsh
