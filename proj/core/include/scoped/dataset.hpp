#pragma once

// Row-major batch of points plus the two on-disk encodings.
//
// SDAT: "SDAT" | u32 version | u64 rows | u64 cols | f32 values[rows*cols] (row-major, LE)
// CSV:  header of column names, then one row per point.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scoped {

inline constexpr std::uint32_t kDataFormatVersion = 1;

struct Dataset {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<std::string> names;  // optional column names

  Dataset() = default;
  Dataset(std::size_t d, std::vector<double> v) : dim(d), values(std::move(v)) {}

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  bool empty() const { return rows() == 0; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
  void append(std::span<const double> point) { values.insert(values.end(), point.begin(), point.end()); }
  std::vector<std::string> column_names() const;
};

// Rows [first, last).
Dataset slice(const Dataset& data, std::size_t first, std::size_t last);
Dataset select_rows(const Dataset& data, std::span<const std::size_t> rows);

// Seeded shuffle, then the first round(fraction * n) rows go to the first part.
struct Split {
  Dataset first;
  Dataset second;
};
Split split_dataset(const Dataset& data, double fraction, std::uint64_t seed);

std::vector<std::uint8_t> encode_sdat(const Dataset& data);
Dataset decode_sdat(std::span<const std::uint8_t> bytes);
std::string encode_csv(const Dataset& data);
Dataset decode_csv(const std::string& text);

// Format chosen by extension: ".csv" is CSV, anything else SDAT.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

}  // namespace scoped
