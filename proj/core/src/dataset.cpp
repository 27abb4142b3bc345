#include "scoped/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "scoped/bytes.hpp"
#include "scoped/errors.hpp"
#include "scoped/rng.hpp"

namespace scoped {

std::vector<std::string> Dataset::column_names() const {
  if (names.size() == dim) return names;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < dim; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

Dataset slice(const Dataset& data, std::size_t first, std::size_t last) {
  if (first > last || last > data.rows()) throw InputError("slice outside dataset");
  Dataset out(data.dim, std::vector<double>(data.values.begin() + static_cast<std::ptrdiff_t>(first * data.dim),
                                            data.values.begin() + static_cast<std::ptrdiff_t>(last * data.dim)));
  out.names = data.names;
  return out;
}

Dataset select_rows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.dim = data.dim;
  out.names = data.names;
  out.values.reserve(rows.size() * data.dim);
  for (std::size_t r : rows) out.append(data.row(r));
  return out;
}

Split split_dataset(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::kSplit)}));
  rng.shuffle(order.begin(), order.end());
  const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size())));
  std::span<const std::size_t> all(order);
  return {select_rows(data, all.subspan(0, cut)), select_rows(data, all.subspan(cut))};
}

std::vector<std::uint8_t> encode_sdat(const Dataset& data) {
  ByteWriter w;
  w.magic("SDAT");
  w.put<std::uint32_t>(kDataFormatVersion);
  w.put<std::uint64_t>(data.rows());
  w.put<std::uint64_t>(data.dim);
  for (double v : data.values) w.put(static_cast<float>(v));
  return w.take();
}

Dataset decode_sdat(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "dataset file");
  r.expect_magic("SDAT");
  const auto version = r.get<std::uint32_t>();
  if (version != kDataFormatVersion)
    throw InputError("dataset file: unsupported version " + std::to_string(version));
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  if (cols == 0) throw InputError("dataset file: zero columns");
  if (rows > r.remaining() / sizeof(float) / cols) throw InputError("dataset file: truncated");
  const auto raw = r.get_n<float>(rows * cols);
  if (r.remaining() != 0) throw InputError("dataset file: trailing bytes");
  return Dataset(cols, std::vector<double>(raw.begin(), raw.end()));
}

std::string encode_csv(const Dataset& data) {
  std::ostringstream os;
  os.precision(17);
  const auto names = data.column_names();
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto row = data.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

Dataset decode_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset csv: missing header");
  Dataset data;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) data.names.push_back(cell);
  }
  data.dim = data.names.size();
  if (data.dim == 0) throw InputError("dataset csv: empty header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        data.values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw InputError("dataset csv: bad number on line " + std::to_string(line_no));
      }
      ++count;
    }
    if (count != data.dim) throw InputError("dataset csv: ragged row on line " + std::to_string(line_no));
  }
  return data;
}

Dataset load_dataset(const std::string& path) {
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  const auto bytes = read_file_bytes(path);
  if (csv) return decode_csv(std::string(bytes.begin(), bytes.end()));
  return decode_sdat(bytes);
}

void save_dataset(const Dataset& data, const std::string& path) {
  const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
  if (csv) {
    const auto text = encode_csv(data);
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  } else {
    write_file_bytes(path, encode_sdat(data));
  }
}

}  // namespace scoped
