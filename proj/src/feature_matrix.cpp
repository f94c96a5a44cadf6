#include "tmfwc/feature_matrix.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tmfwc/audio.hpp"
#include "tmfwc/error.hpp"

namespace tmfwc {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} values for a {}x{} matrix", data_.size(), rows, cols));
  }
}

void FeatureMatrix::set_column_names(std::vector<std::string> names) {
  if (!names.empty() && names.size() != cols_) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} column names for {} columns", names.size(), cols_));
  }
  names_ = std::move(names);
}

void write_csv(std::ostream& out, const FeatureMatrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (c) out << ',';
    if (m.column_names().empty()) {
      out << "col" << c;
    } else {
      out << m.column_names()[c];
    }
  }
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << fmt::format("{}", m(r, c));
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_csv(out, m);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first) {
    throw Error(ErrorCode::MalformedContainer, "bad numeric cell '" + s + "'");
  }
  return v;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

FeatureMatrix read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedContainer, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto names = split_commas(line);
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != names.size()) {
      throw Error(ErrorCode::MalformedContainer,
                  fmt::format("row {} has {} cells, header has {}", rows, cells.size(),
                              names.size()));
    }
    for (const auto& cell : cells) values.push_back(parse_double(cell));
    ++rows;
  }
  FeatureMatrix m(rows, names.size(), std::move(values));
  m.set_column_names(std::move(names));
  return m;
}

FeatureMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_csv(in);
}

std::vector<std::uint8_t> encode_binary(const FeatureMatrix& m) {
  std::vector<std::uint8_t> out(std::begin(kFeatureMatrixMagic), std::end(kFeatureMatrixMagic));
  out.reserve(16 + 8 * m.data().size());
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
  }
  return out;
}

FeatureMatrix decode_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFeatureMatrixMagic, 8) != 0) {
    throw Error(ErrorCode::MalformedContainer, "not a binary feature matrix");
  }
  const std::size_t rows = get_u32(bytes, 8);
  const std::size_t cols = get_u32(bytes, 12);
  if (bytes.size() != 16 + 8 * rows * cols) {
    throw Error(ErrorCode::MalformedContainer, "binary feature matrix size mismatch");
  }
  std::vector<double> values(rows * cols);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[16 + 8 * k + i]) << (8 * i);
    values[k] = std::bit_cast<double>(bits);
  }
  return FeatureMatrix(rows, cols, std::move(values));
}

void save_binary(const std::filesystem::path& path, const FeatureMatrix& m) {
  const auto bytes = encode_binary(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

FeatureMatrix load_binary(const std::filesystem::path& path) {
  return decode_binary(read_file_bytes(path));
}

}  // namespace tmfwc
