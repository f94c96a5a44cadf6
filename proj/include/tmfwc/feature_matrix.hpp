#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tmfwc {

// Row-major time-step x channel matrix. Every extractor produces one; the
// reservoir consumes rows in time order.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  // Optional; when empty, CSV headers fall back to col0..colN.
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  void set_column_names(std::vector<std::string> names);

  bool operator==(const FeatureMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::vector<std::string> names_;
};

inline constexpr char kFeatureMatrixMagic[8] = {'T', 'M', 'F', 'W', 'C', 'F', 'M', '1'};

// CSV: header row of column names, then one row per time step
// (each value in its shortest round-trip form).
void write_csv(std::ostream& out, const FeatureMatrix& m);
void save_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_csv(std::istream& in);
FeatureMatrix load_csv(const std::filesystem::path& path);

// Binary: 8-byte magic, u32 rows, u32 cols (little-endian), then rows*cols
// little-endian f64 values in row-major order. Column names are not stored.
std::vector<std::uint8_t> encode_binary(const FeatureMatrix& m);
FeatureMatrix decode_binary(std::span<const std::uint8_t> bytes);
void save_binary(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix load_binary(const std::filesystem::path& path);

}  // namespace tmfwc
