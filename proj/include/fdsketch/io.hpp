#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "fdsketch/fd.hpp"
#include "fdsketch/matrix.hpp"

namespace fdsk {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-pass source of fixed-width rows.
class RowStream {
 public:
  virtual ~RowStream() = default;
  /// Writes the next row into `out` (length cols()); false at end of stream.
  virtual bool next(std::span<double> out) = 0;
  virtual std::size_t cols() const = 0;
  virtual std::optional<std::size_t> rows_hint() const { return std::nullopt; }
};

DenseMatrix materialize(RowStream& stream, std::size_t reserve_rows = 0);

/// Streams the rows of an in-memory matrix (non-owning view).
class MatrixRowStream final : public RowStream {
 public:
  explicit MatrixRowStream(const DenseMatrix& m) : m_(&m) {}
  bool next(std::span<double> out) override {
    if (next_ >= m_->rows()) return false;
    auto row = m_->row(next_++);
    std::copy(row.begin(), row.end(), out.begin());
    return true;
  }
  std::size_t cols() const override { return m_->cols(); }
  std::optional<std::size_t> rows_hint() const override { return m_->rows(); }

 private:
  const DenseMatrix* m_;
  std::size_t next_ = 0;
};

enum class MatrixFormat { kCsv, kFdmx };

/// FDMX: magic "FDMX", version u32, n u64, d u64, little-endian f64
/// row-major payload. CSV: comma separated, '.' decimal point, shortest
/// round-trip formatting, optional single header line.
void write_matrix(const std::string& path, const DenseMatrix& m,
                  MatrixFormat format);

class MatrixWriter {
 public:
  MatrixWriter(const std::string& path, MatrixFormat format, std::size_t d,
               std::optional<std::size_t> n_hint = std::nullopt);
  ~MatrixWriter();
  void write_row(std::span<const double> row);
  void close();  // patches the fdmx row count when n was not known upfront

 private:
  std::ofstream out_;
  std::string path_;
  MatrixFormat format_;
  std::size_t d_;
  std::size_t written_ = 0;
  bool closed_ = false;
};

/// Streaming reader; format decided by sniffing the file magic unless
/// forced. csv_header skips one leading line in csv files.
std::unique_ptr<RowStream> open_matrix(const std::string& path,
                                       std::optional<MatrixFormat> format =
                                           std::nullopt,
                                       bool csv_header = false);

DenseMatrix read_matrix(const std::string& path,
                        std::optional<MatrixFormat> format = std::nullopt,
                        bool csv_header = false);

/// FDSK sketch container: magic "FDSK", version u32, ell u64, d u64,
/// variant u8, delta_total f64, rows_seen u64, input_frob_sq f64, then the
/// ell x d little-endian f64 row-major finalized buffer. Byte-exact
/// round-trip. Variant bytes 0-2 are the FD variants, 3-7 the baselines.
struct SketchFile {
  std::size_t ell = 0;
  std::size_t d = 0;
  std::uint8_t variant = 0;
  double delta_total = 0.0;
  std::size_t rows_seen = 0;
  double input_frob_sq = 0.0;
  DenseMatrix rows;  // ell x d

  bool is_fd_variant() const { return variant <= 2; }
};

void save_sketch_file(const std::string& path, const SketchFile& s);
SketchFile load_sketch_file(const std::string& path);

void save_sketch(const std::string& path, const FdSketch& sketch);
FdSketch load_fd_sketch(const std::string& path);

}  // namespace fdsk
