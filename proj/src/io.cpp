#include "fdsketch/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <string_view>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "file formats are defined little-endian; add byte swapping "
              "before building on a big-endian target");

namespace fdsk {

namespace {

constexpr char kFdmxMagic[4] = {'F', 'D', 'M', 'X'};
constexpr char kFdskMagic[4] = {'F', 'D', 'S', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path, const char* what) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw IoError(path + ": truncated " + what);
  return value;
}

std::string format_value(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

class FdmxStream final : public RowStream {
 public:
  FdmxStream(std::ifstream in, std::string path, std::size_t n, std::size_t d)
      : in_(std::move(in)), path_(std::move(path)), n_(n), d_(d) {}
  bool next(std::span<double> out) override {
    if (read_ >= n_) return false;
    in_.read(reinterpret_cast<char*>(out.data()),
             static_cast<std::streamsize>(d_ * sizeof(double)));
    if (!in_) throw IoError(path_ + ": truncated row payload");
    require_finite(out, path_.c_str());
    ++read_;
    return true;
  }
  std::size_t cols() const override { return d_; }
  std::optional<std::size_t> rows_hint() const override { return n_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t n_, d_;
  std::size_t read_ = 0;
};

class CsvStream final : public RowStream {
 public:
  CsvStream(std::ifstream in, std::string path, bool header)
      : in_(std::move(in)), path_(std::move(path)) {
    if (header) {
      std::string skip;
      std::getline(in_, skip);
      ++line_;
    }
    // Peek at the first data row to learn the width.
    std::string first;
    if (std::getline(in_, first)) {
      pending_ = parse_line(first);
      d_ = pending_->size();
    }
  }
  bool next(std::span<double> out) override {
    if (pending_) {
      std::copy(pending_->begin(), pending_->end(), out.begin());
      pending_.reset();
      return true;
    }
    std::string line;
    if (!std::getline(in_, line)) return false;
    auto values = parse_line(line);
    if (values.size() != d_) {
      throw IoError(path_ + ":" + std::to_string(line_) + ": expected " +
                    std::to_string(d_) + " fields, got " +
                    std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), out.begin());
    return true;
  }
  std::size_t cols() const override { return d_; }

 private:
  std::vector<double> parse_line(const std::string& line) {
    ++line_;
    std::vector<double> values;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string_view field(line.data() + pos,
                             (comma == std::string::npos ? line.size()
                                                         : comma) -
                                 pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
      while (!field.empty() &&
             (field.back() == ' ' || field.back() == '\t' ||
              field.back() == '\r'))
        field.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw IoError(path_ + ":" + std::to_string(line_) +
                      ": malformed number '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) {
        throw IoError(path_ + ":" + std::to_string(line_) +
                      ": non-finite value");
      }
      values.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return values;
  }

  std::ifstream in_;
  std::string path_;
  std::size_t d_ = 0;
  std::size_t line_ = 0;
  std::optional<std::vector<double>> pending_;
};

}  // namespace

DenseMatrix materialize(RowStream& stream, std::size_t reserve_rows) {
  const std::size_t d = stream.cols();
  std::vector<double> data;
  if (auto hint = stream.rows_hint()) reserve_rows = *hint;
  data.reserve(reserve_rows * d);
  std::vector<double> row(d);
  std::size_t n = 0;
  while (stream.next(row)) {
    data.insert(data.end(), row.begin(), row.end());
    ++n;
  }
  return DenseMatrix::from_data(n, d, std::move(data));
}

MatrixWriter::MatrixWriter(const std::string& path, MatrixFormat format,
                           std::size_t d, std::optional<std::size_t> n_hint)
    : path_(path), format_(format), d_(d) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError(path + ": cannot open for writing");
  if (format == MatrixFormat::kFdmx) {
    out_.write(kFdmxMagic, 4);
    put<std::uint32_t>(out_, kFormatVersion);
    put<std::uint64_t>(out_, n_hint.value_or(0));
    put<std::uint64_t>(out_, d);
  }
}

MatrixWriter::~MatrixWriter() {
  try {
    close();
  } catch (...) {
  }
}

void MatrixWriter::write_row(std::span<const double> row) {
  if (row.size() != d_) throw IoError(path_ + ": row width mismatch");
  if (format_ == MatrixFormat::kFdmx) {
    out_.write(reinterpret_cast<const char*>(row.data()),
               static_cast<std::streamsize>(d_ * sizeof(double)));
  } else {
    std::string line;
    for (std::size_t c = 0; c < d_; ++c) {
      if (c) line.push_back(',');
      line += format_value(row[c]);
    }
    line.push_back('\n');
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  ++written_;
}

void MatrixWriter::close() {
  if (closed_) return;
  closed_ = true;
  if (format_ == MatrixFormat::kFdmx) {
    out_.seekp(8);  // past magic + version
    put<std::uint64_t>(out_, written_);
  }
  out_.close();
  if (!out_) throw IoError(path_ + ": write failure on close");
}

void write_matrix(const std::string& path, const DenseMatrix& m,
                  MatrixFormat format) {
  MatrixWriter w(path, format, m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) w.write_row(m.row(r));
  w.close();
}

std::unique_ptr<RowStream> open_matrix(const std::string& path,
                                       std::optional<MatrixFormat> format,
                                       bool csv_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  if (!format) {
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    format = (std::memcmp(magic, kFdmxMagic, 4) == 0) ? MatrixFormat::kFdmx
                                                      : MatrixFormat::kCsv;
  }
  if (*format == MatrixFormat::kFdmx) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kFdmxMagic, 4) != 0) {
      throw IoError(path + ": not an FDMX file");
    }
    const auto version = get<std::uint32_t>(in, path, "version");
    if (version != kFormatVersion) {
      throw IoError(path + ": unsupported FDMX version " +
                    std::to_string(version));
    }
    const auto n = get<std::uint64_t>(in, path, "row count");
    const auto d = get<std::uint64_t>(in, path, "column count");
    return std::make_unique<FdmxStream>(std::move(in), path, n, d);
  }
  return std::make_unique<CsvStream>(std::move(in), path, csv_header);
}

DenseMatrix read_matrix(const std::string& path,
                        std::optional<MatrixFormat> format, bool csv_header) {
  auto stream = open_matrix(path, format, csv_header);
  return materialize(*stream);
}

void save_sketch_file(const std::string& path, const SketchFile& s) {
  if (s.rows.rows() != s.ell || s.rows.cols() != s.d) {
    throw IoError("save_sketch_file: payload must be ell x d");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(kFdskMagic, 4);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, s.ell);
  put<std::uint64_t>(out, s.d);
  put<std::uint8_t>(out, s.variant);
  put<double>(out, s.delta_total);
  put<std::uint64_t>(out, s.rows_seen);
  put<double>(out, s.input_frob_sq);
  out.write(reinterpret_cast<const char*>(s.rows.data()),
            static_cast<std::streamsize>(s.rows.size() * sizeof(double)));
  out.close();
  if (!out) throw IoError(path + ": write failure");
}

SketchFile load_sketch_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFdskMagic, 4) != 0) {
    throw IoError(path + ": not an FDSK file");
  }
  const auto version = get<std::uint32_t>(in, path, "version");
  if (version != kFormatVersion) {
    throw IoError(path + ": unsupported FDSK version " +
                  std::to_string(version));
  }
  SketchFile s;
  s.ell = get<std::uint64_t>(in, path, "ell");
  s.d = get<std::uint64_t>(in, path, "d");
  s.variant = get<std::uint8_t>(in, path, "variant");
  s.delta_total = get<double>(in, path, "delta");
  s.rows_seen = get<std::uint64_t>(in, path, "rows_seen");
  s.input_frob_sq = get<double>(in, path, "input_frob_sq");
  std::vector<double> payload(s.ell * s.d);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!in) throw IoError(path + ": truncated sketch payload");
  s.rows = DenseMatrix::from_data(s.ell, s.d, std::move(payload));
  return s;
}

void save_sketch(const std::string& path, const FdSketch& sketch) {
  auto fin = sketch.finalize();
  SketchFile f;
  f.ell = sketch.ell();
  f.d = sketch.d();
  f.variant = static_cast<std::uint8_t>(sketch.variant());
  f.delta_total = fin.delta;
  f.rows_seen = sketch.rows_seen();
  f.input_frob_sq = sketch.input_frob_sq();
  f.rows = std::move(fin.b);
  save_sketch_file(path, f);
}

FdSketch load_fd_sketch(const std::string& path) {
  SketchFile f = load_sketch_file(path);
  if (!f.is_fd_variant()) {
    throw IoError(path + ": not an FD sketch (baseline variant byte " +
                  std::to_string(f.variant) + ")");
  }
  return FdSketch::from_parts(f.ell, f.d, static_cast<FdVariant>(f.variant),
                              f.delta_total, f.rows_seen, f.input_frob_sq,
                              f.rows);
}

}  // namespace fdsk
