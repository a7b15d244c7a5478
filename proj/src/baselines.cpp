#include "fdsketch/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdsketch/fd.hpp"
#include "fdsketch/linalg.hpp"

namespace fdsk {

namespace {

// Stream ids for the counter generator; each sketcher kind draws from its
// own stream family so seeds can be shared across kinds without coupling.
constexpr std::uint64_t kSamplingStreamBase = 0x100;
constexpr std::uint64_t kHashingStream = 0x200;
constexpr std::uint64_t kProjectionStream = 0x300;

void check_row(std::span<const double> row, std::size_t d) {
  if (row.size() != d) {
    throw std::invalid_argument("sketcher update: row length mismatch");
  }
  require_finite(row, "sketcher update");
}

}  // namespace

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::kNaive: return "naive";
    case BaselineKind::kBruteForce: return "brute";
    case BaselineKind::kSampling: return "sample";
    case BaselineKind::kHashing: return "hash";
    case BaselineKind::kRandomProjection: return "project";
  }
  return "?";
}

// --- Naive ---------------------------------------------------------------

NaiveSketcher::NaiveSketcher(std::size_t ell, std::size_t d)
    : ell_(ell), d_(d) {}

void NaiveSketcher::update(std::span<const double> row) {
  check_row(row, d_);
  last_ops_ = 0;
}

DenseMatrix NaiveSketcher::finalize() const { return DenseMatrix(ell_, d_); }

std::uint8_t NaiveSketcher::kind_byte() const {
  return static_cast<std::uint8_t>(BaselineKind::kNaive);
}

// --- Brute force ---------------------------------------------------------

BruteForceSketcher::BruteForceSketcher(std::size_t ell, std::size_t d,
                                       std::size_t d_limit)
    : ell_(ell), d_(d) {
  if (d > d_limit) {
    throw std::invalid_argument(
        "brute-force sketcher needs Theta(d^2) memory; d = " +
        std::to_string(d) + " exceeds the limit " + std::to_string(d_limit));
  }
  gram_ = DenseMatrix(d, d);
}

void BruteForceSketcher::update(std::span<const double> row) {
  check_row(row, d_);
  for (std::size_t i = 0; i < d_; ++i) {
    const double w = row[i];
    if (w == 0.0) continue;
    auto g = gram_.row(i);
    for (std::size_t j = 0; j < d_; ++j) g[j] += w * row[j];
  }
  last_ops_ = d_ * d_;
  total_ops_ += last_ops_;
}

DenseMatrix BruteForceSketcher::finalize() const {
  DenseMatrix b(ell_, d_);
  const std::size_t k = std::min(ell_, d_);
  auto apply = [this](std::span<const double> in, std::span<double> out) {
    mat_vec(gram_, in, out);
  };
  auto eig = sym_eig_topk(apply, d_, k, 1e-13, 20000);
  for (std::size_t i = 0; i < k; ++i) {
    const double s = std::sqrt(std::max(eig.values[i], 0.0));
    auto dst = b.row(i);
    auto src = eig.vectors.row(i);
    for (std::size_t c = 0; c < d_; ++c) dst[c] = s * src[c];
  }
  return b;
}

std::uint8_t BruteForceSketcher::kind_byte() const {
  return static_cast<std::uint8_t>(BaselineKind::kBruteForce);
}

// --- Sampling ------------------------------------------------------------

SamplingSketcher::SamplingSketcher(std::size_t ell, std::size_t d,
                                   std::uint64_t seed)
    : ell_(ell), d_(d), rng_(seed), slots_(ell, d), slot_weight_(ell, 0.0) {}

void SamplingSketcher::update(std::span<const double> row) {
  check_row(row, d_);
  const double w = frobenius_sq(row);
  last_ops_ = d_;
  if (w > 0.0) {
    total_weight_ += w;
    const double p = w / total_weight_;
    for (std::size_t j = 0; j < ell_; ++j) {
      if (rng_.uniform(kSamplingStreamBase + j, index_) <= p) {
        slots_.set_row(j, row);
        slot_weight_[j] = w;
        last_ops_ += d_;
      }
    }
  }
  index_ += 1;
  total_ops_ += last_ops_;
}

DenseMatrix SamplingSketcher::finalize() const {
  DenseMatrix b(ell_, d_);
  for (std::size_t j = 0; j < ell_; ++j) {
    if (slot_weight_[j] <= 0.0) continue;  // nothing sampled: zero row
    const double scale =
        std::sqrt(total_weight_ / (static_cast<double>(ell_) * slot_weight_[j]));
    auto dst = b.row(j);
    auto src = slots_.row(j);
    for (std::size_t c = 0; c < d_; ++c) dst[c] = scale * src[c];
  }
  return b;
}

std::uint8_t SamplingSketcher::kind_byte() const {
  return static_cast<std::uint8_t>(BaselineKind::kSampling);
}

// --- Hashing -------------------------------------------------------------

HashingSketcher::HashingSketcher(std::size_t ell, std::size_t d,
                                 std::uint64_t seed)
    : ell_(ell), d_(d), rng_(seed), buckets_(ell, d) {}

std::size_t HashingSketcher::bucket_of(std::uint64_t i) const {
  const std::uint64_t v = rng_.bits(kHashingStream, i);
  // multiply-shift map of the high 32 bits onto [0, ell)
  return static_cast<std::size_t>(((v >> 32) * ell_) >> 32);
}

double HashingSketcher::sign_of(std::uint64_t i) const {
  return (rng_.bits(kHashingStream, i) & 1u) ? 1.0 : -1.0;
}

void HashingSketcher::update(std::span<const double> row) {
  check_row(row, d_);
  const std::size_t h = bucket_of(index_);
  const double s = sign_of(index_);
  auto dst = buckets_.row(h);
  for (std::size_t c = 0; c < d_; ++c) dst[c] += s * row[c];
  index_ += 1;
  last_ops_ = d_;
  total_ops_ += last_ops_;
}

DenseMatrix HashingSketcher::finalize() const { return buckets_; }

std::uint8_t HashingSketcher::kind_byte() const {
  return static_cast<std::uint8_t>(BaselineKind::kHashing);
}

// --- Random projection ---------------------------------------------------

RandomProjectionSketcher::RandomProjectionSketcher(std::size_t ell,
                                                   std::size_t d,
                                                   std::uint64_t seed)
    : ell_(ell), d_(d), rng_(seed), acc_(ell, d) {}

void RandomProjectionSketcher::update(std::span<const double> row) {
  check_row(row, d_);
  const double inv = 1.0 / std::sqrt(static_cast<double>(ell_));
  const std::size_t words = (ell_ + 63) / 64;
  for (std::size_t w = 0, j = 0; w < words; ++w) {
    std::uint64_t bits = rng_.bits(kProjectionStream, index_ * words + w);
    for (std::size_t b = 0; b < 64 && j < ell_; ++b, ++j) {
      const double r = (bits & 1u) ? inv : -inv;
      bits >>= 1;
      auto dst = acc_.row(j);
      for (std::size_t c = 0; c < d_; ++c) dst[c] += r * row[c];
    }
  }
  index_ += 1;
  last_ops_ = ell_ * d_;
  total_ops_ += last_ops_;
}

DenseMatrix RandomProjectionSketcher::finalize() const { return acc_; }

std::uint8_t RandomProjectionSketcher::kind_byte() const {
  return static_cast<std::uint8_t>(BaselineKind::kRandomProjection);
}

// --- Factory -------------------------------------------------------------

namespace {

class FdAdapter final : public RowSketcher {
 public:
  FdAdapter(FdVariant v, std::size_t ell, std::size_t d)
      : sketch_(ell, d, v) {}
  void update(std::span<const double> row) override {
    sketch_.append(row);
    last_ops_ = sketch_.last_append_ops();
    total_ops_ = sketch_.total_ops();
  }
  DenseMatrix finalize() const override { return sketch_.finalize().b; }
  std::size_t ell() const override { return sketch_.ell(); }
  std::size_t d() const override { return sketch_.d(); }
  std::uint8_t kind_byte() const override {
    return static_cast<std::uint8_t>(sketch_.variant());
  }
  double delta() const override { return sketch_.finalize().delta; }

 private:
  FdSketch sketch_;
};

}  // namespace

const std::vector<std::string>& known_algos() {
  static const std::vector<std::string> algos = {
      "fd", "fd-fast", "fd-bounded", "sample",
      "hash", "project", "brute", "naive"};
  return algos;
}

bool is_fd_algo(const std::string& algo) {
  return algo == "fd" || algo == "fd-fast" || algo == "fd-bounded";
}

std::unique_ptr<RowSketcher> make_sketcher(const std::string& algo,
                                           std::size_t ell, std::size_t d,
                                           std::uint64_t seed,
                                           std::size_t brute_limit) {
  if (algo == "fd") {
    return std::make_unique<FdAdapter>(FdVariant::kSimple, ell, d);
  }
  if (algo == "fd-fast") {
    return std::make_unique<FdAdapter>(FdVariant::kFast, ell, d);
  }
  if (algo == "fd-bounded") {
    return std::make_unique<FdAdapter>(FdVariant::kBoundedStep, ell, d);
  }
  if (algo == "sample") {
    return std::make_unique<SamplingSketcher>(ell, d, seed);
  }
  if (algo == "hash") {
    return std::make_unique<HashingSketcher>(ell, d, seed);
  }
  if (algo == "project") {
    return std::make_unique<RandomProjectionSketcher>(ell, d, seed);
  }
  if (algo == "brute") {
    return std::make_unique<BruteForceSketcher>(ell, d, brute_limit);
  }
  if (algo == "naive") {
    return std::make_unique<NaiveSketcher>(ell, d);
  }
  throw std::invalid_argument("unknown algorithm '" + algo + "'");
}

}  // namespace fdsk
