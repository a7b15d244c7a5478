#include "fdsketch/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdsketch/rng.hpp"

namespace fdsk {

namespace {

constexpr std::uint64_t kSignalRowsStream = 1;
constexpr std::uint64_t kCoeffStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

void validate(const SyntheticSpec& spec) {
  if (spec.m < 1 || spec.m > spec.d) {
    throw std::invalid_argument("SyntheticSpec: need 1 <= m <= d");
  }
  if (spec.n < 1) throw std::invalid_argument("SyntheticSpec: need n >= 1");
  if (!(spec.zeta > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: need zeta > 0");
  }
}

class SyntheticStream final : public RowStream {
 public:
  explicit SyntheticStream(const SyntheticSpec& spec)
      : spec_(spec),
        rng_(spec.seed),
        w_(synthetic_signal_rows(spec)),
        noise_scale_(std::isinf(spec.zeta) ? 0.0 : 1.0 / spec.zeta) {}

  bool next(std::span<double> out) override {
    if (emitted_ >= spec_.n) return false;
    const std::size_t i = emitted_;
    const std::size_t d = spec_.d;
    if (noise_scale_ == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
    } else {
      for (std::size_t c = 0; c < d; ++c) {
        out[c] = noise_scale_ * rng_.gaussian(kNoiseStream, i * d + c);
      }
    }
    for (std::size_t j = 0; j < spec_.m; ++j) {
      const double djj =
          1.0 - static_cast<double>(j) / static_cast<double>(spec_.m);
      const double coeff =
          rng_.gaussian(kCoeffStream, i * spec_.m + j) * djj;
      auto wj = w_.row(j);
      for (std::size_t c = 0; c < d; ++c) out[c] += coeff * wj[c];
    }
    ++emitted_;
    return true;
  }

  std::size_t cols() const override { return spec_.d; }
  std::optional<std::size_t> rows_hint() const override { return spec_.n; }

 private:
  SyntheticSpec spec_;
  CounterRng rng_;
  DenseMatrix w_;
  double noise_scale_;
  std::size_t emitted_ = 0;
};

}  // namespace

DenseMatrix synthetic_signal_rows(const SyntheticSpec& spec) {
  validate(spec);
  const CounterRng rng(spec.seed);
  DenseMatrix w(spec.m, spec.d);
  for (std::size_t j = 0; j < spec.m; ++j) {
    for (std::size_t c = 0; c < spec.d; ++c) {
      w(j, c) = rng.gaussian(kSignalRowsStream, j * spec.d + c);
    }
  }
  // Modified Gram-Schmidt; a Gaussian m x d block with m <= d is full rank
  // up to measure zero, so a vanishing pivot is treated as a hard error.
  for (std::size_t j = 0; j < spec.m; ++j) {
    auto wj = w.row(j);
    for (std::size_t p = 0; p < j; ++p) {
      auto wp = w.row(p);
      const double proj = dot(wj, wp);
      for (std::size_t c = 0; c < spec.d; ++c) wj[c] -= proj * wp[c];
    }
    const double nrm = std::sqrt(frobenius_sq(wj));
    if (nrm < 1e-12) {
      throw std::runtime_error(
          "synthetic_signal_rows: degenerate signal basis draw");
    }
    for (std::size_t c = 0; c < spec.d; ++c) wj[c] /= nrm;
  }
  return w;
}

std::unique_ptr<RowStream> gen_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  return std::make_unique<SyntheticStream>(spec);
}

}  // namespace fdsk
