#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

using fdsk::DenseMatrix;

Eig dense_sym_eig(const DenseMatrix& sym) {
  const std::size_t n = sym.rows();
  DenseMatrix a = sym;
  DenseMatrix v = DenseMatrix::identity(n);

  auto off_norm_sq = [&]() {
    double s = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return s;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) total += a(i, j) * a(i, j);
  const double stop = total * 1e-30 + 1e-300;

  for (int sweep = 0; sweep < 100 && off_norm_sq() > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double phi =
            0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vpi = v(p, i);
          const double vqi = v(q, i);
          v(p, i) = c * vpi - s * vqi;
          v(q, i) = s * vpi + c * vqi;
        }
      }
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) {
                     return a(x, x) > a(y, y);
                   });
  Eig out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = a(idx[i], idx[i]);
    out.vectors.set_row(i, v.row(idx[i]));
  }
  return out;
}

DenseMatrix gram_ata(const DenseMatrix& a) {
  const std::size_t d = a.cols();
  DenseMatrix g(d, d);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      if (row[i] == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) g(i, j) += row[i] * row[j];
    }
  }
  return g;
}

DenseMatrix covariance_diff(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix ga = gram_ata(a);
  const DenseMatrix gb = gram_ata(b);
  for (std::size_t i = 0; i < ga.rows(); ++i)
    for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) -= gb(i, j);
  return ga;
}

double spectral_norm_sym(const DenseMatrix& sym) {
  auto eig = dense_sym_eig(sym);
  double best = 0.0;
  for (double v : eig.values) best = std::max(best, std::abs(v));
  return best;
}

double min_eigenvalue(const DenseMatrix& sym) {
  auto eig = dense_sym_eig(sym);
  return eig.values.back();
}

std::vector<double> tail_energies(const DenseMatrix& a) {
  auto eig = dense_sym_eig(gram_ata(a));
  const std::size_t d = a.cols();
  std::vector<double> tails(d + 1, 0.0);
  // tails[k] = sum of eigenvalues k..d-1, clamped at zero
  for (std::size_t k = d; k-- > 0;) {
    tails[k] = tails[k + 1] + std::max(eig.values[k], 0.0);
  }
  return tails;
}

DenseMatrix random_matrix(std::uint64_t seed, std::size_t n, std::size_t d) {
  const fdsk::CounterRng rng(seed);
  DenseMatrix m(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = rng.gaussian(7, r * d + c);
  return m;
}

std::vector<std::uint64_t> zipf_stream(std::uint64_t seed, std::size_t n,
                                       std::size_t universe,
                                       double exponent) {
  std::vector<double> cdf(universe);
  double acc = 0.0;
  for (std::size_t r = 0; r < universe; ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    cdf[r] = acc;
  }
  const fdsk::CounterRng rng(seed);
  std::vector<std::uint64_t> stream(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform(11, i) * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    stream[i] =
        static_cast<std::uint64_t>(std::distance(cdf.begin(), it));
  }
  return stream;
}

}  // namespace oracle
