#include "fdsketch/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fdsketch/linalg.hpp"

namespace fdsk {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

const char* ErrorReport::csv_header() {
  return "algo,ell,k,seed,covar_err,proj_err,covar_bound,proj_bound,"
         "sketch_seconds";
}

std::string ErrorReport::csv_row() const {
  std::ostringstream os;
  os << algo << ',' << ell << ',' << k << ',' << seed << ',' << fmt(covar_err)
     << ',' << fmt(proj_err) << ',' << fmt(covar_bound) << ','
     << fmt(proj_bound) << ',' << fmt(sketch_seconds);
  return os.str();
}

double covariance_error(const DenseMatrix& a, const DenseMatrix& b,
                        double tol) {
  const double denom = frobenius_sq(a);
  if (denom <= 0.0) {
    throw std::invalid_argument("covariance_error: ||A||_F is zero");
  }
  return spectral_norm_psd_diff(a, b, tol) / denom;
}

double tail_energy(const DenseMatrix& a, std::size_t k) {
  const double total = frobenius_sq(a);
  if (k == 0) return total;
  if (k > a.cols()) {
    throw std::invalid_argument("tail_energy: k exceeds column count");
  }
  std::vector<double> tmp(a.rows());
  auto apply = [&](std::span<const double> in, std::span<double> out) {
    mat_vec(a, in, tmp);
    mat_t_vec(a, tmp, out);
  };
  auto eig = sym_eig_topk(apply, a.cols(), k, 1e-13, 20000);
  double head = 0.0;
  for (double v : eig.values) head += std::max(v, 0.0);
  return std::max(total - head, 0.0);
}

double projection_error(const DenseMatrix& a, const DenseMatrix& b,
                        std::size_t k) {
  const double total = frobenius_sq(a);
  const double tail = tail_energy(a, k);
  if (tail <= 1e-12 * total) {
    throw std::invalid_argument(
        "projection_error: denominator degenerate (rank(A) <= k)");
  }
  return projection_residual(a, b, k) / tail;
}

double projection_residual(const DenseMatrix& a, const DenseMatrix& b,
                           std::size_t k) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("projection_error: column mismatch");
  }
  if (k < 1 || k >= a.cols()) {
    throw std::invalid_argument("projection_error: need 1 <= k < cols");
  }
  const double total = frobenius_sq(a);

  // Right singular directions of the sketch; a short-fat sketch feeds
  // thin_svd directly, a tall one goes through its transpose (directions
  // are then the columns of the u factor).
  const bool tall = b.rows() > b.cols();
  ThinSvd svd = tall ? thin_svd(b.transposed()) : thin_svd(b);
  const std::size_t r = svd.sigma.size();
  const double cutoff = (r > 0 ? svd.sigma[0] : 0.0) * 1e-12;

  // ||A - A V_k^T V_k||_F^2 = ||A||_F^2 - sum_i ||A v_i||^2 over the kept
  // directions.
  double captured = 0.0;
  std::vector<double> av(a.rows());
  std::vector<double> v(a.cols());
  std::size_t used = 0;
  for (std::size_t i = 0; i < r && used < k; ++i) {
    if (svd.sigma[i] <= cutoff) break;
    if (tall) {
      for (std::size_t c = 0; c < a.cols(); ++c) v[c] = svd.u(c, i);
    } else {
      auto row = svd.vt.row(i);
      std::copy(row.begin(), row.end(), v.begin());
    }
    mat_vec(a, v, av);
    captured += frobenius_sq(std::span<const double>(av.data(), av.size()));
    ++used;
  }
  return std::max(total - captured, 0.0);
}

double fd_bound_covar(std::size_t ell) {
  if (ell < 1) throw std::invalid_argument("fd_bound_covar: ell >= 1");
  return 1.0 / static_cast<double>(ell);
}

double fd_bound_proj(std::size_t ell, std::size_t k) {
  if (k >= ell) {
    throw std::invalid_argument("fd_bound_proj: need k < ell");
  }
  return static_cast<double>(ell) / static_cast<double>(ell - k);
}

}  // namespace fdsk
