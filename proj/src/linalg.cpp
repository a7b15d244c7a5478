#include "fdsketch/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fdsketch/rng.hpp"

namespace fdsk {
namespace detail {

OnesidedResult onesided_orthogonalize_rows(DenseMatrix& rows,
                                           std::size_t nrows,
                                           std::size_t warm,
                                           DenseMatrix* left_accum,
                                           std::uint64_t& ops) {
  constexpr double kOrthEps = 1e-13;
  constexpr std::size_t kMaxSweeps = 30;
  const std::size_t d = rows.cols();

  OnesidedResult res;
  res.norms_sq.resize(nrows);
  for (std::size_t i = 0; i < nrows; ++i) {
    res.norms_sq[i] = frobenius_sq(rows.row(i));
  }
  ops += nrows * d;
  auto& n2 = res.norms_sq;

  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    res.sweeps = sweep + 1;
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < nrows; ++p) {
      for (std::size_t q = p + 1; q < nrows; ++q) {
        if (sweep == 0 && q < warm) continue;  // orthogonal by construction
        const double prod = n2[p] * n2[q];
        if (prod == 0.0) continue;
        auto rp = rows.row(p);
        auto rq = rows.row(q);
        const double c = dot(rp, rq);
        ops += d;
        if (c * c <= kOrthEps * kOrthEps * prod) continue;
        rotated = true;
        const double theta = (n2[q] - n2[p]) / (2.0 * c);
        double t;
        if (std::abs(theta) > 1e18) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        for (std::size_t i = 0; i < d; ++i) {
          const double xp = rp[i];
          const double xq = rq[i];
          rp[i] = cs * xp - sn * xq;
          rq[i] = sn * xp + cs * xq;
        }
        ops += 4 * d;
        if (left_accum != nullptr) {
          auto jp = left_accum->row(p);
          auto jq = left_accum->row(q);
          for (std::size_t i = 0; i < nrows; ++i) {
            const double xp = jp[i];
            const double xq = jq[i];
            jp[i] = cs * xp - sn * xq;
            jq[i] = sn * xp + cs * xq;
          }
          ops += 4 * nrows;
        }
        const double np = n2[p];
        const double nq = n2[q];
        n2[p] = cs * cs * np - 2.0 * cs * sn * c + sn * sn * nq;
        n2[q] = sn * sn * np + 2.0 * cs * sn * c + cs * cs * nq;
        // A norm that cancels almost completely is recomputed from the row
        // itself, and rows at rounding level are flushed to exact zero so
        // dependent inputs produce exact zero singular values.
        const double pair_scale = np + nq;
        for (std::size_t which : {p, q}) {
          if (n2[which] <= 1e-12 * pair_scale) {
            auto row = rows.row(which);
            n2[which] = frobenius_sq(row);
            ops += d;
            if (n2[which] <= 1e-28 * pair_scale) {
              std::fill(row.begin(), row.end(), 0.0);
              n2[which] = 0.0;
            }
          }
        }
      }
    }
    if (!rotated) break;
  }
  return res;
}

}  // namespace detail

namespace {

// Indices of values sorted non-increasing; stable so ties keep the Jacobi
// output order.
std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });
  return idx;
}

void sign_normalize_row(std::span<double> row) {
  std::size_t arg = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (std::abs(row[i]) > best) {
      best = std::abs(row[i]);
      arg = i;
    }
  }
  if (best > 0.0 && row[arg] < 0.0) {
    for (double& x : row) x = -x;
  }
}

}  // namespace

ThinSvd thin_svd(const DenseMatrix& m, bool complete_basis) {
  const std::size_t r = m.rows();
  const std::size_t d = m.cols();
  if (r > d) {
    throw std::invalid_argument(
        "thin_svd: rows > cols (" + std::to_string(r) + "x" +
        std::to_string(d) + "); transpose the input instead");
  }
  require_finite({m.data(), m.size()}, "thin_svd");

  // Left one-sided Jacobi: J M has orthogonal rows sigma_i v_i^T, so
  // M = J^T Sigma V^T with U = J^T (up to the descending-norm reordering).
  DenseMatrix work = m;
  DenseMatrix j_rows = DenseMatrix::identity(r);
  std::uint64_t ops = 0;
  auto orth = detail::onesided_orthogonalize_rows(work, r, 0, &j_rows, ops);

  std::vector<double> sig(r);
  for (std::size_t i = 0; i < r; ++i) {
    sig[i] = std::sqrt(std::max(orth.norms_sq[i], 0.0));
  }
  const auto order = descending_order(sig);

  ThinSvd out;
  out.sigma.resize(r);
  out.u = DenseMatrix(r, r);
  out.vt = DenseMatrix(r, d);
  for (std::size_t i = 0; i < r; ++i) {
    out.sigma[i] = sig[order[i]];
    for (std::size_t j = 0; j < r; ++j) {
      out.u(j, i) = j_rows(order[i], j);
    }
  }

  const double cutoff = out.sigma.empty() ? 0.0 : out.sigma[0] * 1e-12;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < r; ++i) {
    if (out.sigma[i] <= cutoff) break;  // sigma is sorted
    kept.push_back(i);
    auto vrow = out.vt.row(i);
    auto wrow = work.row(order[i]);
    const double inv = 1.0 / out.sigma[i];
    for (std::size_t c = 0; c < d; ++c) vrow[c] = wrow[c] * inv;
  }

  for (std::size_t i : kept) {
    auto vrow = out.vt.row(i);
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      if (std::abs(vrow[c]) > best) {
        best = std::abs(vrow[c]);
        arg = c;
      }
    }
    if (best > 0.0 && vrow[arg] < 0.0) {
      for (std::size_t c = 0; c < d; ++c) vrow[c] = -vrow[c];
      for (std::size_t j = 0; j < r; ++j) out.u(j, i) = -out.u(j, i);
    }
  }

  if (complete_basis && kept.size() < r) {
    // Greedy completion: repeatedly take the standard basis vector with the
    // largest residual against the rows chosen so far.
    std::vector<std::size_t> filled = kept;
    for (std::size_t i = kept.size(); i < r; ++i) {
      std::vector<double> best_res;
      double best_norm = -1.0;
      for (std::size_t cand = 0; cand < d; ++cand) {
        std::vector<double> res(d, 0.0);
        res[cand] = 1.0;
        for (std::size_t j : filled) {
          auto vj = out.vt.row(j);
          const double proj = vj[cand];  // dot with e_cand
          for (std::size_t c = 0; c < d; ++c) res[c] -= proj * vj[c];
        }
        const double nrm2 = frobenius_sq(res);
        if (nrm2 > best_norm) {
          best_norm = nrm2;
          best_res = std::move(res);
        }
      }
      const double nrm = std::sqrt(best_norm);
      auto vrow = out.vt.row(i);
      for (std::size_t c = 0; c < d; ++c) vrow[c] = best_res[c] / nrm;
      sign_normalize_row(vrow);
      filled.push_back(i);
    }
  }

  return out;
}

namespace {

// Orthonormalize rows in place by modified Gram-Schmidt. Rows that vanish
// are replaced with fresh seeded random directions so the basis stays full
// rank; their Rayleigh quotients then settle to the trailing eigenvalues.
void orthonormalize_rows(DenseMatrix& x, const CounterRng& rng,
                         std::uint64_t& fresh_counter) {
  const std::size_t k = x.rows();
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < k; ++i) {
    auto xi = x.row(i);
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (std::size_t j = 0; j < i; ++j) {
        auto xj = x.row(j);
        const double proj = dot({xi.data(), d}, {xj.data(), d});
        for (std::size_t c = 0; c < d; ++c) xi[c] -= proj * xj[c];
      }
      const double nrm = std::sqrt(frobenius_sq({xi.data(), d}));
      if (nrm > 1e-12) {
        for (std::size_t c = 0; c < d; ++c) xi[c] /= nrm;
        break;
      }
      for (std::size_t c = 0; c < d; ++c) {
        xi[c] = rng.gaussian(9000, fresh_counter * d + c);
      }
      ++fresh_counter;
    }
  }
}

}  // namespace

TopkEig sym_eig_topk(const LinearOp& apply, std::size_t dim, std::size_t k,
                     double tol, std::size_t max_iter) {
  if (k < 1 || k > dim) {
    throw std::invalid_argument("sym_eig_topk: need 1 <= k <= dim");
  }
  const CounterRng rng(0x7a3f9d2c15b64e81ULL);
  std::uint64_t fresh_counter = 1;

  DenseMatrix x(k, dim);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      x(i, c) = rng.gaussian(i, c);
    }
  }
  orthonormalize_rows(x, rng, fresh_counter);

  DenseMatrix y(k, dim);
  std::vector<double> values(k, 0.0);
  std::vector<double> prev(k, 0.0);
  bool have_prev = false;
  // Eigenvalue estimates settle before the eigenvectors do; holding the
  // convergence condition over several iterations lets the residual
  // directions decay as well.
  int settled = 0;
  constexpr int kSettleIters = 15;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double lambda_max = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      apply(x.row(i), y.row(i));
      values[i] = dot(x.row(i), y.row(i));
      lambda_max = std::max(lambda_max, values[i]);
    }
    if (have_prev) {
      double change = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        change = std::max(change, std::abs(values[i] - prev[i]));
      }
      settled = (change < tol * (lambda_max + tol)) ? settled + 1 : 0;
      if (settled >= kSettleIters) {
        const auto order = descending_order(values);
        TopkEig out;
        out.values.resize(k);
        out.vectors = DenseMatrix(k, dim);
        for (std::size_t i = 0; i < k; ++i) {
          out.values[i] = values[order[i]];
          out.vectors.set_row(i, x.row(order[i]));
        }
        return out;
      }
    }
    prev = values;
    have_prev = true;
    x = y;
    orthonormalize_rows(x, rng, fresh_counter);
  }

  const auto order = descending_order(values);
  TopkEig last;
  last.values.resize(k);
  last.vectors = DenseMatrix(k, dim);
  for (std::size_t i = 0; i < k; ++i) {
    last.values[i] = values[order[i]];
    last.vectors.set_row(i, x.row(order[i]));
  }
  throw EigNonConvergence(
      "sym_eig_topk: no convergence after " + std::to_string(max_iter) +
          " iterations",
      std::move(last));
}

double spectral_norm_psd_diff(const DenseMatrix& a, const DenseMatrix& b,
                              double tol) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("spectral_norm_psd_diff: column mismatch");
  }
  const std::size_t d = a.cols();
  if (d == 0) return 0.0;

  std::vector<double> ta(a.rows()), tb(b.rows());
  std::vector<double> tmp(d);
  // out = A^T(A x) - B^T(B x)
  auto apply_diff = [&](std::span<const double> in, std::span<double> out) {
    mat_vec(a, in, ta);
    mat_t_vec(a, ta, out);
    if (b.rows() > 0) {
      mat_vec(b, in, tb);
      mat_t_vec(b, tb, tmp);
      for (std::size_t c = 0; c < d; ++c) out[c] -= tmp[c];
    }
  };

  const double scale = frobenius_sq(a) + frobenius_sq(b);
  if (scale == 0.0) return 0.0;
  const double tiny = 1e-15 * scale;
  const CounterRng rng(0x51c3d9a47be02f6dULL);

  double best = 0.0;
  for (std::uint64_t start = 0; start < 3; ++start) {
    std::vector<double> x(d), y(d), z(d);
    for (std::size_t c = 0; c < d; ++c) x[c] = rng.gaussian(start, c);
    double nx = std::sqrt(frobenius_sq(x));
    for (double& v : x) v /= nx;

    double est_prev = -1.0;
    int settled = 0;
    for (std::size_t iter = 0; iter < 50000; ++iter) {
      apply_diff(x, y);
      const double est = std::sqrt(frobenius_sq(y));
      if (!std::isfinite(est)) {
        throw std::runtime_error(
            "spectral_norm_psd_diff: non-finite intermediate");
      }
      best = std::max(best, est);
      if (est <= tiny) break;  // start vector lies in the null space
      if (est_prev >= 0.0 && std::abs(est - est_prev) <= tol * est) {
        if (++settled >= 3 && iter >= 8) return est;
      } else {
        settled = 0;
      }
      est_prev = est;
      apply_diff(y, z);
      const double nz = std::sqrt(frobenius_sq(z));
      if (nz <= tiny * est) return est;
      for (std::size_t c = 0; c < d; ++c) x[c] = z[c] / nz;
    }
    if (best > tiny) break;  // converged-by-exhaustion on a live start
  }
  return best;
}

}  // namespace fdsk
