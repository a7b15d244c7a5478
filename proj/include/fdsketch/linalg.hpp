#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fdsketch/matrix.hpp"

namespace fdsk {

/// Thin SVD factors of a short-fat matrix m (rows <= cols):
/// m = u * diag(sigma) * vt with r = m.rows() factors. Rows of vt whose
/// singular value is (numerically) zero are all-zero unless the
/// decomposition was requested with a completed basis.
struct ThinSvd {
  DenseMatrix u;              // r x r, orthonormal columns
  std::vector<double> sigma;  // length r, non-increasing, >= 0
  DenseMatrix vt;             // r x d
};

/// Thin SVD by one-sided Jacobi: plane rotations applied from the left
/// orthogonalize the rows of m, giving sigma_i as the resulting row norms,
/// vt as the normalized rows (for sigma_i above the rank cutoff
/// sigma_1 * 1e-12; the rest are zeroed) and u as the transposed rotation
/// product. Kept vt rows are sign-normalized so their largest-magnitude
/// entry is positive. If complete_basis is true, zero-sigma rows of vt are
/// filled with an orthonormal completion instead of zeros.
ThinSvd thin_svd(const DenseMatrix& m, bool complete_basis = false);

using LinearOp = std::function<void(std::span<const double> in,
                                    std::span<double> out)>;

struct TopkEig {
  std::vector<double> values;  // k values, non-increasing
  DenseMatrix vectors;         // k x dim, orthonormal rows
};

/// Thrown by sym_eig_topk when the eigenvalue estimates have not settled
/// after max_iter iterations; carries the last iterate.
class EigNonConvergence : public std::runtime_error {
 public:
  EigNonConvergence(std::string msg, TopkEig last)
      : std::runtime_error(std::move(msg)), last_iterate(std::move(last)) {}
  TopkEig last_iterate;
};

/// Top-k eigenpairs of a symmetric PSD operator on R^dim via orthogonal
/// (block power) iteration. Converged when every eigenvalue estimate moves
/// by less than tol * (lambda_1 + tol) between iterations.
TopkEig sym_eig_topk(const LinearOp& apply, std::size_t dim, std::size_t k,
                     double tol = 1e-12, std::size_t max_iter = 10000);

/// ||A^T A - B^T B||_2 computed matrix-free by power iteration on the
/// squared difference operator x -> D(D(x)), D(x) = A^T(Ax) - B^T(Bx).
/// Returns the largest absolute eigenvalue of D; never materializes a
/// d x d matrix. Accurate to roughly tol relative.
double spectral_norm_psd_diff(const DenseMatrix& a, const DenseMatrix& b,
                              double tol = 1e-10);

namespace detail {

/// One-sided Jacobi kernel shared by thin_svd and the sketch shrink path:
/// rotates row pairs of the first `nrows` rows of `rows` until every pair
/// is relatively orthogonal (|<p,q>| <= 1e-13 ||p|| ||q||), at most 30
/// sweeps. The first `warm` rows may be flagged as already mutually
/// orthogonal (their pairs are skipped in the first sweep). When
/// left_accum is non-null it must be an nrows x nrows identity; it
/// receives the rotation product J with J * M_in = M_out. `ops` counts
/// d-proportional scalar work.
struct OnesidedResult {
  std::vector<double> norms_sq;
  std::size_t sweeps = 0;
};
OnesidedResult onesided_orthogonalize_rows(DenseMatrix& rows,
                                           std::size_t nrows,
                                           std::size_t warm,
                                           DenseMatrix* left_accum,
                                           std::uint64_t& ops);

}  // namespace detail

}  // namespace fdsk
