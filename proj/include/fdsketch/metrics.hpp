#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fdsketch/matrix.hpp"

namespace fdsk {

/// One (algorithm, ell) cell of an experiment grid.
struct ErrorReport {
  std::string algo;
  std::size_t ell = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double covar_err = 0.0;
  double proj_err = 0.0;
  double covar_bound = 0.0;
  double proj_bound = 0.0;
  double sketch_seconds = 0.0;

  static const char* csv_header();  // algo,ell,k,seed,...
  std::string csv_row() const;
};

/// ||A^T A - B^T B||_2 / ||A||_F^2, computed matrix-free.
double covariance_error(const DenseMatrix& a, const DenseMatrix& b,
                        double tol = 1e-10);

/// ||A - pi_{B_k}(A)||_F^2 / ||A - A_k||_F^2 where pi projects A onto the
/// top-k right singular directions of b (directions with sigma above the
/// rank cutoff; fewer usable directions mean projecting onto what exists,
/// an empty sketch projects to zero). Throws when the denominator is
/// degenerate (A essentially of rank <= k).
double projection_error(const DenseMatrix& a, const DenseMatrix& b,
                        std::size_t k);

/// Numerator of projection_error: ||A - pi_{B_k}(A)||_F^2.
double projection_residual(const DenseMatrix& a, const DenseMatrix& b,
                           std::size_t k);

/// ||A - A_k||_F^2 = ||A||_F^2 minus the top-k eigenvalues of A^T A.
double tail_energy(const DenseMatrix& a, std::size_t k);

/// Worst-case FD guarantees used as reference curves: 1/ell for the
/// covariance error and ell/(ell-k) for the projection error.
double fd_bound_covar(std::size_t ell);
double fd_bound_proj(std::size_t ell, std::size_t k);

}  // namespace fdsk
