#pragma once

#include <cstdint>
#include <memory>

#include "fdsketch/io.hpp"
#include "fdsketch/matrix.hpp"

namespace fdsk {

/// Signal-plus-noise model: row i is s_i^T D W + n_i / zeta with
/// s_i ~ N(0, I_m), n_i ~ N(0, I_d), D_jj = 1 - (j-1)/m linearly
/// diminishing, and W an m x d matrix with orthonormal rows drawn once per
/// seed. zeta may be +inf to emit the exactly rank-m noiseless part.
struct SyntheticSpec {
  std::size_t n = 10000;
  std::size_t d = 1000;
  std::size_t m = 10;
  double zeta = 10.0;
  std::uint64_t seed = 0;
};

/// Streaming generator: O(m d) state, deterministic for a fixed spec.
std::unique_ptr<RowStream> gen_synthetic(const SyntheticSpec& spec);

/// The orthonormalized signal row space W (m x d) for a given spec; exposed
/// so tests can check W W^T = I_m.
DenseMatrix synthetic_signal_rows(const SyntheticSpec& spec);

}  // namespace fdsk
