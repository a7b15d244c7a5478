#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>

namespace fdsk {

/// Misra-Gries frequent-items summary with ell counters. Counts are reals
/// so the "decrease everything by the minimum" step is exact; between
/// updates fewer than ell items hold strictly positive counts. Estimates
/// only ever undercount: 0 <= f_j - estimate(j) <= n / ell.
class FiSummary {
 public:
  explicit FiSummary(std::size_t ell) : ell_(ell) {
    if (ell < 1) throw std::invalid_argument("FiSummary: ell must be >= 1");
  }

  void update(std::uint64_t item);
  double estimate(std::uint64_t item) const;

  std::size_t ell() const { return ell_; }
  std::size_t n() const { return n_; }
  const std::map<std::uint64_t, double>& counters() const { return counters_; }

 private:
  std::size_t ell_;
  std::size_t n_ = 0;
  std::map<std::uint64_t, double> counters_;  // at most ell entries
};

}  // namespace fdsk
