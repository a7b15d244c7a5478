#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdsketch/matrix.hpp"

namespace fdsk {

enum class FdVariant : std::uint8_t {
  kSimple = 0,       // ell x d buffer, one shrink per appended row
  kFast = 1,         // 2*ell x d buffer, shrink only when it fills
  kBoundedStep = 2,  // two buffers, shrink work spread over appends
};

const char* to_string(FdVariant v);

/// An ell x d sketch matrix together with the total shrinkage it carries.
/// delta bounds ||A^T A - B^T B||_2 for the stream the sketch consumed.
struct FinalizedSketch {
  DenseMatrix b;
  double delta = 0.0;
};

/// Streaming Frequent Directions sketch. Rows are appended one at a time;
/// whenever the working buffer fills, its rows are orthogonalized and every
/// squared singular value is reduced by delta = sigma_ell^2 (clamped at
/// zero), freeing at least one buffer row. The accumulated shrinkage
/// delta() certifies the sketch error. Single writer; finalize() is
/// non-destructive and the sketch may keep receiving rows afterwards.
class FdSketch {
 public:
  FdSketch(std::size_t ell, std::size_t d, FdVariant variant);

  /// Reconstructs a sketch from serialized parts (see io.hpp). `rows`
  /// holds the finalized buffer; extra capacity is re-created zero.
  static FdSketch from_parts(std::size_t ell, std::size_t d,
                             FdVariant variant, double delta,
                             std::size_t rows_seen, double input_frob_sq,
                             const DenseMatrix& rows);

  void append(std::span<const double> row);
  void append_rows(const DenseMatrix& m);

  FinalizedSketch finalize() const;

  std::size_t ell() const { return ell_; }
  std::size_t d() const { return d_; }
  FdVariant variant() const { return variant_; }

  /// Total shrinkage applied so far (sum of per-shrink deltas). Monotone
  /// non-decreasing; does not include the extra shrink finalize() may add.
  double delta() const { return delta_; }
  std::size_t rows_seen() const { return rows_seen_; }
  double input_frob_sq() const { return input_frob_sq_; }

  /// Scalar-operation counters (d-proportional work units) for update-cost
  /// instrumentation.
  std::uint64_t last_append_ops() const { return last_ops_; }
  std::uint64_t total_ops() const { return total_ops_; }

  /// Working buffer (Simple/Fast: the sketch buffer; BoundedStep: the
  /// currently active internal buffer).
  const DenseMatrix& buffer() const;
  std::size_t buffer_filled() const;

 private:
  struct SubSketch {
    DenseMatrix buf;         // capacity x d, non-zero rows first
    std::size_t filled = 0;  // rows in use
    std::size_t warm = 0;    // leading rows known mutually orthogonal
  };

  // Incremental shrink of one buffer: Gram accumulation, two-sided Jacobi
  // rotations and output-row reconstruction are decomposed into
  // O(d)-or-O(r) micro-steps so a fixed work budget per append completes
  // the shrink within ell appends.
  struct ShrinkJob {
    bool active = false;
    std::size_t r = 0, ell = 0, d = 0;
    int phase = 0;  // 0 gram, 1 rotate, 2 reconstruct, 3 polish
    std::size_t gi = 0, gj = 0;
    std::size_t sweep = 0, jp = 0, jq = 1;
    bool rotated_this_sweep = false;
    double thresh = 0.0;
    DenseMatrix g, evec;
    std::vector<std::size_t> surv;  // eigen indices, by descending value
    std::vector<double> coeff;      // per-survivor row scale
    double delta = 0.0;
    std::size_t oi = 0, oj = 0;
    std::size_t pi = 1, pj = 0;
    DenseMatrix out;
    double est_total = 0.0, done = 0.0;
    double sweeps_sched = 10.0;
    std::size_t sweeps_used = 0;

    void start(const SubSketch& src, std::size_t ell, std::size_t d,
               double sweeps_est);
    // Runs micro-steps until `budget` work units are consumed or the job
    // completes; on completion writes the shrunk rows back into dst.
    void advance(SubSketch& dst, double& delta_accum, double budget,
                 std::uint64_t& ops);
    void run_to_completion(SubSketch& dst, double& delta_accum,
                           std::uint64_t& ops);
    double remaining_estimate() const;

   private:
    bool step(SubSketch& dst, double& delta_accum, double& spent,
              std::uint64_t& ops);
    void prepare_reconstruction(const SubSketch& src);
    void finish(SubSketch& dst, double& delta_accum, std::uint64_t& ops);
  };

  struct BoundedExtra {
    SubSketch other;
    ShrinkJob job;
    bool core_active = true;
    std::size_t epoch_pos = 0;
    double sweeps_prev = 10.0;
  };

  void append_simple_fast(std::span<const double> row);
  void append_bounded(std::span<const double> row);
  // Loads `count` rows of m into a fresh buffer slot-by-slot applying Fast
  // semantics; used by merging. Does not touch rows_seen/input_frob_sq.
  void raw_fast_append(std::span<const double> row);
  // Collapses a BoundedStep pair into an equivalent Fast sketch.
  FdSketch bounded_combine() const;

  friend FdSketch fd_merge(const FdSketch& s1, const FdSketch& s2,
                           double* merge_delta);

  std::size_t ell_ = 0, d_ = 0;
  FdVariant variant_ = FdVariant::kSimple;
  SubSketch core_;
  std::optional<BoundedExtra> bounded_;
  double delta_ = 0.0;
  std::size_t rows_seen_ = 0;
  double input_frob_sq_ = 0.0;
  std::uint64_t last_ops_ = 0;
  std::uint64_t total_ops_ = 0;
};

/// Merges two sketches with equal ell and d into a Fast sketch whose
/// guarantees hold for the concatenated input with
/// delta = delta1 + delta2 + (shrinkage incurred while merging). The
/// incurred part is written to merge_delta when given, so
/// (s1.delta() + s2.delta()) + *merge_delta reproduces the result's
/// delta() bit for bit.
FdSketch fd_merge(const FdSketch& s1, const FdSketch& s2,
                  double* merge_delta = nullptr);

namespace detail {

/// In-place shrink of the first `nrows` rows of buf: one-sided Jacobi row
/// orthogonalization, rows sorted by descending norm, every squared norm
/// reduced by delta = (ell_pos-th largest squared norm), surviving rows
/// sign-normalized, the rest zeroed. The first `warm` rows may be flagged
/// as already mutually orthogonal. Returns delta and the survivor count.
struct ShrinkResult {
  double delta = 0.0;
  std::size_t survivors = 0;
  std::size_t sweeps = 0;
};
ShrinkResult shrink_rows(DenseMatrix& buf, std::size_t nrows,
                         std::size_t ell_pos, std::size_t warm,
                         std::uint64_t& ops);

}  // namespace detail

}  // namespace fdsk
