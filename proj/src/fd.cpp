#include "fdsketch/fd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdsketch/linalg.hpp"

namespace fdsk {

namespace {

void sign_normalize(std::span<double> row) {
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

const char* to_string(FdVariant v) {
  switch (v) {
    case FdVariant::kSimple: return "simple";
    case FdVariant::kFast: return "fast";
    case FdVariant::kBoundedStep: return "bounded";
  }
  return "?";
}

namespace detail {

ShrinkResult shrink_rows(DenseMatrix& buf, std::size_t nrows,
                         std::size_t ell_pos, std::size_t warm,
                         std::uint64_t& ops) {
  const std::size_t d = buf.cols();
  ShrinkResult res;

  auto orth = onesided_orthogonalize_rows(buf, nrows, warm, nullptr, ops);
  res.sweeps = orth.sweeps;
  const auto& n2 = orth.norms_sq;

  // Stable descending sort keeps the Jacobi output order on ties.
  std::vector<std::size_t> order(nrows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return n2[a] > n2[b]; });

  DenseMatrix sorted(nrows, d);
  for (std::size_t i = 0; i < nrows; ++i) {
    sorted.set_row(i, buf.row(order[i]));
  }
  ops += nrows * d;

  res.delta = (nrows >= ell_pos) ? std::max(n2[order[ell_pos - 1]], 0.0) : 0.0;

  std::size_t survivors = 0;
  for (std::size_t i = 0; i < nrows; ++i) {
    const double nn = n2[order[i]];
    auto dst = buf.row(i);
    if (nn > res.delta && nn > 0.0) {
      const double f = std::sqrt(std::max(nn - res.delta, 0.0) / nn);
      auto src = sorted.row(i);
      for (std::size_t c = 0; c < d; ++c) dst[c] = f * src[c];
      sign_normalize(dst);
      ops += d;
      ++survivors;
    } else {
      std::fill(dst.begin(), dst.end(), 0.0);
    }
  }
  res.survivors = survivors;
  return res;
}

}  // namespace detail

FdSketch::FdSketch(std::size_t ell, std::size_t d, FdVariant variant)
    : ell_(ell), d_(d), variant_(variant) {
  if (ell < 2) {
    throw std::invalid_argument("FdSketch: ell must be at least 2, got " +
                                std::to_string(ell));
  }
  if (d < 1) {
    throw std::invalid_argument("FdSketch: d must be at least 1");
  }
  const std::size_t cap = (variant == FdVariant::kSimple) ? ell : 2 * ell;
  core_.buf = DenseMatrix(cap, d);
  if (variant == FdVariant::kBoundedStep) {
    bounded_.emplace();
    bounded_->other.buf = DenseMatrix(cap, d);
  }
}

FdSketch FdSketch::from_parts(std::size_t ell, std::size_t d,
                              FdVariant variant, double delta,
                              std::size_t rows_seen, double input_frob_sq,
                              const DenseMatrix& rows) {
  FdSketch s(ell, d, variant);
  if (rows.cols() != d || rows.rows() > s.core_.buf.rows()) {
    throw std::invalid_argument("FdSketch::from_parts: row block mismatch");
  }
  std::size_t filled = 0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    if (rows.row_is_zero(r)) continue;
    s.core_.buf.set_row(filled, rows.row(r));
    ++filled;
  }
  s.core_.filled = filled;
  s.core_.warm = 0;
  s.delta_ = delta;
  s.rows_seen_ = rows_seen;
  s.input_frob_sq_ = input_frob_sq;
  return s;
}

void FdSketch::append(std::span<const double> row) {
  if (row.size() != d_) {
    throw std::invalid_argument("FdSketch::append: row length " +
                                std::to_string(row.size()) + ", expected " +
                                std::to_string(d_));
  }
  require_finite(row, "FdSketch::append");
  last_ops_ = 0;
  rows_seen_ += 1;
  input_frob_sq_ += frobenius_sq(row);
  last_ops_ += d_;
  if (variant_ == FdVariant::kBoundedStep) {
    append_bounded(row);
  } else {
    append_simple_fast(row);
  }
  total_ops_ += last_ops_;
}

void FdSketch::append_rows(const DenseMatrix& m) {
  if (m.cols() != d_) {
    throw std::invalid_argument("FdSketch::append_rows: column mismatch");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) append(m.row(r));
}

void FdSketch::append_simple_fast(std::span<const double> row) {
  if (variant_ == FdVariant::kSimple) {
    // The last buffer row is all-zero between appends.
    core_.buf.set_row(ell_ - 1, row);
    last_ops_ += d_;
    auto res = detail::shrink_rows(core_.buf, ell_, ell_, ell_ - 1, last_ops_);
    delta_ += res.delta;
    core_.filled = res.survivors;
    core_.warm = res.survivors;
    return;
  }
  core_.buf.set_row(core_.filled, row);
  core_.filled += 1;
  last_ops_ += d_;
  if (core_.filled == 2 * ell_) {
    auto res =
        detail::shrink_rows(core_.buf, 2 * ell_, ell_, core_.warm, last_ops_);
    delta_ += res.delta;
    core_.filled = res.survivors;
    core_.warm = res.survivors;
  }
}

void FdSketch::raw_fast_append(std::span<const double> row) {
  core_.buf.set_row(core_.filled, row);
  core_.filled += 1;
  last_ops_ += d_;
  if (core_.filled == 2 * ell_) {
    auto res =
        detail::shrink_rows(core_.buf, 2 * ell_, ell_, core_.warm, last_ops_);
    delta_ += res.delta;
    core_.filled = res.survivors;
    core_.warm = res.survivors;
  }
}

// ---------------------------------------------------------------------------
// BoundedStep: one buffer aggregates rows while the other works off its
// pending shrink in fixed per-append installments; roles swap every ell
// appends and finalize combines the pair through the merge path.
// ---------------------------------------------------------------------------

void FdSketch::append_bounded(std::span<const double> row) {
  BoundedExtra& bx = *bounded_;
  SubSketch& active = bx.core_active ? core_ : bx.other;
  SubSketch& maint = bx.core_active ? bx.other : core_;

  active.buf.set_row(active.filled, row);
  active.filled += 1;
  last_ops_ += d_;

  if (bx.job.active) {
    const std::size_t appends_left = ell_ - bx.epoch_pos;
    const double budget = bx.job.remaining_estimate() /
                          static_cast<double>(appends_left);
    bx.job.advance(maint, delta_, budget, last_ops_);
    if (!bx.job.active) {
      bx.sweeps_prev = static_cast<double>(bx.job.sweeps_used);
    }
  }

  bx.epoch_pos += 1;
  if (bx.epoch_pos == ell_) {
    if (bx.job.active) {  // schedule slipped; settle before the swap
      bx.job.run_to_completion(maint, delta_, last_ops_);
      bx.sweeps_prev = static_cast<double>(bx.job.sweeps_used);
    }
    if (active.filled > ell_) {
      bx.job.start(active, ell_, d_, bx.sweeps_prev + 2.0);
    }
    bx.core_active = !bx.core_active;
    bx.epoch_pos = 0;
  }
}

FdSketch FdSketch::bounded_combine() const {
  const BoundedExtra& bx = *bounded_;
  SubSketch a = bx.core_active ? core_ : bx.other;   // active copy
  SubSketch m = bx.core_active ? bx.other : core_;   // maintenance copy
  double delta = delta_;
  std::uint64_t scratch_ops = 0;
  if (bx.job.active) {
    ShrinkJob job = bx.job;
    job.run_to_completion(m, delta, scratch_ops);
  }

  FdSketch combined(ell_, d_, FdVariant::kFast);
  combined.delta_ = delta;
  combined.rows_seen_ = rows_seen_;
  combined.input_frob_sq_ = input_frob_sq_;
  for (std::size_t r = 0; r < m.filled; ++r) {
    if (m.buf.row_is_zero(r)) continue;
    combined.raw_fast_append(m.buf.row(r));
  }
  for (std::size_t r = 0; r < a.filled; ++r) {
    if (a.buf.row_is_zero(r)) continue;
    combined.raw_fast_append(a.buf.row(r));
  }
  return combined;
}

FinalizedSketch FdSketch::finalize() const {
  if (variant_ == FdVariant::kBoundedStep) {
    return bounded_combine().finalize();
  }
  FinalizedSketch fin;
  fin.delta = delta_;
  fin.b = DenseMatrix(ell_, d_);
  if (core_.filled <= ell_) {
    for (std::size_t r = 0; r < core_.filled; ++r) {
      fin.b.set_row(r, core_.buf.row(r));
    }
    return fin;
  }
  DenseMatrix work = core_.buf;
  std::uint64_t ops = 0;
  auto res = detail::shrink_rows(work, core_.filled, ell_, core_.warm, ops);
  fin.delta += res.delta;
  for (std::size_t r = 0; r < std::min(res.survivors, ell_); ++r) {
    fin.b.set_row(r, work.row(r));
  }
  return fin;
}

const DenseMatrix& FdSketch::buffer() const {
  if (variant_ == FdVariant::kBoundedStep && !bounded_->core_active) {
    return bounded_->other.buf;
  }
  return core_.buf;
}

std::size_t FdSketch::buffer_filled() const {
  if (variant_ == FdVariant::kBoundedStep && !bounded_->core_active) {
    return bounded_->other.filled;
  }
  return core_.filled;
}

FdSketch fd_merge(const FdSketch& s1, const FdSketch& s2,
                  double* merge_delta) {
  if (s1.ell() != s2.ell() || s1.d() != s2.d()) {
    throw std::invalid_argument("fd_merge: sketch shape mismatch (" +
                                std::to_string(s1.ell()) + "x" +
                                std::to_string(s1.d()) + " vs " +
                                std::to_string(s2.ell()) + "x" +
                                std::to_string(s2.d()) + ")");
  }
  const FdSketch ca = (s1.variant() == FdVariant::kBoundedStep)
                          ? s1.bounded_combine()
                          : FdSketch(s1);
  const FdSketch cb = (s2.variant() == FdVariant::kBoundedStep)
                          ? s2.bounded_combine()
                          : FdSketch(s2);

  FdSketch out(ca.ell(), ca.d(), FdVariant::kFast);
  out.rows_seen_ = ca.rows_seen_ + cb.rows_seen_;
  out.input_frob_sq_ = ca.input_frob_sq_ + cb.input_frob_sq_;

  // delta_ accumulates only the shrinkage incurred here, then the input
  // deltas are added in one shot so the bookkeeping is reproducible.
  for (std::size_t r = 0; r < ca.core_.filled; ++r) {
    if (ca.core_.buf.row_is_zero(r)) continue;
    out.raw_fast_append(ca.core_.buf.row(r));
  }
  for (std::size_t r = 0; r < cb.core_.filled; ++r) {
    if (cb.core_.buf.row_is_zero(r)) continue;
    out.raw_fast_append(cb.core_.buf.row(r));
  }
  if (merge_delta != nullptr) *merge_delta = out.delta_;
  out.delta_ = (ca.delta_ + cb.delta_) + out.delta_;
  out.total_ops_ += out.last_ops_;
  return out;
}

// ---------------------------------------------------------------------------
// ShrinkJob
// ---------------------------------------------------------------------------

void FdSketch::ShrinkJob::start(const SubSketch& src, std::size_t ell_in,
                                std::size_t d_in, double sweeps_est) {
  active = true;
  r = src.filled;
  ell = ell_in;
  d = d_in;
  phase = 0;
  gi = gj = 0;
  sweep = 0;
  jp = 0;
  jq = 1;
  rotated_this_sweep = false;
  thresh = 0.0;
  g = DenseMatrix(r, r);
  evec = DenseMatrix::identity(r);
  surv.clear();
  coeff.clear();
  delta = 0.0;
  oi = oj = 0;
  pi = 1;
  pj = 0;
  out = DenseMatrix();
  done = 0.0;
  sweeps_sched = std::clamp(sweeps_est, 3.0, 30.0);
  sweeps_used = 0;

  const double dd = static_cast<double>(d);
  const double rr = static_cast<double>(r);
  const double pairs = rr * (rr - 1.0) / 2.0;
  est_total = (rr * (rr + 1.0) / 2.0) * dd          // Gram entries
              + sweeps_sched * pairs * 6.0 * rr     // rotations
              + std::min(rr, static_cast<double>(ell)) * rr * dd  // recon
              + std::min(rr, static_cast<double>(ell)) *
                    std::min(rr, static_cast<double>(ell)) * 1.5 * dd;
}

double FdSketch::ShrinkJob::remaining_estimate() const {
  if (!active) return 0.0;
  return std::max(est_total - done, 1.0);
}

void FdSketch::ShrinkJob::advance(SubSketch& dst, double& delta_accum,
                                  double budget, std::uint64_t& ops) {
  double spent = 0.0;
  while (active && spent < budget) {
    if (!step(dst, delta_accum, spent, ops)) break;
  }
  done += spent;
}

void FdSketch::ShrinkJob::run_to_completion(SubSketch& dst,
                                            double& delta_accum,
                                            std::uint64_t& ops) {
  double spent = 0.0;
  while (active) {
    if (!step(dst, delta_accum, spent, ops)) break;
  }
  done += spent;
}

bool FdSketch::ShrinkJob::step(SubSketch& dst, double& delta_accum,
                               double& spent, std::uint64_t& ops) {
  if (!active) return false;
  if (r == 0) {  // nothing to shrink
    finish(dst, delta_accum, ops);
    return false;
  }
  switch (phase) {
    case 0: {  // one Gram entry g(gi, gj)
      const double v = dot(dst.buf.row(gi), dst.buf.row(gj));
      g(gi, gj) = v;
      g(gj, gi) = v;
      spent += static_cast<double>(d);
      ops += d;
      if (++gj == r) {
        ++gi;
        gj = gi;
      }
      if (gi == r) {
        double trace = 0.0;
        for (std::size_t i = 0; i < r; ++i) trace += g(i, i);
        thresh = 1e-14 * trace;
        phase = (r > 1) ? 1 : 2;
        if (phase == 2) prepare_reconstruction(dst);
      }
      return true;
    }
    case 1: {  // one Jacobi pair visit
      const double apq = g(jp, jq);
      if (std::abs(apq) > thresh) {
        rotated_this_sweep = true;
        const double app = g(jp, jp);
        const double aqq = g(jq, jq);
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e18) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        g(jp, jp) = app - t * apq;
        g(jq, jq) = aqq + t * apq;
        g(jp, jq) = 0.0;
        g(jq, jp) = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
          if (i == jp || i == jq) continue;
          const double aip = g(i, jp);
          const double aiq = g(i, jq);
          g(i, jp) = aip - s * (aiq + tau * aip);
          g(i, jq) = aiq + s * (aip - tau * aiq);
          g(jp, i) = g(i, jp);
          g(jq, i) = g(i, jq);
        }
        auto vp = evec.row(jp);
        auto vq = evec.row(jq);
        for (std::size_t i = 0; i < r; ++i) {
          const double xp = vp[i];
          const double xq = vq[i];
          vp[i] = xp - s * (xq + tau * xp);
          vq[i] = xq + s * (xp - tau * xq);
        }
        spent += 6.0 * static_cast<double>(r);
        ops += 6 * r;
      } else {
        spent += 1.0;
        ops += 1;
      }
      if (++jq == r) {
        ++jp;
        jq = jp + 1;
      }
      if (jp + 1 >= r) {  // sweep finished
        ++sweep;
        sweeps_used = sweep;
        const bool converged = !rotated_this_sweep;
        rotated_this_sweep = false;
        jp = 0;
        jq = 1;
        if (converged || sweep >= 30) {
          phase = 2;
          prepare_reconstruction(dst);
        }
      }
      return true;
    }
    case 2: {  // one reconstruction partial: out[oi] += coeff * src[oj]
      if (surv.empty()) {
        finish(dst, delta_accum, ops);
        return false;
      }
      const double w = coeff[oi] * evec(surv[oi], oj);
      auto dst_row = out.row(oi);
      auto src_row = dst.buf.row(oj);
      for (std::size_t c = 0; c < d; ++c) dst_row[c] += w * src_row[c];
      spent += static_cast<double>(d);
      ops += d;
      if (++oj == r) {
        oj = 0;
        ++oi;
      }
      if (oi == surv.size()) {
        phase = 3;
        pi = 1;
        pj = 0;
        if (surv.size() <= 1) {
          finish(dst, delta_accum, ops);
          return false;
        }
      }
      return true;
    }
    case 3: {  // one polish pair: re-orthogonalize out[pi] against out[pj]
      auto ri = out.row(pi);
      auto rj = out.row(pj);
      const double njj = frobenius_sq(rj);
      if (njj > 0.0) {
        const double prj = dot(ri, rj) / njj;
        for (std::size_t c = 0; c < d; ++c) ri[c] -= prj * rj[c];
      }
      spent += 3.0 * static_cast<double>(d);
      ops += 3 * d;
      if (++pj == pi) {
        pj = 0;
        ++pi;
      }
      if (pi >= surv.size()) {
        finish(dst, delta_accum, ops);
        return false;
      }
      return true;
    }
  }
  return false;
}

void FdSketch::ShrinkJob::prepare_reconstruction(const SubSketch& src) {
  (void)src;
  std::vector<double> lam(r);
  for (std::size_t i = 0; i < r; ++i) lam[i] = g(i, i);
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return lam[a] > lam[b];
  });
  delta = (r >= ell) ? std::max(lam[order[ell - 1]], 0.0) : 0.0;
  surv.clear();
  coeff.clear();
  for (std::size_t i = 0; i < r; ++i) {
    const double l = lam[order[i]];
    if (l <= delta || l <= 0.0) break;
    surv.push_back(order[i]);
    coeff.push_back(std::sqrt((l - delta) / l));
  }
  out = DenseMatrix(surv.size(), d);
  oi = 0;
  oj = 0;
  phase = 2;
}

void FdSketch::ShrinkJob::finish(SubSketch& dst, double& delta_accum,
                                 std::uint64_t& ops) {
  for (std::size_t i = 0; i < surv.size(); ++i) {
    auto row = out.row(i);
    sign_normalize(row);
    dst.buf.set_row(i, row);
  }
  for (std::size_t i = surv.size(); i < dst.filled; ++i) {
    dst.buf.zero_row(i);
  }
  ops += dst.filled * d;
  dst.filled = surv.size();
  dst.warm = surv.size();
  delta_accum += delta;
  active = false;
}

}  // namespace fdsk
