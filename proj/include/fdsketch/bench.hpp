#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdsketch/matrix.hpp"
#include "fdsketch/metrics.hpp"
#include "fdsketch/synthetic.hpp"

namespace fdsk {

/// Experiment grid: every algorithm is run `trials` times for every sketch
/// size and the per-cell reports are followed by median-aggregate rows.
struct BenchConfig {
  std::optional<SyntheticSpec> synthetic;  // either this...
  std::string input_path;                  // ...or a matrix file
  bool csv_header = false;
  std::vector<std::string> algorithms;
  std::vector<std::size_t> ells;
  std::size_t k = 10;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  std::string output_path;  // empty: stdout
  std::size_t brute_limit = 2048;
  bool eval_errors = true;  // false: timing-only grid (covar/proj left 0)
};

/// Flat key=value text; '#' starts a comment, lists are comma separated.
/// Keys: input, csv_header, n, d, m, zeta (or eta), algos, ells, k, trials,
/// seed, output, brute_limit, eval.
BenchConfig parse_bench_config(const std::string& path);

struct BenchOutcome {
  std::size_t cells_done = 0;
  std::size_t cells_failed = 0;
  bool ok() const { return cells_failed == 0; }
};

/// Runs the grid. Rows are emitted in deterministic (algo, ell, trial)
/// order regardless of worker parallelism; failed cells become
/// "# error,..." marker lines and the run continues. `threads` = 0 picks
/// FD_THREADS or the hardware count.
BenchOutcome run_bench(const BenchConfig& config, std::ostream& out,
                       std::size_t threads = 0);

/// Streams `stream` through a fresh sketcher of kind `algo`, timing only
/// the update calls and finalize. Returns the report (errors filled only
/// when `eval_against` is non-null) plus the finalized sketch.
struct SketchRun {
  ErrorReport report;
  DenseMatrix sketch;
};
SketchRun timed_sketch(const std::string& algo, std::size_t ell,
                       std::uint64_t seed, RowStream& stream,
                       const DenseMatrix* eval_against, std::size_t k,
                       std::size_t brute_limit = 2048,
                       const double* tail_k_cache = nullptr);

std::size_t bench_thread_budget(std::size_t requested);

}  // namespace fdsk
