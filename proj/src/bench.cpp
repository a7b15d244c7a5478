#include "fdsketch/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <cctype>
#include <thread>

#include "fdsketch/baselines.hpp"
#include "fdsketch/io.hpp"
#include "fdsketch/rng.hpp"

namespace fdsk {

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw IoError("bench config: bad boolean for " + key + ": '" + v + "'");
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchConfig parse_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open bench config");
  BenchConfig cfg;
  SyntheticSpec spec;
  bool synthetic_touched = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "input") {
        cfg.input_path = value;
      } else if (key == "csv_header") {
        cfg.csv_header = parse_bool(value, key);
      } else if (key == "n") {
        spec.n = std::stoull(value);
        synthetic_touched = true;
      } else if (key == "d") {
        spec.d = std::stoull(value);
        synthetic_touched = true;
      } else if (key == "m") {
        spec.m = std::stoull(value);
        synthetic_touched = true;
      } else if (key == "zeta" || key == "eta") {
        spec.zeta = std::stod(value);
        synthetic_touched = true;
      } else if (key == "algos" || key == "algorithms") {
        cfg.algorithms = split_list(value);
      } else if (key == "ells" || key == "ell") {
        for (const auto& e : split_list(value)) {
          cfg.ells.push_back(std::stoull(e));
        }
      } else if (key == "k") {
        cfg.k = std::stoull(value);
      } else if (key == "trials") {
        cfg.trials = std::stoull(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "output" || key == "out") {
        cfg.output_path = value;
      } else if (key == "brute_limit") {
        cfg.brute_limit = std::stoull(value);
      } else if (key == "eval") {
        cfg.eval_errors = parse_bool(value, key);
      } else {
        throw IoError("unknown key '" + key + "'");
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (synthetic_touched && !cfg.input_path.empty()) {
    throw IoError(path + ": give either input= or synthetic n/d/m/zeta keys");
  }
  if (synthetic_touched || cfg.input_path.empty()) {
    spec.seed = cfg.seed;
    cfg.synthetic = spec;
  }
  if (cfg.algorithms.empty()) {
    throw IoError(path + ": no algorithms configured");
  }
  if (cfg.ells.empty()) {
    throw IoError(path + ": no sketch sizes (ells) configured");
  }
  if (cfg.trials < 1) {
    throw IoError(path + ": trials must be >= 1");
  }
  return cfg;
}

std::size_t bench_thread_budget(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FD_THREADS")) {
    const auto v = std::strtoull(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

SketchRun timed_sketch(const std::string& algo, std::size_t ell,
                       std::uint64_t seed, RowStream& stream,
                       const DenseMatrix* eval_against, std::size_t k,
                       std::size_t brute_limit, const double* tail_k_cache) {
  auto sketcher = make_sketcher(algo, ell, stream.cols(), seed, brute_limit);
  std::vector<double> row(stream.cols());
  double seconds = 0.0;
  while (stream.next(row)) {
    const auto t0 = Clock::now();
    sketcher->update(row);
    seconds += std::chrono::duration<double>(Clock::now() - t0).count();
  }
  const auto t0 = Clock::now();
  DenseMatrix b = sketcher->finalize();
  seconds += std::chrono::duration<double>(Clock::now() - t0).count();

  SketchRun run;
  run.report.algo = algo;
  run.report.ell = ell;
  run.report.k = k;
  run.report.seed = seed;
  run.report.sketch_seconds = seconds;
  run.report.covar_bound = fd_bound_covar(ell);
  run.report.proj_bound = (k < ell) ? fd_bound_proj(ell, k) : 0.0;
  if (eval_against != nullptr) {
    run.report.covar_err = covariance_error(*eval_against, b);
    if (k >= 1 && k < eval_against->cols() && tail_k_cache != nullptr &&
        *tail_k_cache > 0.0) {
      run.report.proj_err =
          projection_residual(*eval_against, b, k) / *tail_k_cache;
    }
  }
  run.sketch = std::move(b);
  return run;
}

BenchOutcome run_bench(const BenchConfig& config, std::ostream& out,
                       std::size_t threads) {
  struct Cell {
    std::size_t algo_idx, ell, trial;
    std::uint64_t seed;
    bool ok = false;
    ErrorReport report;
    std::string error;
  };

  std::vector<Cell> cells;
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    for (std::size_t ell : config.ells) {
      for (std::size_t t = 0; t < config.trials; ++t) {
        Cell c;
        c.algo_idx = ai;
        c.ell = ell;
        c.trial = t;
        c.seed = mix_seed(mix_seed(config.seed, ai + 1),
                          mix_seed(ell, t + 0x51ULL));
        cells.push_back(c);
      }
    }
  }

  // Offline evaluation holds the input matrix (metrics need a second pass
  // over A); timing-only grids re-stream it per cell instead.
  DenseMatrix a;
  double tail_k = 0.0;
  bool proj_ok = false;
  if (config.eval_errors) {
    if (config.synthetic) {
      auto stream = gen_synthetic(*config.synthetic);
      a = materialize(*stream);
    } else {
      a = read_matrix(config.input_path, std::nullopt, config.csv_header);
    }
    if (config.k >= 1 && config.k < a.cols()) {
      const double total = frobenius_sq(a);
      tail_k = tail_energy(a, config.k);
      proj_ok = tail_k > 1e-12 * total;
      if (!proj_ok) {
        out << "# warning: ||A - A_k||_F^2 degenerate at k=" << config.k
            << "; proj_err column left zero\n";
      }
    }
  }

  auto run_cell = [&](Cell& cell) {
    try {
      const std::string& algo = config.algorithms[cell.algo_idx];
      std::unique_ptr<RowStream> stream;
      if (config.eval_errors) {
        stream = std::make_unique<MatrixRowStream>(a);
      } else if (config.synthetic) {
        stream = gen_synthetic(*config.synthetic);
      } else {
        stream = open_matrix(config.input_path, std::nullopt,
                             config.csv_header);
      }
      auto run = timed_sketch(algo, cell.ell, cell.seed, *stream,
                              config.eval_errors ? &a : nullptr, config.k,
                              config.brute_limit,
                              proj_ok ? &tail_k : nullptr);
      cell.report = std::move(run.report);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.ok = false;
    }
  };

  const std::size_t workers =
      std::min(bench_thread_budget(threads), std::max<std::size_t>(cells.size(), 1));
  if (workers <= 1) {
    for (auto& cell : cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(cells[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  BenchOutcome outcome;
  out << ErrorReport::csv_header() << '\n';
  std::size_t idx = 0;
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    for (std::size_t ell_i = 0; ell_i < config.ells.size(); ++ell_i) {
      std::vector<double> covar, proj, secs;
      for (std::size_t t = 0; t < config.trials; ++t, ++idx) {
        const Cell& cell = cells[idx];
        if (cell.ok) {
          out << cell.report.csv_row() << '\n';
          covar.push_back(cell.report.covar_err);
          proj.push_back(cell.report.proj_err);
          secs.push_back(cell.report.sketch_seconds);
          ++outcome.cells_done;
        } else {
          out << "# error,algo=" << config.algorithms[ai]
              << ",ell=" << cell.ell << ",trial=" << cell.trial << ","
              << cell.error << '\n';
          ++outcome.cells_failed;
        }
      }
      if (!covar.empty()) {
        ErrorReport med;
        med.algo = config.algorithms[ai] + ":median";
        med.ell = config.ells[ell_i];
        med.k = config.k;
        med.seed = config.seed;
        med.covar_err = median_of(covar);
        med.proj_err = median_of(proj);
        med.covar_bound = fd_bound_covar(config.ells[ell_i]);
        med.proj_bound = (config.k < config.ells[ell_i])
                             ? fd_bound_proj(config.ells[ell_i], config.k)
                             : 0.0;
        med.sketch_seconds = median_of(secs);
        out << med.csv_row() << '\n';
      }
    }
  }
  return outcome;
}

}  // namespace fdsk
