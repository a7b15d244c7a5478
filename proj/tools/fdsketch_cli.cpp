// fdsketch command line front end: generate inputs, sketch streams, merge
// sketches, evaluate errors, and run benchmark grids.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "CLI11.hpp"
#include "fdsketch/baselines.hpp"
#include "fdsketch/bench.hpp"
#include "fdsketch/fd.hpp"
#include "fdsketch/io.hpp"
#include "fdsketch/metrics.hpp"
#include "fdsketch/synthetic.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_writable(const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw fdsk::IoError(path + " exists; pass --force to overwrite");
  }
}

int cmd_gen(std::size_t n, std::size_t d, std::size_t m, double zeta,
            std::uint64_t seed, const std::string& out,
            const std::string& format, bool force) {
  require_writable(out, force);
  fdsk::SyntheticSpec spec{n, d, m, zeta, seed};
  auto stream = fdsk::gen_synthetic(spec);
  const auto fmt = (format == "csv") ? fdsk::MatrixFormat::kCsv
                                     : fdsk::MatrixFormat::kFdmx;
  const auto t0 = Clock::now();
  fdsk::MatrixWriter writer(out, fmt, d, n);
  std::vector<double> row(d);
  while (stream->next(row)) writer.write_row(row);
  writer.close();
  std::cout << "wrote " << n << "x" << d << " matrix to " << out << " in "
            << seconds_since(t0) << " s\n";
  return 0;
}

int cmd_sketch(const std::string& algo, std::size_t ell, std::uint64_t seed,
               const std::string& in, const std::string& out,
               bool csv_header, std::size_t brute_limit, bool force) {
  require_writable(out, force);
  const auto io_t0 = Clock::now();
  auto stream = fdsk::open_matrix(in, std::nullopt, csv_header);
  auto sketcher =
      fdsk::make_sketcher(algo, ell, stream->cols(), seed, brute_limit);

  std::vector<double> row(stream->cols());
  std::size_t rows = 0;
  double frob_sq = 0.0;
  double sketch_seconds = 0.0;
  while (stream->next(row)) {
    frob_sq += fdsk::frobenius_sq(std::span<const double>(row));
    const auto t0 = Clock::now();
    sketcher->update(row);
    sketch_seconds += seconds_since(t0);
    ++rows;
  }
  const auto fin_t0 = Clock::now();
  fdsk::DenseMatrix b = sketcher->finalize();
  sketch_seconds += seconds_since(fin_t0);

  fdsk::SketchFile file;
  file.ell = ell;
  file.d = b.cols();
  file.variant = sketcher->kind_byte();
  file.delta_total = sketcher->delta();
  file.rows_seen = rows;
  file.input_frob_sq = frob_sq;
  file.rows = std::move(b);
  fdsk::save_sketch_file(out, file);

  const double total = seconds_since(io_t0);
  std::cout << "algo=" << algo << " ell=" << ell << " rows=" << rows
            << " sketch_seconds=" << sketch_seconds << " rows_per_s="
            << (sketch_seconds > 0 ? rows / sketch_seconds : 0.0)
            << " io_seconds=" << (total - sketch_seconds);
  if (fdsk::is_fd_algo(algo)) std::cout << " delta=" << sketcher->delta();
  std::cout << "\n";
  return 0;
}

int cmd_merge(const std::vector<std::string>& inputs, const std::string& out,
              bool force) {
  require_writable(out, force);
  if (inputs.size() < 2) {
    throw fdsk::IoError("merge needs at least two sketch files");
  }
  fdsk::FdSketch acc = fdsk::load_fd_sketch(inputs[0]);
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    acc = fdsk::fd_merge(acc, fdsk::load_fd_sketch(inputs[i]));
  }
  fdsk::save_sketch(out, acc);
  std::cout << "merged " << inputs.size() << " sketches (ell=" << acc.ell()
            << ", d=" << acc.d() << ", delta=" << acc.finalize().delta
            << ") into " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& matrix_path,
             const std::vector<std::string>& sketch_paths, std::size_t k,
             bool csv_header, const std::string& out_path) {
  const auto a = fdsk::read_matrix(matrix_path, std::nullopt, csv_header);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw fdsk::IoError(out_path + ": cannot open for writing");
    out = &file;
  }
  double tail = 0.0;
  bool proj_ok = false;
  if (k >= 1 && k < a.cols()) {
    tail = fdsk::tail_energy(a, k);
    proj_ok = tail > 1e-12 * fdsk::frobenius_sq(a);
  }
  *out << fdsk::ErrorReport::csv_header() << '\n';
  for (const auto& path : sketch_paths) {
    auto sf = fdsk::load_sketch_file(path);
    fdsk::ErrorReport r;
    r.algo = sf.is_fd_variant()
                 ? std::string("fd-") + fdsk::to_string(
                       static_cast<fdsk::FdVariant>(sf.variant))
                 : fdsk::to_string(static_cast<fdsk::BaselineKind>(sf.variant));
    r.ell = sf.ell;
    r.k = k;
    r.seed = 0;
    r.covar_err = fdsk::covariance_error(a, sf.rows);
    if (proj_ok) {
      r.proj_err = fdsk::projection_residual(a, sf.rows, k) / tail;
    }
    r.covar_bound = fdsk::fd_bound_covar(sf.ell);
    r.proj_bound = (k < sf.ell) ? fdsk::fd_bound_proj(sf.ell, k) : 0.0;
    *out << r.csv_row() << '\n';
  }
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_override,
              std::size_t threads) {
  auto cfg = fdsk::parse_bench_config(config_path);
  if (!out_override.empty()) cfg.output_path = out_override;
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!cfg.output_path.empty()) {
    file.open(cfg.output_path, std::ios::trunc);
    if (!file) {
      throw fdsk::IoError(cfg.output_path + ": cannot open for writing");
    }
    out = &file;
  }
  const auto outcome = fdsk::run_bench(cfg, *out, threads);
  std::cerr << "bench: " << outcome.cells_done << " cells ok, "
            << outcome.cells_failed << " failed\n";
  return outcome.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fdsketch: streaming matrix sketching and benchmarks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic matrix file");
  std::size_t g_n = 10000, g_d = 1000, g_m = 10;
  double g_zeta = 10.0;
  std::uint64_t g_seed = 0;
  std::string g_out, g_format = "fdmx";
  bool g_force = false;
  gen->add_option("--n", g_n, "rows");
  gen->add_option("--d", g_d, "columns");
  gen->add_option("--m", g_m, "signal dimension");
  gen->add_option("--zeta,--eta", g_zeta, "noise attenuation");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--out", g_out, "output path")->required();
  gen->add_option("--format", g_format, "fdmx|csv")
      ->check(CLI::IsMember({"fdmx", "csv"}));
  gen->add_flag("--force", g_force, "overwrite an existing file");

  // sketch
  auto* sk = app.add_subcommand("sketch", "sketch a matrix file");
  std::string s_algo, s_in, s_out;
  std::size_t s_ell = 0, s_brute_limit = 2048;
  std::uint64_t s_seed = 0;
  bool s_header = false, s_force = false;
  sk->add_option("--algo", s_algo, "fd|fd-fast|fd-bounded|sample|hash|project|brute|naive")
      ->required()
      ->check(CLI::IsMember(fdsk::known_algos()));
  sk->add_option("--ell", s_ell, "sketch rows")->required();
  sk->add_option("--seed", s_seed, "sketcher seed");
  sk->add_option("--in", s_in, "input matrix (fdmx or csv)")->required();
  sk->add_option("--out", s_out, "output sketch file")->required();
  sk->add_option("--brute-limit", s_brute_limit, "brute-force d limit");
  sk->add_flag("--csv-header", s_header, "skip one csv header line");
  sk->add_flag("--force", s_force, "overwrite an existing file");

  // merge
  auto* mg = app.add_subcommand("merge", "merge FD sketch files");
  std::vector<std::string> m_inputs;
  std::string m_out;
  bool m_force = false;
  mg->add_option("inputs", m_inputs, "two or more .fdsk files")
      ->expected(-2);
  mg->add_option("--out", m_out, "output sketch file")->required();
  mg->add_flag("--force", m_force, "overwrite an existing file");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate sketch files against a matrix");
  std::string e_matrix, e_out;
  std::vector<std::string> e_sketches;
  std::size_t e_k = 10;
  bool e_header = false;
  ev->add_option("--matrix", e_matrix, "input matrix")->required();
  ev->add_option("--sketch", e_sketches, "sketch file (repeatable)")
      ->required();
  ev->add_option("--k", e_k, "projection rank");
  ev->add_option("--out", e_out, "csv output (default stdout)");
  ev->add_flag("--csv-header", e_header, "skip one csv header line");

  // bench
  auto* bn = app.add_subcommand("bench", "run an experiment grid from a config");
  std::string b_config, b_out;
  std::size_t b_threads = 0;
  bn->add_option("--config", b_config, "bench config file")->required();
  bn->add_option("--out", b_out, "override the config output path");
  bn->add_option("--threads", b_threads,
                 "worker threads (default: FD_THREADS or cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen(g_n, g_d, g_m, g_zeta, g_seed, g_out, g_format, g_force);
    }
    if (sk->parsed()) {
      return cmd_sketch(s_algo, s_ell, s_seed, s_in, s_out, s_header,
                        s_brute_limit, s_force);
    }
    if (mg->parsed()) return cmd_merge(m_inputs, m_out, m_force);
    if (ev->parsed()) return cmd_eval(e_matrix, e_sketches, e_k, e_header, e_out);
    if (bn->parsed()) return cmd_bench(b_config, b_out, b_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
