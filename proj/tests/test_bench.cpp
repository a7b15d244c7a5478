#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fdsketch/bench.hpp"
#include "fdsketch/io.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& body) {
  const auto dir = fs::temp_directory_path() / "fdsk_bench_test";
  fs::create_directories(dir);
  const auto p = (dir / "bench.cfg").string();
  std::ofstream f(p);
  f << body;
  return p;
}

}  // namespace

TEST_CASE("bench config parsing") {
  const auto p = write_config(
      "# comment\n"
      "n = 64\nd = 8\nm = 2\nzeta = 10\n"
      "algos = fd-fast, naive\n"
      "ells = 3, 5\n"
      "k = 2\ntrials = 3\nseed = 12\n");
  auto cfg = fdsk::parse_bench_config(p);
  REQUIRE(cfg.synthetic.has_value());
  CHECK(cfg.synthetic->n == 64);
  CHECK(cfg.synthetic->d == 8);
  CHECK(cfg.algorithms.size() == 2);
  CHECK(cfg.ells == std::vector<std::size_t>{3, 5});
  CHECK(cfg.trials == 3);
  CHECK(cfg.seed == 12);

  CHECK_THROWS_AS(
      fdsk::parse_bench_config(write_config("nonsense = 1\nalgos=fd\nells=2\n")),
      fdsk::IoError);
  CHECK_THROWS_AS(fdsk::parse_bench_config(write_config("algos = fd\n")),
                  fdsk::IoError);
}

TEST_CASE("single-cell bench produces a csv grid") {
  const auto p = write_config(
      "n = 80\nd = 10\nm = 2\nzeta = 10\n"
      "algos = fd-fast\nells = 4\nk = 2\ntrials = 1\nseed = 5\n");
  auto cfg = fdsk::parse_bench_config(p);
  std::ostringstream out;
  auto outcome = fdsk::run_bench(cfg, out, 1);
  CHECK(outcome.ok());
  CHECK(outcome.cells_done == 1);
  std::istringstream lines(out.str());
  std::string header, row, median;
  std::getline(lines, header);
  std::getline(lines, row);
  std::getline(lines, median);
  CHECK(header == fdsk::ErrorReport::csv_header());
  CHECK(row.rfind("fd-fast,4,2,", 0) == 0);
  CHECK(median.rfind("fd-fast:median,4,2,5,", 0) == 0);
}

TEST_CASE("bench output is deterministic apart from timings") {
  const auto p = write_config(
      "n = 60\nd = 6\nm = 2\nzeta = 5\n"
      "algos = sample, hash\nells = 3\nk = 2\ntrials = 3\nseed = 9\n");
  auto cfg = fdsk::parse_bench_config(p);
  auto strip_seconds = [](const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
      const auto cut = line.rfind(',');
      out << line.substr(0, cut) << '\n';
    }
    return out.str();
  };
  std::ostringstream o1, o2;
  CHECK(fdsk::run_bench(cfg, o1, 2).ok());
  CHECK(fdsk::run_bench(cfg, o2, 1).ok());
  CHECK(strip_seconds(o1.str()) == strip_seconds(o2.str()));
}

TEST_CASE("bench records failing cells and continues") {
  const auto p = write_config(
      "n = 40\nd = 12\nm = 2\nzeta = 5\n"
      "algos = brute, naive\nells = 3\nk = 2\ntrials = 1\nseed = 2\n"
      "brute_limit = 4\n");  // d=12 exceeds the brute-force limit
  auto cfg = fdsk::parse_bench_config(p);
  std::ostringstream out;
  auto outcome = fdsk::run_bench(cfg, out, 1);
  CHECK(!outcome.ok());
  CHECK(outcome.cells_failed == 1);
  CHECK(outcome.cells_done == 1);
  CHECK(out.str().find("# error,algo=brute") != std::string::npos);
}
