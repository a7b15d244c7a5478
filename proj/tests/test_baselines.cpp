#include <cmath>
#include <memory>

#include "doctest.h"
#include "fdsketch/baselines.hpp"
#include "fdsketch/metrics.hpp"
#include "oracle.hpp"

using fdsk::DenseMatrix;

namespace {

DenseMatrix sketch_all(fdsk::RowSketcher& s, const DenseMatrix& a) {
  for (std::size_t r = 0; r < a.rows(); ++r) s.update(a.row(r));
  return s.finalize();
}

}  // namespace

TEST_CASE("naive returns zeros and scores 1/d on the identity") {
  fdsk::NaiveSketcher s(4, 6);
  auto a = oracle::random_matrix(3, 10, 6);
  auto b = sketch_all(s, a);
  CHECK(fdsk::frobenius_sq(b) == 0.0);
  CHECK(b.rows() == 4);

  fdsk::NaiveSketcher s2(4, 8);
  CHECK(fdsk::covariance_error(DenseMatrix::identity(8), s2.finalize()) ==
        doctest::Approx(1.0 / 8.0).epsilon(1e-9));

  fdsk::NaiveSketcher s3(2, 3);
  CHECK(fdsk::frobenius_sq(s3.finalize()) == 0.0);  // empty stream
}

TEST_CASE("brute force recovers a diagonal spectrum") {
  fdsk::BruteForceSketcher s(2, 3);
  DenseMatrix a(3, 3);
  a(0, 0) = 3.0;
  a(1, 1) = 2.0;
  a(2, 2) = 1.0;
  auto b = sketch_all(s, a);
  CHECK(std::abs(b(0, 0)) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(b(1, 1)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(b(0, 1)) < 1e-9);
  CHECK(std::abs(b(1, 0)) < 1e-9);
}

TEST_CASE("brute force is exact when rank fits") {
  auto a = oracle::random_matrix(8, 20, 5);
  fdsk::BruteForceSketcher s(5, 5);
  auto b = sketch_all(s, a);
  auto ga = oracle::gram_ata(a);
  auto gb = oracle::gram_ata(b);
  const double scale = fdsk::frobenius_sq(a);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(ga(i, j) - gb(i, j)) < 1e-8 * scale);
}

TEST_CASE("brute force covariance error equals the (ell+1)-th eigenvalue") {
  auto a = oracle::random_matrix(50, 50, 8);
  fdsk::BruteForceSketcher s(3, 8);
  auto b = sketch_all(s, a);
  const double norm =
      oracle::spectral_norm_sym(oracle::covariance_diff(a, b));
  auto eig = oracle::dense_sym_eig(oracle::gram_ata(a));
  CHECK(norm == doctest::Approx(eig.values[3]).epsilon(1e-8));
}

TEST_CASE("brute force refuses oversized dimensions") {
  CHECK_THROWS_AS(fdsk::BruteForceSketcher(4, 100, 64),
                  std::invalid_argument);
}

TEST_CASE("sampling: constant stream fills every slot exactly") {
  const std::size_t d = 4, ell = 3, n = 20;
  DenseMatrix v(1, d);
  v(0, 0) = 1.0;
  v(0, 2) = -2.0;
  fdsk::SamplingSketcher s(ell, d, 99);
  for (std::size_t i = 0; i < n; ++i) s.update(v.row(0));
  auto b = s.finalize();
  const double scale = std::sqrt(static_cast<double>(n) / ell);
  for (std::size_t j = 0; j < ell; ++j) {
    CHECK(b(j, 0) == doctest::Approx(scale).epsilon(1e-12));
    CHECK(b(j, 2) == doctest::Approx(-2.0 * scale).epsilon(1e-12));
  }
  CHECK(fdsk::frobenius_sq(b) ==
        doctest::Approx(n * fdsk::frobenius_sq(v)).epsilon(1e-12));
}

TEST_CASE("sampling: single row gives B^T B = vv^T exactly") {
  DenseMatrix v(1, 3);
  v(0, 0) = 2.0;
  v(0, 1) = -1.0;
  fdsk::SamplingSketcher s(4, 3, 7);
  s.update(v.row(0));
  auto g = oracle::gram_ata(s.finalize());
  CHECK(g(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(g(0, 1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampling: all-zero stream finalizes to zeros") {
  fdsk::SamplingSketcher s(3, 4, 5);
  DenseMatrix z(1, 4);
  for (int i = 0; i < 10; ++i) s.update(z.row(0));
  CHECK(fdsk::frobenius_sq(s.finalize()) == 0.0);
}

TEST_CASE("hashing: single row squares the sign away") {
  DenseMatrix v(1, 3);
  v(0, 1) = 3.0;
  fdsk::HashingSketcher s(4, 3, 21);
  s.update(v.row(0));
  auto g = oracle::gram_ata(s.finalize());
  CHECK(g(1, 1) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(std::abs(g(0, 1)) < 1e-12);
}

TEST_CASE("hashing: a forced collision adds signed rows") {
  // find a seed whose first two indices collide
  std::uint64_t seed = 0;
  for (std::uint64_t cand = 1; cand < 4096; ++cand) {
    fdsk::HashingSketcher probe(4, 2, cand);
    if (probe.bucket_of(0) == probe.bucket_of(1)) {
      seed = cand;
      break;
    }
  }
  REQUIRE(seed != 0);
  fdsk::HashingSketcher s(4, 2, seed);
  DenseMatrix a = DenseMatrix::from_data(2, 2, {1.0, 2.0, 10.0, -3.0});
  s.update(a.row(0));
  s.update(a.row(1));
  const double s0 = s.sign_of(0);
  const double s1 = s.sign_of(1);
  auto b = s.finalize();
  auto bucket = b.row(s.bucket_of(0));
  CHECK(bucket[0] == doctest::Approx(s0 * 1.0 + s1 * 10.0).epsilon(1e-12));
  CHECK(bucket[1] == doctest::Approx(s0 * 2.0 + s1 * -3.0).epsilon(1e-12));
}

TEST_CASE("projection: single row reproduces vv^T exactly") {
  DenseMatrix v(1, 4);
  v(0, 0) = 1.5;
  v(0, 3) = -0.5;
  fdsk::RandomProjectionSketcher s(8, 4, 31);
  s.update(v.row(0));
  auto g = oracle::gram_ata(s.finalize());
  CHECK(g(0, 0) == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(g(0, 3) == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(g(3, 3) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("projection: zero rows contribute nothing") {
  fdsk::RandomProjectionSketcher s(4, 3, 12);
  DenseMatrix z(1, 3);
  s.update(z.row(0));
  s.update(z.row(0));
  CHECK(fdsk::frobenius_sq(s.finalize()) == 0.0);
}

TEST_CASE("all sketchers are seed deterministic") {
  auto a = oracle::random_matrix(17, 30, 5);
  for (const auto& algo : fdsk::known_algos()) {
    auto s1 = fdsk::make_sketcher(algo, 4, 5, 777);
    auto s2 = fdsk::make_sketcher(algo, 4, 5, 777);
    auto b1 = sketch_all(*s1, a);
    auto b2 = sketch_all(*s2, a);
    CHECK(b1 == b2);
  }
}

TEST_CASE("update cost scaling matches the stated orders") {
  auto run_ops = [](const std::string& algo, std::size_t ell, std::size_t d) {
    auto s = fdsk::make_sketcher(algo, ell, d, 3);
    std::vector<double> row(d, 1.0);
    s->update(row);
    return static_cast<double>(s->last_update_ops());
  };
  // O(d): sampling and hashing double with d, flat in ell
  CHECK(run_ops("sample", 4, 64) / run_ops("sample", 4, 32) ==
        doctest::Approx(2.0).epsilon(0.3));
  CHECK(run_ops("hash", 16, 64) / run_ops("hash", 4, 64) ==
        doctest::Approx(1.0).epsilon(0.01));
  // O(ell d): projection scales in both
  CHECK(run_ops("project", 4, 64) / run_ops("project", 4, 32) ==
        doctest::Approx(2.0).epsilon(0.01));
  CHECK(run_ops("project", 8, 64) / run_ops("project", 4, 64) ==
        doctest::Approx(2.0).epsilon(0.01));
  // O(d^2): brute force quadruples when d doubles
  CHECK(run_ops("brute", 4, 64) / run_ops("brute", 4, 32) ==
        doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("factory rejects unknown algorithms") {
  CHECK_THROWS_AS(fdsk::make_sketcher("nope", 4, 4, 0),
                  std::invalid_argument);
}
