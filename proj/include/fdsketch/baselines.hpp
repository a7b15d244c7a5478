#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fdsketch/matrix.hpp"
#include "fdsketch/rng.hpp"

namespace fdsk {

enum class BaselineKind : std::uint8_t {
  kNaive = 3,
  kBruteForce = 4,
  kSampling = 5,
  kHashing = 6,
  kRandomProjection = 7,
};

const char* to_string(BaselineKind k);

/// Uniform streaming contract shared by the baseline sketchers and the FD
/// adapters: push rows, then take an ell x d sketch. finalize() is
/// non-destructive. Instances are single-writer.
class RowSketcher {
 public:
  virtual ~RowSketcher() = default;
  virtual void update(std::span<const double> row) = 0;
  virtual DenseMatrix finalize() const = 0;
  virtual std::size_t ell() const = 0;
  virtual std::size_t d() const = 0;
  virtual std::uint8_t kind_byte() const = 0;
  virtual double delta() const { return 0.0; }
  std::uint64_t last_update_ops() const { return last_ops_; }
  std::uint64_t total_ops() const { return total_ops_; }

 protected:
  std::uint64_t last_ops_ = 0;
  std::uint64_t total_ops_ = 0;
};

/// Does nothing; finalizes to an all-zeros sketch.
class NaiveSketcher final : public RowSketcher {
 public:
  NaiveSketcher(std::size_t ell, std::size_t d);
  void update(std::span<const double> row) override;
  DenseMatrix finalize() const override;
  std::size_t ell() const override { return ell_; }
  std::size_t d() const override { return d_; }
  std::uint8_t kind_byte() const override;

 private:
  std::size_t ell_, d_;
};

/// Accumulates A^T A exactly and finalizes to the optimal rank-ell sketch
/// sqrt(lambda_i) v_i^T. Theta(d^2) space; construction refuses dimensions
/// above the configured limit.
class BruteForceSketcher final : public RowSketcher {
 public:
  BruteForceSketcher(std::size_t ell, std::size_t d,
                     std::size_t d_limit = 2048);
  void update(std::span<const double> row) override;
  DenseMatrix finalize() const override;
  std::size_t ell() const override { return ell_; }
  std::size_t d() const override { return d_; }
  std::uint8_t kind_byte() const override;

 private:
  std::size_t ell_, d_;
  DenseMatrix gram_;  // d x d
};

/// ell independent weighted reservoir slots; slot j ends up holding row i
/// with probability ||a_i||^2 / ||A||_F^2 and is rescaled so that
/// E[B^T B] = A^T A.
class SamplingSketcher final : public RowSketcher {
 public:
  SamplingSketcher(std::size_t ell, std::size_t d, std::uint64_t seed);
  void update(std::span<const double> row) override;
  DenseMatrix finalize() const override;
  std::size_t ell() const override { return ell_; }
  std::size_t d() const override { return d_; }
  std::uint8_t kind_byte() const override;

 private:
  std::size_t ell_, d_;
  CounterRng rng_;
  std::size_t index_ = 0;
  double total_weight_ = 0.0;
  DenseMatrix slots_;
  std::vector<double> slot_weight_;
};

/// Count-sketch over rows: row i is added into bucket h(i) with sign s(i),
/// both derived from the counter generator, so no per-row state is kept.
class HashingSketcher final : public RowSketcher {
 public:
  HashingSketcher(std::size_t ell, std::size_t d, std::uint64_t seed);
  void update(std::span<const double> row) override;
  DenseMatrix finalize() const override;
  std::size_t ell() const override { return ell_; }
  std::size_t d() const override { return d_; }
  std::uint8_t kind_byte() const override;
  // Bucket/sign functions exposed for tests.
  std::size_t bucket_of(std::uint64_t i) const;
  double sign_of(std::uint64_t i) const;

 private:
  std::size_t ell_, d_;
  CounterRng rng_;
  std::uint64_t index_ = 0;
  DenseMatrix buckets_;
};

/// B = R A for a dense random sign matrix R with entries +-1/sqrt(ell),
/// maintained by a rank-one update per row (O(ell d) each).
class RandomProjectionSketcher final : public RowSketcher {
 public:
  RandomProjectionSketcher(std::size_t ell, std::size_t d,
                           std::uint64_t seed);
  void update(std::span<const double> row) override;
  DenseMatrix finalize() const override;
  std::size_t ell() const override { return ell_; }
  std::size_t d() const override { return d_; }
  std::uint8_t kind_byte() const override;

 private:
  std::size_t ell_, d_;
  CounterRng rng_;
  std::uint64_t index_ = 0;
  DenseMatrix acc_;
};

/// Algorithm ids accepted by the CLI and the bench harness.
/// fd | fd-fast | fd-bounded | sample | hash | project | brute | naive
std::unique_ptr<RowSketcher> make_sketcher(const std::string& algo,
                                           std::size_t ell, std::size_t d,
                                           std::uint64_t seed,
                                           std::size_t brute_limit = 2048);

bool is_fd_algo(const std::string& algo);
const std::vector<std::string>& known_algos();

}  // namespace fdsk
