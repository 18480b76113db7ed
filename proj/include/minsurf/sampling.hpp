#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace minsurf {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used only to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sample `index` of stream `stream`; independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

inline Rng sample_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return Rng(derive_seed(seed, stream, index));
}

double uniform(Rng& rng, double lo, double hi);
double log_uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);

/// Uniform point in the closed ball of the given radius, in dimension rows*cols.
Eigen::MatrixXd random_in_ball(Eigen::Index rows, Eigen::Index cols, double radius, Rng& rng);
Eigen::VectorXd random_unit_vector(Eigen::Index n, Rng& rng);
/// Product of n Householder reflections with Gaussian directions.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng);
Eigen::Matrix2d rotation(double theta);

/// Fixed block size for parallel scans. Results are reduced in block order, so the
/// outcome does not depend on the number of threads.
inline constexpr std::size_t kScanBlock = 1024;

/// Evaluates `fn(begin, end)` on consecutive blocks of [0, count) using up to `threads`
/// workers and folds the per-block partial results left to right with `merge`.
template <class Partial, class Fn, class Merge>
Partial parallel_blocks(std::size_t count, int threads, Partial init, Fn fn, Merge merge) {
  const std::size_t nblocks = (count + kScanBlock - 1) / kScanBlock;
  std::vector<Partial> partials(nblocks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < nblocks; b = next++) {
      const std::size_t begin = b * kScanBlock;
      partials[b] = fn(begin, std::min(count, begin + kScanBlock));
    }
  };
  const std::size_t nthreads =
      std::min<std::size_t>(std::max(1, threads), std::max<std::size_t>(1, nblocks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& p : partials) merge(init, p);
  return init;
}

}  // namespace minsurf
