// Copyright 2026 The enttrade developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ENTTRADE_HAAR_HPP
#define ENTTRADE_HAAR_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "enttrade/tensor.hpp"

namespace enttrade {

//============================================================================
// Seeded, counter-based randomness
//============================================================================

/// Identifies a reproducible stream of samples.  Identical (seed, stream)
/// pairs reproduce identical sequences; distinct stream indices give
/// statistically independent sequences from the same seed.
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Generator keyed purely by (seed, stream, sample index): sample i is
/// reproducible no matter which worker evaluates it or in what order.
class SampleRng {
 public:
  SampleRng(const SeededStream& s, std::uint64_t sample_index) {
    std::uint64_t k = s.seed;
    k = mix64(k + 0x9E3779B97F4A7C15ULL * (s.stream + 1));
    k = mix64(k + 0x9E3779B97F4A7C15ULL * (sample_index + 1));
    state_ = k;
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform double in (0, 1]; never 0, safe under log().
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace detail

//============================================================================
// Haar sampling
//============================================================================

/// Haar-distributed d x d unitary: complex Ginibre matrix, Householder QR,
/// then the Q columns are rephased so the R diagonal is positive real,
/// which removes the phase ambiguity and yields exact Haar measure on U(d).
///
/// Samples are drawn from U(d) rather than SU(d).  Every averaged quantity
/// in this library depends on U only through |U>><<U| or U x U*, both
/// invariant under a global phase, so U(d) and SU(d) averages coincide.
inline Matrix sample_unitary(Index d, const SeededStream& stream,
                             std::uint64_t sample_index = 0) {
  if (d < 2) throw std::invalid_argument("sample_unitary: d must be >= 2");
  detail::SampleRng rng(stream, sample_index);
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      g(i, j) = Complex(rng.normal(), rng.normal()) * M_SQRT1_2;
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) {
    const Complex rii = r(i, i);
    const double mag = std::abs(rii);
    q.col(i) *= (mag > 0.0 ? rii / mag : Complex(1.0, 0.0));
  }
  return q;
}

//============================================================================
// Monte-Carlo averaging with a fixed pairwise summation tree
//============================================================================

namespace detail {

/// Fixed block length of the summation tree.  Samples are summed inside
/// 1024-sample blocks by a binary-counter pairwise tree and block results
/// are combined in block order, so the tree depends on n alone and the
/// result is bit-identical for any worker count.
inline constexpr std::size_t kMcBlock = 1024;

template <typename T, typename Eval>
T pairwise_sum(std::size_t count, Eval&& eval) {
  // Binary counter: slot k holds a partial sum of 2^k leaves.
  std::vector<T> slots;
  std::vector<bool> used;
  for (std::size_t i = 0; i < count; ++i) {
    T value = eval(i);
    std::size_t level = 0;
    while (level < used.size() && used[level]) {
      value = slots[level] + value;
      used[level] = false;
      ++level;
    }
    if (level == used.size()) {
      slots.push_back(value);
      used.push_back(true);
    } else {
      slots[level] = value;
      used[level] = true;
    }
  }
  bool have = false;
  T total{};
  for (std::size_t level = 0; level < used.size(); ++level) {
    if (!used[level]) continue;
    total = have ? T(slots[level] + total) : slots[level];
    have = true;
  }
  if (!have) throw std::invalid_argument("pairwise_sum: empty sum");
  return total;
}

template <typename V>
struct SampleSums {
  V sum;       // sum of sample values
  V sq;        // entrywise sum of |value|^2 (real parts carried in V)
  SampleSums operator+(const SampleSums& o) const {
    return {sum + o.sum, sq + o.sq};
  }
};

/// Core of every Monte-Carlo average.  `sample(i)` must depend only on i
/// (plus captured seeds).  Returns the total SampleSums over n samples.
template <typename V, typename Sample>
SampleSums<V> mc_sum(std::size_t n, Sample&& sample, int jobs) {
  const std::size_t nblocks = (n + kMcBlock - 1) / kMcBlock;
  auto block_sums = [&](std::size_t b) -> SampleSums<V> {
    const std::size_t lo = b * kMcBlock;
    const std::size_t hi = std::min(n, lo + kMcBlock);
    return pairwise_sum<SampleSums<V>>(hi - lo, [&](std::size_t k) {
      V v = sample(lo + k);
      V sq = v.cwiseAbs2().template cast<typename V::Scalar>();
      return SampleSums<V>{std::move(v), std::move(sq)};
    });
  };
  if (jobs <= 1 || nblocks == 1)
    return pairwise_sum<SampleSums<V>>(nblocks, block_sums);

  std::vector<SampleSums<V>> results(nblocks);
  const int workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(jobs), nblocks));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t b = static_cast<std::size_t>(w); b < nblocks;
           b += static_cast<std::size_t>(workers))
        results[b] = block_sums(b);
    });
  }
  for (auto& t : pool) t.join();
  return pairwise_sum<SampleSums<V>>(nblocks,
                                     [&](std::size_t b) { return results[b]; });
}

}  // namespace detail

/// Sample mean of a matrix-valued integrand with per-entry standard errors.
struct McMatrixEstimate {
  Matrix mean;
  RealMatrix stderr_entries;  // standard error of the mean, per entry
  double stderr_max = 0.0;    // max entrywise standard error
  std::size_t n_samples = 0;
};

/// Monte-Carlo average of f(U) over Haar-distributed unitaries U of size d.
/// Deterministic in (stream, n); `jobs` only distributes block evaluation.
template <typename F>
McMatrixEstimate mc_average(F&& f, Index d, std::size_t n,
                            const SeededStream& stream, int jobs = 1) {
  if (n < 2) throw std::invalid_argument("mc_average: need n >= 2");
  auto sums = detail::mc_sum<Matrix>(
      n,
      [&](std::size_t i) -> Matrix {
        return f(sample_unitary(d, stream, i));
      },
      jobs);
  McMatrixEstimate est;
  const double dn = static_cast<double>(n);
  est.mean = sums.sum / dn;
  RealMatrix var =
      (sums.sq.real() / dn - est.mean.cwiseAbs2()) * (dn / (dn - 1.0));
  var = var.cwiseMax(0.0);  // clamp roundoff negatives of constant integrands
  est.stderr_entries = (var / dn).cwiseSqrt();
  est.stderr_max =
      est.stderr_entries.size() == 0 ? 0.0 : est.stderr_entries.maxCoeff();
  est.n_samples = n;
  return est;
}

}  // namespace enttrade

#endif  // ENTTRADE_HAAR_HPP
