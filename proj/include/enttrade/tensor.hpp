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

#ifndef ENTTRADE_TENSOR_HPP
#define ENTTRADE_TENSOR_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace enttrade {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Tolerance for deciding Hermiticity, POVM completeness and positivity.
inline constexpr double kHermitianTol = 1e-10;
/// Relative residual target for eigensolves: ||Mv - lambda v|| <= tol * scale.
inline constexpr double kEigResidualTol = 1e-10;
/// Dense Hermitian eigensolves are used up to this dimension; past it only
/// the dominant eigenpair is computed, by power iteration.
inline constexpr Index kDenseEigMaxDim = 1024;

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

//============================================================================
// Subsystem bookkeeping
//============================================================================

/// Ordered subsystem dimensions of a tensor-product space.  Subsystem 1 is
/// the most significant index: a space with dims {d1,...,dk} is indexed by
/// i = ((i1*d2 + i2)*d3 + ...)*dk + ik, matching the convention that the row
/// index of vectorize() is the first tensor factor.
struct SubsystemSpec {
  std::vector<Index> dims;

  SubsystemSpec() = default;
  explicit SubsystemSpec(std::vector<Index> d) : dims(std::move(d)) {}

  /// Uniform spec: k subsystems of dimension d each.
  static SubsystemSpec uniform(Index d, int k) {
    return SubsystemSpec(std::vector<Index>(static_cast<std::size_t>(k), d));
  }

  int count() const { return static_cast<int>(dims.size()); }

  Index total_dim() const {
    return std::accumulate(dims.begin(), dims.end(), Index{1},
                           std::multiplies<Index>());
  }

  /// Stride of subsystem `k` (0-based): product of dimensions to its right.
  Index stride(int k) const {
    Index s = 1;
    for (std::size_t j = static_cast<std::size_t>(k) + 1; j < dims.size(); ++j)
      s *= dims[j];
    return s;
  }

  void require_matches(const Matrix& m) const {
    if (m.rows() != m.cols())
      throw std::invalid_argument("SubsystemSpec: matrix must be square");
    if (m.rows() != total_dim())
      throw std::invalid_argument(
          "SubsystemSpec: product of dims (" + std::to_string(total_dim()) +
          ") does not match matrix dimension (" + std::to_string(m.rows()) + ")");
  }
};

//============================================================================
// Kronecker product and the operator-vector isomorphism
//============================================================================

/// Kronecker product; the left factor is the most significant subsystem.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// |A>> for square A: component m*d + n equals A(m, n), i.e. the row index
/// is the first tensor factor.  Satisfies (A x B)|C>> = |A C B^T>>.
inline Vector vectorize(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("vectorize: matrix must be square");
  const Index d = a.rows();
  Vector v(d * d);
  for (Index m = 0; m < d; ++m)
    for (Index n = 0; n < d; ++n) v(m * d + n) = a(m, n);
  return v;
}

/// Inverse of vectorize: reshapes a length-d^2 vector into a d x d matrix.
inline Matrix devectorize(const Vector& v, Index d) {
  if (v.size() != d * d)
    throw std::invalid_argument("devectorize: vector length != d*d");
  Matrix a(d, d);
  for (Index m = 0; m < d; ++m)
    for (Index n = 0; n < d; ++n) a(m, n) = v(m * d + n);
  return a;
}

/// Hilbert-Schmidt inner product <<A|B>> = Tr[A^dag B].
inline Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hs_inner: dimension mismatch");
  return (a.conjugate().cwiseProduct(b)).sum();
}

//============================================================================
// Partial trace
//============================================================================

namespace detail {

/// Splits the labels of `spec` into kept/traced and returns the linear
/// offsets of every kept and every traced multi-index.
struct TraceOffsets {
  std::vector<Index> kept;
  std::vector<Index> dropped;
};

inline TraceOffsets trace_offsets(const SubsystemSpec& spec,
                                  const std::vector<int>& traced) {
  const int k = spec.count();
  if (traced.empty())
    throw std::invalid_argument("partial_trace: traced subset is empty");
  std::vector<bool> is_traced(static_cast<std::size_t>(k), false);
  for (int label : traced) {
    if (label < 1 || label > k)
      throw std::invalid_argument("partial_trace: label out of range");
    if (is_traced[static_cast<std::size_t>(label - 1)])
      throw std::invalid_argument("partial_trace: duplicate label");
    is_traced[static_cast<std::size_t>(label - 1)] = true;
  }
  std::vector<int> kept_subs;
  std::vector<int> drop_subs;
  for (int i = 0; i < k; ++i)
    (is_traced[static_cast<std::size_t>(i)] ? drop_subs : kept_subs)
        .push_back(i);
  auto offsets = [&](const std::vector<int>& subs) {
    Index n = 1;
    for (int s : subs) n *= spec.dims[static_cast<std::size_t>(s)];
    std::vector<Index> off(static_cast<std::size_t>(n), 0);
    Index block = 1;
    for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
      const Index ds = spec.dims[static_cast<std::size_t>(*it)];
      const Index st = spec.stride(*it);
      for (Index idx = 0; idx < n; ++idx)
        off[static_cast<std::size_t>(idx)] += ((idx / block) % ds) * st;
      block *= ds;
    }
    return off;
  };
  return {offsets(kept_subs), offsets(drop_subs)};
}

}  // namespace detail

/// Partial trace over the subsystems in `traced` (1-based labels into
/// `spec`).  The reduced operator keeps the remaining subsystems in label
/// order.  Computed by index arithmetic; no permutation matrices are built.
inline Matrix partial_trace(const Matrix& m, const SubsystemSpec& spec,
                            const std::vector<int>& traced) {
  spec.require_matches(m);
  const auto off = detail::trace_offsets(spec, traced);
  const Index dk = static_cast<Index>(off.kept.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r)
    for (Index c = 0; c < dk; ++c) {
      Complex s = 0.0;
      for (Index t : off.dropped)
        s += m(off.kept[static_cast<std::size_t>(r)] + t,
               off.kept[static_cast<std::size_t>(c)] + t);
      out(r, c) = s;
    }
  return out;
}

/// Partial trace of the rank-one operator |psi><psi| without forming it;
/// O(dim_kept^2 * dim_traced) time on the vector alone.
inline Matrix partial_trace_rank_one(const Vector& psi,
                                     const SubsystemSpec& spec,
                                     const std::vector<int>& traced) {
  if (psi.size() != spec.total_dim())
    throw std::invalid_argument("partial_trace_rank_one: wrong vector size");
  const auto off = detail::trace_offsets(spec, traced);
  const Index dk = static_cast<Index>(off.kept.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r)
    for (Index c = 0; c < dk; ++c) {
      Complex s = 0.0;
      for (Index t : off.dropped)
        s += psi(off.kept[static_cast<std::size_t>(r)] + t) *
             std::conj(psi(off.kept[static_cast<std::size_t>(c)] + t));
      out(r, c) = s;
    }
  return out;
}

/// Applies a unitary (or any square matrix) to one subsystem of a
/// tensor-product vector: v -> (I x ... x u_label x ... x I) v.
inline Vector apply_on_subsystem(const Vector& v, const SubsystemSpec& spec,
                                 int label, const Matrix& u) {
  if (v.size() != spec.total_dim())
    throw std::invalid_argument("apply_on_subsystem: wrong vector size");
  if (label < 1 || label > spec.count())
    throw std::invalid_argument("apply_on_subsystem: label out of range");
  const Index ds = spec.dims[static_cast<std::size_t>(label - 1)];
  if (u.rows() != ds || u.cols() != ds)
    throw std::invalid_argument("apply_on_subsystem: operator size mismatch");
  const Index stride = spec.stride(label - 1);
  Vector out(v.size());
  const Index outer = v.size() / ds;
  for (Index o = 0; o < outer; ++o) {
    const Index base = (o / stride) * stride * ds + (o % stride);
    for (Index row = 0; row < ds; ++row) {
      Complex s = 0.0;
      for (Index col = 0; col < ds; ++col)
        s += u(row, col) * v(base + col * stride);
      out(base + row * stride) = s;
    }
  }
  return out;
}

//============================================================================
// Hermitian eigensolver
//============================================================================

inline bool is_hermitian(const Matrix& m, double tol = kHermitianTol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(Matrix(m - m.adjoint())) <= tol * scale;
}

struct EigPair {
  double value = 0.0;
  Vector vector;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Vector deterministic_start_vector(Index n, std::uint64_t seed) {
  std::uint64_t s = seed;
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = static_cast<double>(splitmix64(s) >> 11) * 0x1p-53 - 0.5;
    const double im = static_cast<double>(splitmix64(s) >> 11) * 0x1p-53 - 0.5;
    v(i) = Complex(re, im);
  }
  v.normalize();
  return v;
}

}  // namespace detail

/// Dominant eigenpair of a Hermitian operator given only through its action
/// v -> Mv.  `shift` must upper-bound |lambda_min| so that M + shift*I has
/// the algebraically largest eigenvalue of M as its dominant one (pass 0 for
/// positive semidefinite operators).  Converges when the Rayleigh residual
/// ||Mv - lambda v|| drops below kEigResidualTol * residual_scale.
inline EigPair power_iteration_max_eig(
    const std::function<Vector(const Vector&)>& apply, Index dim,
    double shift = 0.0, double residual_scale = 1.0,
    std::size_t max_iterations = 200000) {
  Vector v = detail::deterministic_start_vector(dim, 0x7a3175f0u);
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Vector mv = apply(v);
    lambda = mv.dot(v).real();  // v is unit, Rayleigh quotient
    const double residual = (mv - lambda * v).norm();
    if (residual <= kEigResidualTol * residual_scale) return {lambda, v};
    Vector w = mv + shift * v;
    const double wn = w.norm();
    if (wn == 0.0)
      throw std::runtime_error("power_iteration_max_eig: zero iterate");
    v = w / wn;
  }
  throw std::runtime_error("power_iteration_max_eig: no convergence after " +
                           std::to_string(max_iterations) + " iterations");
}

/// Maximum eigenvalue and eigenvector of a Hermitian matrix.  Dense
/// eigendecomposition up to kDenseEigMaxDim; power iteration with a spectral
/// shift beyond that (only the dominant pair is needed at such sizes).
inline EigPair max_eig_herm(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("max_eig_herm: matrix must be square");
  if (!is_hermitian(m))
    throw std::invalid_argument(
        "max_eig_herm: matrix is not Hermitian within tolerance");
  const Matrix h = 0.5 * (m + m.adjoint());
  if (h.rows() <= kDenseEigMaxDim) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("max_eig_herm: eigensolver failed");
    const Index last = h.rows() - 1;
    return {es.eigenvalues()(last), es.eigenvectors().col(last)};
  }
  // Row-sum bound on the spectral radius keeps the shifted operator PSD.
  const double shift = h.cwiseAbs().rowwise().sum().maxCoeff();
  return power_iteration_max_eig(
      [&h](const Vector& v) { return Vector(h * v); }, h.rows(), shift,
      std::max(shift, 1.0));
}

}  // namespace enttrade

#endif  // ENTTRADE_TENSOR_HPP
