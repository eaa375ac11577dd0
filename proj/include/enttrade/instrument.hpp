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

#ifndef ENTTRADE_INSTRUMENT_HPP
#define ENTTRADE_INSTRUMENT_HPP

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "enttrade/tensor.hpp"

namespace enttrade {

/// Conditional-state normalization is refused below this outcome probability.
inline constexpr double kZeroProbTol = 1e-14;

/// Outcome probability fell below kZeroProbTol; the conditional state is
/// undefined and the outcome is reported as unobservable.
class zero_probability_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//============================================================================
// Weyl-Heisenberg basis
//============================================================================

/// The d^2 shift/clock unitaries U_r = X^m Z^n (m = r mod d, n = r div d),
/// with X|k> = |k+1 mod d> and Z = diag(omega^k), omega = exp(2*pi*i/d).
/// They are Hilbert-Schmidt orthogonal, <<U_r|U_s>> = d*delta_rs, and
/// U_0 = I.
inline std::vector<Matrix> weyl_basis(Index d) {
  if (d < 2) throw std::invalid_argument("weyl_basis: d must be >= 2");
  Matrix shift = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) shift((k + 1) % d, k) = 1.0;
  Matrix clock = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k)
    clock(k, k) = std::polar(1.0, 2.0 * M_PI * static_cast<double>(k) /
                                      static_cast<double>(d));
  std::vector<Matrix> xs{Matrix::Identity(d, d)};
  std::vector<Matrix> zs{Matrix::Identity(d, d)};
  for (Index k = 1; k < d; ++k) {
    xs.push_back(xs.back() * shift);
    zs.push_back(zs.back() * clock);
  }
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(d * d));
  for (Index n = 0; n < d; ++n)
    for (Index m = 0; m < d; ++m)
      basis.push_back(xs[static_cast<std::size_t>(m)] *
                      zs[static_cast<std::size_t>(n)]);
  return basis;
}

//============================================================================
// Kraus instruments
//============================================================================

/// One measurement outcome: its Kraus operators and the unitary U whose
/// maximally entangled state (1/sqrt(d))|U>> is guessed on this outcome.
struct InstrumentOutcome {
  std::vector<Matrix> kraus_ops;
  Matrix guess;
};

/// A finite-outcome instrument on the d^2-dimensional bipartite space.
struct KrausInstrument {
  Index dim = 0;  // subsystem dimension d; operators act on d^2
  std::vector<InstrumentOutcome> outcomes;

  Index op_dim() const { return dim * dim; }

  /// POVM element Pi_r = sum_mu A^dag A of outcome r.
  Matrix povm_element(std::size_t r) const {
    Matrix pi = Matrix::Zero(op_dim(), op_dim());
    for (const Matrix& a : outcomes[r].kraus_ops) pi += a.adjoint() * a;
    return pi;
  }

  /// max |sum_r Pi_r - I|, the completeness defect.
  double completeness_residual() const {
    Matrix total = Matrix::Zero(op_dim(), op_dim());
    for (std::size_t r = 0; r < outcomes.size(); ++r)
      total += povm_element(r);
    return max_abs(Matrix(total - Matrix::Identity(op_dim(), op_dim())));
  }

  /// Throws unless the POVM is complete and every guess is unitary
  /// within `tol`.
  void validate(double tol = kHermitianTol) const {
    if (dim < 2 || outcomes.empty())
      throw std::invalid_argument("KrausInstrument: empty or dim < 2");
    for (const auto& o : outcomes) {
      if (o.guess.rows() != dim || o.guess.cols() != dim)
        throw std::invalid_argument("KrausInstrument: guess has wrong size");
      const double udef = max_abs(
          Matrix(o.guess.adjoint() * o.guess - Matrix::Identity(dim, dim)));
      if (udef > tol)
        throw std::invalid_argument("KrausInstrument: guess is not unitary");
      for (const Matrix& a : o.kraus_ops)
        if (a.rows() != op_dim() || a.cols() != op_dim())
          throw std::invalid_argument(
              "KrausInstrument: Kraus operator has wrong size");
    }
    if (completeness_residual() > tol)
      throw std::invalid_argument("KrausInstrument: POVM is not complete");
  }
};

//============================================================================
// The optimal family A_r = (1/d)(a |U_r>><<U_r| + b I)
//============================================================================

/// b >= 0 completing a in the normalization (a^2+b^2)d^2 + 2abd = d^2.
inline double b_from_a(double a, Index d) {
  if (!(a >= 0.0 && a <= 1.0))
    throw std::invalid_argument("b_from_a: a must lie in [0,1]");
  if (d < 2) throw std::invalid_argument("b_from_a: d must be >= 2");
  const double dd = static_cast<double>(d);
  return (std::sqrt(dd * dd * (1.0 - a * a) + a * a) - a) / dd;
}

/// The pair (a, b) parametrizing the optimal instrument family at
/// dimension d.  Construction enforces the normalization identity.
struct OptimalParams {
  double a = 0.0;
  double b = 1.0;
  Index dim = 2;

  OptimalParams(double a_, Index d) : a(a_), b(b_from_a(a_, d)), dim(d) {}

  double normalization_residual() const {
    const double dd = static_cast<double>(dim);
    return std::abs((a * a + b * b) * dd * dd + 2.0 * a * b * dd - dd * dd);
  }
};

/// The d^2-outcome instrument with Kraus operators
/// A_r = (1/d)(a |U_r>><<U_r| + b I) and guess U_r from the Weyl basis.
/// a = 0 is the no-measurement limit (every A_r = I/d); a = 1 is the
/// projective Bell instrument.
inline KrausInstrument optimal_discrete_instrument(const OptimalParams& p) {
  const Index d = p.dim;
  const std::vector<Matrix> basis = weyl_basis(d);
  const Matrix eye = Matrix::Identity(d * d, d * d);
  KrausInstrument instr;
  instr.dim = d;
  instr.outcomes.reserve(basis.size());
  for (const Matrix& u : basis) {
    const Vector v = vectorize(u);
    Matrix a_r = (p.a * (v * v.adjoint()) + p.b * eye) / static_cast<double>(d);
    instr.outcomes.push_back({{std::move(a_r)}, u});
  }
  return instr;
}

//============================================================================
// Outcome statistics
//============================================================================

struct ApplyResult {
  Matrix post_state;
  double prob = 0.0;
};

namespace detail {

inline void require_density_matrix(const Matrix& rho, Index expected_dim) {
  if (rho.rows() != expected_dim || rho.cols() != expected_dim)
    throw std::invalid_argument("apply: state has wrong dimension");
  if (!is_hermitian(rho))
    throw std::invalid_argument("apply: state is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 ||
      std::abs(rho.trace().imag()) > 1e-8)
    throw std::invalid_argument("apply: state does not have unit trace");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kHermitianTol)
    throw std::invalid_argument("apply: state is not positive semidefinite");
}

}  // namespace detail

/// Applies outcome r: returns the normalized conditional state and the
/// outcome probability Tr[sum_mu A^dag A rho].
inline ApplyResult apply(const KrausInstrument& instr, const Matrix& rho,
                         std::size_t r) {
  if (r >= instr.outcomes.size())
    throw std::invalid_argument("apply: outcome index out of range");
  detail::require_density_matrix(rho, instr.op_dim());
  Matrix mapped = Matrix::Zero(instr.op_dim(), instr.op_dim());
  for (const Matrix& a : instr.outcomes[r].kraus_ops)
    mapped += a * rho * a.adjoint();
  const double prob = mapped.trace().real();
  if (prob < kZeroProbTol)
    throw zero_probability_error("apply: outcome probability below threshold");
  return {Matrix(mapped / prob), prob};
}

//============================================================================
// Covariantization
//============================================================================

/// Kraus set of the covariant instrument at continuous outcome h, built from
/// a discrete seed: {(U_h U_r^dag x I) A_{r mu} (U_r U_h^dag x I)}.  The
/// guess attached to outcome h is the unitary h itself.
inline std::vector<Matrix> covariant_kraus_at(const KrausInstrument& seed,
                                              const Matrix& h) {
  const Index d = seed.dim;
  if (h.rows() != d || h.cols() != d)
    throw std::invalid_argument("covariant_kraus_at: h has wrong dimension");
  const Matrix eye = Matrix::Identity(d, d);
  std::vector<Matrix> out;
  for (const auto& o : seed.outcomes) {
    const Matrix left = kron(h * o.guess.adjoint(), eye);
    const Matrix right = kron(o.guess * h.adjoint(), eye);
    for (const Matrix& a : o.kraus_ops) out.push_back(left * a * right);
  }
  return out;
}

}  // namespace enttrade

#endif  // ENTTRADE_INSTRUMENT_HPP
