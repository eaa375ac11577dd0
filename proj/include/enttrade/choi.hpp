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

#ifndef ENTTRADE_CHOI_HPP
#define ENTTRADE_CHOI_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "enttrade/fidelity.hpp"
#include "enttrade/haar.hpp"
#include "enttrade/tensor.hpp"

namespace enttrade {

// Choi operators of covariant instruments live on four d-dimensional
// subsystems ordered (1,2,3,4): the instrument output pair is (1,2), the
// input copy is (3,4).  R_0 is the operator at the group identity; the
// orbit is R_g = (U_g x I x U_g* x I) R_0 (...)^dag.

/// Dense eigensolves of C(p) are done at d <= kDenseChoiMaxD (dimensions
/// 16, 81, 256); past it only the 2x2 reduction in the candidate span is
/// computed, confirmed through structured residual checks.
inline constexpr Index kDenseChoiMaxD = 4;
/// Top eigenvalues closer than this are treated as degenerate.
inline constexpr double kDegeneracyTol = 1e-12;

/// Positive operator on the d^4-dimensional four-subsystem space.
struct ChoiOperator {
  Matrix matrix;
  Index dim = 0;  // subsystem dimension d

  SubsystemSpec spec() const { return SubsystemSpec::uniform(dim, 4); }
};

/// The candidate optimal vector |chi> = x |I>>_12 |I>>_34 + y |I>>_13 |I>>_24
/// with nonnegative coefficients.  The two basis vectors each have squared
/// norm d^2 and mutual overlap d.
struct ChiVector {
  double x = 0.0;
  double y = 0.0;
  Index dim = 2;

  double norm2() const {
    const double d2 = static_cast<double>(dim * dim);
    return (x * x + y * y) * d2 + 2.0 * x * y * static_cast<double>(dim);
  }
};

namespace detail {

inline std::array<Index, 4> quad_strides(Index d) {
  return {d * d * d, d * d, d, 1};
}

}  // namespace detail

/// |I>>_12 |I>>_34 as an explicit d^4 vector.
inline Vector chi_bell_output(Index d) {
  Vector v = Vector::Zero(d * d * d * d);
  const auto st = detail::quad_strides(d);
  for (Index m = 0; m < d; ++m)
    for (Index n = 0; n < d; ++n)
      v(m * st[0] + m * st[1] + n * st[2] + n * st[3]) = 1.0;
  return v;
}

/// |I>>_13 |I>>_24 as an explicit d^4 vector; this is vec(I_{d^2}) across
/// the (12)|(34) bipartition, i.e. the identity map's Choi vector.
inline Vector chi_identity_map(Index d) {
  Vector v = Vector::Zero(d * d * d * d);
  const auto st = detail::quad_strides(d);
  for (Index m = 0; m < d; ++m)
    for (Index n = 0; n < d; ++n)
      v(m * st[0] + n * st[1] + m * st[2] + n * st[3]) = 1.0;
  return v;
}

inline Vector chi_to_vector(const ChiVector& chi) {
  return chi.x * chi_bell_output(chi.dim) + chi.y * chi_identity_map(chi.dim);
}

//============================================================================
// Structured application of R_F, R_G and C(p)
//============================================================================

/// Applies |I>>_pq <<I| (x) identity-on-the-rest to a d^4 vector, where
/// (p, q) are 1-based subsystem labels.  O(d^4) work, nothing materialized.
inline Vector apply_pair_projector(const Vector& v, Index d, int p, int q) {
  if (v.size() != d * d * d * d)
    throw std::invalid_argument("apply_pair_projector: wrong vector size");
  if (p < 1 || q < 1 || p > 4 || q > 4 || p == q)
    throw std::invalid_argument("apply_pair_projector: bad subsystem pair");
  const auto st = detail::quad_strides(d);
  const Index sp = st[static_cast<std::size_t>(p - 1)];
  const Index sq = st[static_cast<std::size_t>(q - 1)];
  std::array<Index, 2> free_strides{};
  int nf = 0;
  for (int k = 0; k < 4; ++k)
    if (k != p - 1 && k != q - 1)
      free_strides[static_cast<std::size_t>(nf++)] =
          st[static_cast<std::size_t>(k)];
  Vector out = Vector::Zero(v.size());
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      const Index base = i * free_strides[0] + j * free_strides[1];
      Complex s = 0.0;
      for (Index k = 0; k < d; ++k) s += v(base + k * (sp + sq));
      for (Index m = 0; m < d; ++m) out(base + m * (sp + sq)) = s;
    }
  return out;
}

/// R_F |v> without materializing R_F:
/// R_F = c [ I + P(1,3) P(2,4) - (1/d)(P(2,4) + P(1,3)) ],
/// c = 1/(d^2(d^2-1)), P(i,j) the pair projector above.
inline Vector apply_RF(const Vector& v, Index d) {
  const double d2 = static_cast<double>(d * d);
  const double c = 1.0 / (d2 * (d2 - 1.0));
  const Vector p24 = apply_pair_projector(v, d, 2, 4);
  const Vector p13 = apply_pair_projector(v, d, 1, 3);
  const Vector both = apply_pair_projector(p24, d, 1, 3);
  return c * (v + both - (p24 + p13) / static_cast<double>(d));
}

/// R_G |v>: R_G = c [ (1 - 2/d^2) I + (1/d) P(3,4) ].
inline Vector apply_RG(const Vector& v, Index d) {
  const double d2 = static_cast<double>(d * d);
  const double c = 1.0 / (d2 * (d2 - 1.0));
  return c * ((1.0 - 2.0 / d2) * v +
              apply_pair_projector(v, d, 3, 4) / static_cast<double>(d));
}

/// C(p)|v> = [p R_G + (1-p) R_F] |v>.
inline Vector apply_C(const Vector& v, Index d, double p) {
  return p * apply_RG(v, d) + (1.0 - p) * apply_RF(v, d);
}

//============================================================================
// Dense construction
//============================================================================

namespace detail {

/// Embeds a two-subsystem operator onto 1-based positions (p, q) of the
/// four-subsystem space, identity on the rest.
inline Matrix embed_pair_op(const Matrix& op, Index d, int p, int q) {
  const Index n = d * d * d * d;
  const auto st = quad_strides(d);
  const Index sp = st[static_cast<std::size_t>(p - 1)];
  const Index sq = st[static_cast<std::size_t>(q - 1)];
  std::array<Index, 2> fs{};
  int nf = 0;
  for (int k = 0; k < 4; ++k)
    if (k != p - 1 && k != q - 1)
      fs[static_cast<std::size_t>(nf++)] = st[static_cast<std::size_t>(k)];
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      const Index base = i * fs[0] + j * fs[1];
      for (Index rp = 0; rp < d; ++rp)
        for (Index rq = 0; rq < d; ++rq)
          for (Index cp = 0; cp < d; ++cp)
            for (Index cq = 0; cq < d; ++cq)
              out(base + rp * sp + rq * sq, base + cp * sp + cq * sq) =
                  op(rp * d + rq, cp * d + cq);
    }
  return out;
}

inline Matrix bell_projector(Index d) {  // |I>><<I| on a d^2 space
  const Vector v = vectorize(Matrix::Identity(d, d));
  return v * v.adjoint();
}

}  // namespace detail

/// Dense R_F = c [I + Ibb(13)x(24) - (1/d)(I(13)xIbb(24) + Ibb(13)xI(24))]
/// with Ibb(ij) the unnormalized maximally-entangled projector on (i,j).
/// Hermitian, positive semidefinite, unit trace.
inline ChoiOperator build_RF(Index d) {
  if (d < 2) throw std::invalid_argument("build_RF: d must be >= 2");
  const Index n = d * d * d * d;
  const double d2 = static_cast<double>(d * d);
  const double c = 1.0 / (d2 * (d2 - 1.0));
  const Matrix ibb = detail::bell_projector(d);
  const Vector x2 = chi_identity_map(d);  // Ibb(13) x Ibb(24) is rank one
  Matrix m = Matrix::Identity(n, n);
  m += x2 * x2.adjoint();
  m -= (detail::embed_pair_op(ibb, d, 2, 4) +
        detail::embed_pair_op(ibb, d, 1, 3)) /
       static_cast<double>(d);
  return {Matrix(c * m), d};
}

/// Dense R_G = c [(1 - 2/d^2) I + (1/d) I(12) x Ibb(34)].
inline ChoiOperator build_RG(Index d) {
  if (d < 2) throw std::invalid_argument("build_RG: d must be >= 2");
  const Index n = d * d * d * d;
  const double d2 = static_cast<double>(d * d);
  const double c = 1.0 / (d2 * (d2 - 1.0));
  Matrix m = (1.0 - 2.0 / d2) * Matrix::Identity(n, n);
  m += detail::embed_pair_op(detail::bell_projector(d), d, 3, 4) /
       static_cast<double>(d);
  return {Matrix(c * m), d};
}

/// R_0 = (d^2 / ||chi||^2) |chi><chi|, the Choi operator of the optimal
/// covariant instrument's seed, normalized so Tr[R_0] = d^2.
inline ChoiOperator build_R0(const ChiVector& chi) {
  const double n2 = chi.norm2();
  if (n2 <= 0.0) throw std::invalid_argument("build_R0: zero chi vector");
  const Vector v = chi_to_vector(chi);
  const double scale = static_cast<double>(chi.dim * chi.dim) / n2;
  return {Matrix(scale * (v * v.adjoint())), chi.dim};
}

//============================================================================
// Optimization of p G + (1-p) F
//============================================================================

struct OptimizeResult {
  TradeoffPoint point;
  ChiVector chi;
  double lambda_max = 0.0;
  /// Span-projection residual of the dense top eigenvector (d <= 4), or the
  /// eigen-equation residual of the reduced solution (d >= 5).
  double form_residual = 0.0;
  bool degenerate = false;
};

namespace detail {

/// 2x2 blocks <chi_i|R|chi_j> of an operator given by its vector action,
/// in the non-orthogonal basis {chi_bell_output, chi_identity_map}.
template <typename Apply>
Eigen::Matrix2d span_block(Index d, Apply&& apply) {
  const std::array<Vector, 2> basis{chi_bell_output(d), chi_identity_map(d)};
  std::array<Vector, 2> mapped{apply(basis[0]), apply(basis[1])};
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      m(i, j) = basis[static_cast<std::size_t>(i)]
                    .dot(mapped[static_cast<std::size_t>(j)])
                    .real();
  return m;
}

inline Eigen::Matrix2d span_gram(Index d) {
  Eigen::Matrix2d s;
  const double dd = static_cast<double>(d);
  s << dd * dd, dd, dd, dd * dd;
  return s;
}

}  // namespace detail

/// Maximizes p G + (1-p) F = Tr[C(p) R_0] over valid seeds R_0.
///
/// The top eigenvector of C(p) = p R_G + (1-p) R_F is resolved in the
/// two-dimensional candidate span by the generalized problem M c = lambda S c
/// with M_ij = <chi_i|C(p)|chi_j> and Gram S = [[d^2, d], [d, d^2]].  For
/// d <= 4 the dense eigensolve of C(p) is also performed and the returned
/// residual measures how far its top eigenvector sticks out of the span
/// (projected onto the top eigenspace when the maximum is degenerate).
inline OptimizeResult optimize(double p, Index d) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("optimize: p must lie in [0,1]");
  if (d < 2) throw std::invalid_argument("optimize: d must be >= 2");

  const bool dense = d <= kDenseChoiMaxD;
  Matrix c_dense;
  Eigen::Matrix2d mf;
  Eigen::Matrix2d mg;
  if (dense) {
    const ChoiOperator rf = build_RF(d);
    const ChoiOperator rg = build_RG(d);
    c_dense = p * rg.matrix + (1.0 - p) * rf.matrix;
    mf = detail::span_block(
        d, [&](const Vector& v) { return Vector(rf.matrix * v); });
    mg = detail::span_block(
        d, [&](const Vector& v) { return Vector(rg.matrix * v); });
  } else {
    mf = detail::span_block(d,
                            [&](const Vector& v) { return apply_RF(v, d); });
    mg = detail::span_block(d,
                            [&](const Vector& v) { return apply_RG(v, d); });
  }
  const Eigen::Matrix2d m2 = p * mg + (1.0 - p) * mf;
  const Eigen::Matrix2d gram = detail::span_gram(d);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ges(m2, gram);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("optimize: 2x2 generalized eigensolve failed");
  const double lambda_span = ges.eigenvalues()(1);
  Eigen::Vector2d coeff = ges.eigenvectors().col(1);
  // The optimal coefficients are nonnegative up to a global sign.
  if (coeff(std::abs(coeff(0)) >= std::abs(coeff(1)) ? 0 : 1) < 0.0)
    coeff = -coeff;
  coeff = coeff.cwiseMax(0.0);

  OptimizeResult result;
  result.chi = {coeff(0), coeff(1), d};
  result.lambda_max = lambda_span;

  // Fidelities through the Choi pairing F = Tr[R_F R_0], G = Tr[R_G R_0].
  const double norm2 = result.chi.norm2();
  if (norm2 <= 0.0) throw std::runtime_error("optimize: degenerate chi");
  const double pair_scale = static_cast<double>(d * d) / norm2;
  TradeoffPoint pt;
  pt.F = pair_scale * coeff.dot(mf * coeff);
  pt.G = pair_scale * coeff.dot(mg * coeff);
  const double s = static_cast<double>(d) / std::sqrt(norm2);
  pt.a = s * result.chi.x;
  pt.b = s * result.chi.y;
  const Visibilities vis = visibilities(std::min(pt.F, 1.0), pt.G, d);
  pt.I = vis.I;
  pt.D = vis.D;
  result.point = pt;

  if (dense) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c_dense);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("optimize: dense eigensolve failed");
    const Index last = c_dense.rows() - 1;
    result.lambda_max = es.eigenvalues()(last);
    result.degenerate =
        es.eigenvalues()(last) - es.eigenvalues()(last - 1) < kDegeneracyTol;
    if (result.degenerate) {
      // Check that the reduced solution lies inside the top eigenspace.
      Index lo = last;
      while (lo > 0 &&
             es.eigenvalues()(last) - es.eigenvalues()(lo - 1) < kDegeneracyTol)
        --lo;
      const auto top = es.eigenvectors().rightCols(last - lo + 1);
      Vector chi_hat = chi_to_vector(result.chi);
      chi_hat.normalize();
      result.form_residual = (chi_hat - top * (top.adjoint() * chi_hat)).norm();
    } else {
      // Check that the dense top eigenvector lies inside the span.
      Matrix span(c_dense.rows(), 2);
      span.col(0) = chi_bell_output(d);
      span.col(1) = chi_identity_map(d);
      const Matrix q = Eigen::HouseholderQR<Matrix>(span).householderQ() *
                       Matrix::Identity(c_dense.rows(), 2);
      const Vector v = es.eigenvectors().col(last);
      result.form_residual = (v - q * (q.adjoint() * v)).norm();
    }
  } else {
    Vector chi_hat = chi_to_vector(result.chi);
    chi_hat.normalize();
    result.form_residual =
        (apply_C(chi_hat, d, p) - lambda_span * chi_hat).norm();
  }
  return result;
}

/// Confirms by power iteration that the 2x2-reduced eigenvalue at (p, d) is
/// the global maximum of C(p); returns |lambda_power - lambda_reduced|.
/// Intended for d >= 5 where no dense eigensolve is done (C(p) is PSD, so
/// no shift is needed).
inline double confirm_top_eigenvalue(double p, Index d) {
  const OptimizeResult r = optimize(p, d);
  const EigPair pi = power_iteration_max_eig(
      [&](const Vector& v) { return apply_C(v, d, p); }, d * d * d * d, 0.0,
      std::max(r.lambda_max, 1e-6));
  return std::abs(pi.value - r.lambda_max);
}

//============================================================================
// Jamiolkowski extraction
//============================================================================

struct ChiKraus {
  Matrix kraus;  // the seed Kraus operator a |I>><<I| + b I on d^2
  double a = 0.0;
  double b = 0.0;
};

/// Devectorizes |chi> across the (12)|(34) bipartition: the seed Kraus
/// operator is A = a |I>><<I| + b I with (a, b) = s (x, y) and s chosen so
/// that Tr[R_0] = d^2; (a, b) then satisfies the normalization identity.
inline ChiKraus chi_to_kraus(const ChiVector& chi) {
  const double n2 = chi.norm2();
  if (n2 <= 0.0) throw std::invalid_argument("chi_to_kraus: zero chi vector");
  const Index d = chi.dim;
  const double s = static_cast<double>(d) / std::sqrt(n2);
  const double a = s * chi.x;
  const double b = s * chi.y;
  const Matrix kraus = a * detail::bell_projector(d) +
                       b * Matrix::Identity(d * d, d * d);
  return {kraus, a, b};
}

//============================================================================
// Trace-preservation diagnostics
//============================================================================

struct TpReport {
  double tr134_residual = 0.0;  // max |Tr_{1,3,4}[R_0] - d I|
  double trace_residual = 0.0;  // |Tr[R_0] - d^2|
  double min_eigenvalue = 0.0;
  bool mc34_ok = false;      // Haar average of Tr_34[R_g] equals I within 3 sigma
  double mc34_max_dev = 0.0; // max entrywise |mean - I|
  std::size_t mc34_samples = 0;
};

/// Diagnostic report on a candidate seed R_0: the partial-trace condition
/// Tr_{1,3,4}[R_0] = d I, the total trace d^2, positivity, and a Monte-Carlo
/// check that the group average of Tr_34[R_g] is the identity.
inline TpReport verify_tp(const ChoiOperator& r0, std::size_t mc_samples = 500,
                          const SeededStream& stream = {}, int jobs = 1) {
  const Index d = r0.dim;
  r0.spec().require_matches(r0.matrix);
  const double dd = static_cast<double>(d);
  TpReport report;

  const Matrix reduced = partial_trace(r0.matrix, r0.spec(), {1, 3, 4});
  report.tr134_residual =
      max_abs(Matrix(reduced - dd * Matrix::Identity(d, d)));
  report.trace_residual =
      std::abs(r0.matrix.trace().real() - dd * dd) +
      std::abs(r0.matrix.trace().imag());
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      0.5 * (r0.matrix + r0.matrix.adjoint()), Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();

  // Subsystem 4 carries no group action, so trace it out once up front.
  const Matrix r_123 = partial_trace(r0.matrix, r0.spec(), {4});
  const SubsystemSpec spec3 = SubsystemSpec::uniform(d, 3);
  const Matrix eye_d = Matrix::Identity(d, d);
  auto f = [&](const Matrix& u) -> Matrix {
    const Matrix w = kron(u, kron(eye_d, u.conjugate()));
    return partial_trace(Matrix(w * r_123 * w.adjoint()), spec3, {3});
  };
  const McMatrixEstimate est = mc_average(f, d, mc_samples, stream, jobs);
  const Matrix dev = est.mean - Matrix::Identity(d * d, d * d);
  report.mc34_max_dev = max_abs(dev);
  report.mc34_samples = mc_samples;
  report.mc34_ok = true;
  for (Index i = 0; i < dev.rows(); ++i)
    for (Index j = 0; j < dev.cols(); ++j)
      if (std::abs(dev(i, j)) > 3.0 * est.stderr_entries(i, j) + 1e-12)
        report.mc34_ok = false;
  return report;
}

/// Same diagnostics for the rank-one seed R_0 = (d^2/||chi||^2)|chi><chi|,
/// never materializing the d^4 x d^4 matrix; usable at any dimension.
inline TpReport verify_tp_rank_one(const ChiVector& chi,
                                   std::size_t mc_samples = 500,
                                   const SeededStream& stream = {},
                                   int jobs = 1) {
  const Index d = chi.dim;
  const double n2 = chi.norm2();
  if (n2 <= 0.0)
    throw std::invalid_argument("verify_tp_rank_one: zero chi vector");
  const double scale = static_cast<double>(d * d) / n2;
  const Vector psi = chi_to_vector(chi);
  const SubsystemSpec spec = SubsystemSpec::uniform(d, 4);
  const double dd = static_cast<double>(d);
  TpReport report;
  report.tr134_residual = max_abs(
      Matrix(scale * partial_trace_rank_one(psi, spec, {1, 3, 4}) -
             dd * Matrix::Identity(d, d)));
  report.trace_residual = std::abs(scale * psi.squaredNorm() - dd * dd);
  report.min_eigenvalue = 0.0;  // rank-one PSD by construction

  auto f = [&](const Matrix& u) -> Matrix {
    Vector rotated = apply_on_subsystem(psi, spec, 1, u);
    rotated = apply_on_subsystem(rotated, spec, 3, u.conjugate());
    return Matrix(scale * partial_trace_rank_one(rotated, spec, {3, 4}));
  };
  const McMatrixEstimate est = mc_average(f, d, mc_samples, stream, jobs);
  const Matrix dev = est.mean - Matrix::Identity(d * d, d * d);
  report.mc34_max_dev = max_abs(dev);
  report.mc34_samples = mc_samples;
  report.mc34_ok = true;
  for (Index i = 0; i < dev.rows(); ++i)
    for (Index j = 0; j < dev.cols(); ++j)
      if (std::abs(dev(i, j)) > 3.0 * est.stderr_entries(i, j) + 1e-12)
        report.mc34_ok = false;
  return report;
}

}  // namespace enttrade

#endif  // ENTTRADE_CHOI_HPP
