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

#ifndef ENTTRADE_FIDELITY_HPP
#define ENTTRADE_FIDELITY_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "enttrade/haar.hpp"
#include "enttrade/instrument.hpp"
#include "enttrade/tensor.hpp"

namespace enttrade {

/// Absolute slack applied before declaring a square-root domain violation;
/// curve endpoints sit exactly on the domain boundaries.
inline constexpr double kSqrtDomainSlack = 1e-12;

/// A square-root argument in a tradeoff relation was negative beyond slack.
class sqrt_domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One point of the optimal tradeoff family: parameters (a, b), fidelities
/// (F, G) and normalized visibilities (I, D).
struct TradeoffPoint {
  double a = 0.0;
  double b = 1.0;
  double F = 1.0;
  double G = 0.0;
  double I = 0.0;
  double D = 0.0;
};

/// A seeded Monte-Carlo scalar estimate.
struct McEstimate {
  double value = 0.0;
  double stderr = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

//============================================================================
// Closed forms on the optimal family
//============================================================================

namespace detail {

inline void require_curve_domain(double a, Index d) {
  if (!(a >= 0.0 && a <= 1.0))
    throw std::invalid_argument("closed form: a must lie in [0,1]");
  if (d < 2) throw std::invalid_argument("closed form: d must be >= 2");
}

}  // namespace detail

/// Operation fidelity of the optimal family, F(a) = 1 - (d^2-2) a^2 / d^2.
inline double closed_form_F(double a, Index d) {
  detail::require_curve_domain(a, d);
  const double d2 = static_cast<double>(d * d);
  return 1.0 - (d2 - 2.0) * a * a / d2;
}

/// Same quantity through the Choi pairing route,
/// F = [d^2 + (d^2-2)(a + b d)^2] / (d^2 (d^2-1)).
inline double closed_form_F_alt(double a, Index d) {
  detail::require_curve_domain(a, d);
  const double d2 = static_cast<double>(d * d);
  const double s = a + b_from_a(a, d) * static_cast<double>(d);
  return (d2 + (d2 - 2.0) * s * s) / (d2 * (d2 - 1.0));
}

/// Estimation fidelity of the optimal family, G(a) = (2 - b^2) / d^2.
inline double closed_form_G(double a, Index d) {
  detail::require_curve_domain(a, d);
  const double b = b_from_a(a, d);
  return (2.0 - b * b) / static_cast<double>(d * d);
}

/// Same quantity through the Choi pairing route,
/// G = [d^2 - 2 + (a d + b)^2] / (d^2 (d^2-1)).
inline double closed_form_G_alt(double a, Index d) {
  detail::require_curve_domain(a, d);
  const double d2 = static_cast<double>(d * d);
  const double s = a * static_cast<double>(d) + b_from_a(a, d);
  return (d2 - 2.0 + s * s) / (d2 * (d2 - 1.0));
}

//============================================================================
// Visibilities and tradeoff relations
//============================================================================

struct Visibilities {
  double I = 0.0;  // retrieved information, (G - 1/d^2) / (2/d^2 - 1/d^2)
  double D = 0.0;  // inflicted disturbance, (1 - F) / (1 - 2/d^2)
};

/// Normalizes (F, G) to the unit-interval visibilities I = d^2 G - 1 and
/// D = d^2 (1 - F) / (d^2 - 2).  Tiny negatives >= -1e-12 are clamped to 0.
inline Visibilities visibilities(double F, double G, Index d) {
  if (d < 2) throw std::invalid_argument("visibilities: d must be >= 2");
  if (!(F >= 0.0 && F <= 1.0))
    throw std::domain_error("visibilities: F outside [0,1]");
  if (!(G >= 0.0 && G <= 1.0))
    throw std::domain_error("visibilities: G outside [0,1]");
  const double d2 = static_cast<double>(d * d);
  auto clamp_tiny = [](double v) {
    return (v < 0.0 && v >= -1e-12) ? 0.0 : v;
  };
  return {clamp_tiny(d2 * G - 1.0), clamp_tiny(d2 * (1.0 - F) / (d2 - 2.0))};
}

struct TradeoffResiduals {
  double gf = 0.0;    // sqrt((d^2-2)(2-d^2 G)) - [sqrt((d^2-1)F-1) - sqrt(1-F)]
  double quad = 0.0;  // d^2 (D-I)^2 - 4 D (1-I)
};

namespace detail {

inline double checked_sqrt(double x, const char* what) {
  if (x < -kSqrtDomainSlack)
    throw sqrt_domain_error(std::string("tradeoff relation: ") + what +
                            " is negative");
  return std::sqrt(std::max(x, 0.0));
}

}  // namespace detail

/// Signed residuals of the two optimal-tradeoff relations; both vanish
/// (<= 1e-10) exactly on the optimal curve.
inline TradeoffResiduals tradeoff_residuals(double F, double G, Index d) {
  if (d < 2) throw std::invalid_argument("tradeoff_residuals: d must be >= 2");
  const double d2 = static_cast<double>(d * d);
  const double lhs = detail::checked_sqrt((d2 - 2.0) * (2.0 - d2 * G),
                                          "(d^2-2)(2-d^2 G)");
  const double rhs = detail::checked_sqrt((d2 - 1.0) * F - 1.0,
                                          "(d^2-1)F - 1") -
                     detail::checked_sqrt(1.0 - F, "1 - F");
  // Endpoint values may overshoot [0,1] by roundoff; absorb within slack.
  auto into_unit = [](double v) {
    if (v > 1.0 && v <= 1.0 + kSqrtDomainSlack) return 1.0;
    if (v < 0.0 && v >= -kSqrtDomainSlack) return 0.0;
    return v;
  };
  const Visibilities v = visibilities(into_unit(F), into_unit(G), d);
  const double quad =
      d2 * (v.D - v.I) * (v.D - v.I) - 4.0 * v.D * (1.0 - v.I);
  return {lhs - rhs, quad};
}

/// Residual of the equivalent form of the tradeoff,
/// sqrt(d^2/(d^2-2) (F - 1/(d^2-1)))
///   - sqrt(G - (d^2-2)/(d^2(d^2-1))) - sqrt((d^2-1)(2/d^2 - G)).
inline double tradeoff_residual_fg(double F, double G, Index d) {
  if (d < 2) throw std::invalid_argument("tradeoff_residual_fg: d >= 2");
  const double d2 = static_cast<double>(d * d);
  const double lhs = detail::checked_sqrt(
      d2 / (d2 - 2.0) * (F - 1.0 / (d2 - 1.0)), "F - 1/(d^2-1)");
  const double rhs =
      detail::checked_sqrt(G - (d2 - 2.0) / (d2 * (d2 - 1.0)),
                           "G - (d^2-2)/(d^2(d^2-1))") +
      detail::checked_sqrt((d2 - 1.0) * (2.0 / d2 - G), "2/d^2 - G");
  return lhs - rhs;
}

/// Sweeps a uniformly over [0,1] and evaluates the optimal family in closed
/// form.  Endpoints are (I,D) = (0,0) and (1,1); D is nondecreasing in I.
inline std::vector<TradeoffPoint> tradeoff_curve(Index d, int n_points) {
  if (n_points < 2)
    throw std::invalid_argument("tradeoff_curve: need n_points >= 2");
  if (d < 2) throw std::invalid_argument("tradeoff_curve: d must be >= 2");
  std::vector<TradeoffPoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const double a =
        static_cast<double>(k) / static_cast<double>(n_points - 1);
    TradeoffPoint pt;
    pt.a = a;
    pt.b = b_from_a(a, d);
    pt.F = closed_form_F(a, d);
    pt.G = closed_form_G(a, d);
    const Visibilities v = visibilities(pt.F, pt.G, d);
    pt.I = v.I;
    pt.D = v.D;
    out.push_back(pt);
  }
  return out;
}

//============================================================================
// Monte-Carlo fidelities
//============================================================================

struct McFidelities {
  McEstimate F;
  McEstimate G;
};

namespace detail {

inline McFidelities pack_fidelities(const SampleSums<Eigen::Vector2d>& sums,
                                    std::size_t n, std::uint64_t seed) {
  const double dn = static_cast<double>(n);
  McFidelities out;
  McEstimate* dst[2] = {&out.F, &out.G};
  for (int c = 0; c < 2; ++c) {
    const double mean = sums.sum(c) / dn;
    const double var =
        std::max(0.0, (sums.sq(c) / dn - mean * mean) * (dn / (dn - 1.0)));
    *dst[c] = {mean, std::sqrt(var / dn), n, seed};
  }
  return out;
}

}  // namespace detail

/// Haar-averaged operation fidelity F and estimation fidelity G of an
/// instrument.  Per sample g:
///   F-term = (1/d^2) sum_{r,mu} |<<U_g| A_{r mu} |U_g>>|^2
///   G-term = (1/d^3) sum_{r,mu} <<U_g| A^dag A |U_g>> |<<U_r|U_g>>|^2
/// with U_r the stored guess of outcome r, used verbatim.
inline McFidelities mc_fidelities(const KrausInstrument& instr, std::size_t n,
                                  const SeededStream& stream, int jobs = 1) {
  if (n < 100) throw std::invalid_argument("mc_fidelities: need n >= 100");
  instr.validate();
  const Index d = instr.dim;
  const double d2 = static_cast<double>(d * d);
  const double d3 = d2 * static_cast<double>(d);

  std::vector<const Matrix*> kraus;
  std::vector<Matrix> povm;       // one per outcome
  std::vector<Vector> guess_vec;  // |U_r>> per outcome
  for (std::size_t r = 0; r < instr.outcomes.size(); ++r) {
    povm.push_back(instr.povm_element(r));
    guess_vec.push_back(vectorize(instr.outcomes[r].guess));
    for (const Matrix& a : instr.outcomes[r].kraus_ops) kraus.push_back(&a);
  }

  auto sample = [&](std::size_t i) -> Eigen::Vector2d {
    const Matrix u = sample_unitary(d, stream, i);
    const Vector v = vectorize(u);
    double f_term = 0.0;
    for (const Matrix* a : kraus) f_term += std::norm(v.dot((*a) * v));
    double g_term = 0.0;
    for (std::size_t r = 0; r < povm.size(); ++r) {
      const double weight = v.dot(povm[r] * v).real();
      g_term += weight * std::norm(guess_vec[r].dot(v));
    }
    return {f_term / d2, g_term / d3};
  };
  auto sums = detail::mc_sum<Eigen::Vector2d>(n, sample, jobs);
  return detail::pack_fidelities(sums, n, stream.seed);
}

/// F and G of the covariantized instrument built from `seed_instr`, by a
/// double Monte-Carlo average over the input g and the continuous outcome h
/// (both Haar).  The guess at outcome h is U_h.
inline McFidelities mc_fidelities_covariant(const KrausInstrument& seed_instr,
                                            std::size_t n,
                                            const SeededStream& stream,
                                            int jobs = 1) {
  if (n < 100)
    throw std::invalid_argument("mc_fidelities_covariant: need n >= 100");
  seed_instr.validate();
  const Index d = seed_instr.dim;
  const double d2 = static_cast<double>(d * d);
  const double d3 = d2 * static_cast<double>(d);

  auto sample = [&](std::size_t i) -> Eigen::Vector2d {
    const Matrix g = sample_unitary(d, stream, 2 * i);
    const Matrix h = sample_unitary(d, stream, 2 * i + 1);
    const Vector vg = vectorize(g);
    const Vector vh = vectorize(h);
    const double guess_overlap = std::norm(vh.dot(vg));
    double f_term = 0.0;
    double g_term = 0.0;
    for (const Matrix& k : covariant_kraus_at(seed_instr, h)) {
      const Vector kv = k * vg;
      f_term += std::norm(vg.dot(kv));
      g_term += kv.squaredNorm() * guess_overlap;
    }
    return {f_term / d2, g_term / d3};
  };
  auto sums = detail::mc_sum<Eigen::Vector2d>(n, sample, jobs);
  return detail::pack_fidelities(sums, n, stream.seed);
}

}  // namespace enttrade

#endif  // ENTTRADE_FIDELITY_HPP
