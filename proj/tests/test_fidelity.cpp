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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "enttrade/fidelity.hpp"
#include "test_helpers.hpp"

using namespace enttrade;

// Frozen with 30-digit arithmetic from b = (sqrt(d^2(1-a^2)+a^2)-a)/d,
// F = 1-(d^2-2)a^2/d^2, G = (2-b^2)/d^2.
namespace frozen {
constexpr double kB_half_d2 = 0.6513878188659973;
constexpr double kG_half_d2 = 0.3939234773582497;
constexpr double kI_half_d2 = 0.5756939094329987;
constexpr double kB_half_d3 = 0.7152504370215302;
constexpr double kG_half_d3 = 0.1653796458156122;
constexpr double kF_half_d3 = 0.8055555555555556;
}  // namespace frozen

TEST_CASE("closed forms: paper endpoints", "[fidelity]") {
  for (Index d : {2, 4, 8}) {
    const double d2 = static_cast<double>(d * d);
    CHECK(closed_form_F(0.0, d) == 1.0);
    CHECK(std::abs(closed_form_G(0.0, d) - 1.0 / d2) <= 1e-15);
    CHECK(std::abs(closed_form_F(1.0, d) - 2.0 / d2) <= 1e-15);
    CHECK(std::abs(closed_form_G(1.0, d) - 2.0 / d2) <= 1e-15);
  }
  CHECK(closed_form_F(1.0, 2) == Catch::Approx(0.5).margin(1e-15));
  CHECK(closed_form_G(1.0, 2) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("closed forms: frozen interior values", "[fidelity]") {
  CHECK(closed_form_F(0.5, 2) == Catch::Approx(0.875).margin(1e-15));
  CHECK(closed_form_G(0.5, 2) ==
        Catch::Approx(frozen::kG_half_d2).epsilon(1e-13));
  CHECK(closed_form_F(0.5, 3) ==
        Catch::Approx(frozen::kF_half_d3).epsilon(1e-13));
  CHECK(closed_form_G(0.5, 3) ==
        Catch::Approx(frozen::kG_half_d3).epsilon(1e-13));
  CHECK(b_from_a(0.5, 3) == Catch::Approx(frozen::kB_half_d3).epsilon(1e-13));
  CHECK_THROWS_AS(closed_form_F(-0.2, 2), std::invalid_argument);
  CHECK_THROWS_AS(closed_form_G(1.2, 2), std::invalid_argument);
}

TEST_CASE("closed forms: both printed forms agree", "[fidelity]") {
  // Joint validation of b_from_a and the normalization identity.
  for (Index d : {2, 3, 4, 5, 6, 7, 8}) {
    for (int k = 0; k <= 20; ++k) {
      const double a = k / 20.0;
      CHECK(std::abs(closed_form_F(a, d) - closed_form_F_alt(a, d)) <= 1e-12);
      CHECK(std::abs(closed_form_G(a, d) - closed_form_G_alt(a, d)) <= 1e-12);
    }
  }
}

TEST_CASE("visibilities: endpoints and frozen interior point", "[fidelity]") {
  for (Index d : {2, 3, 4}) {
    const double d2 = static_cast<double>(d * d);
    const Visibilities none = visibilities(1.0, 1.0 / d2, d);
    CHECK(none.I == Catch::Approx(0.0).margin(1e-14));
    CHECK(none.D == Catch::Approx(0.0).margin(1e-14));
    const Visibilities bell = visibilities(2.0 / d2, 2.0 / d2, d);
    CHECK(bell.I == Catch::Approx(1.0).margin(1e-14));
    CHECK(bell.D == Catch::Approx(1.0).margin(1e-14));
  }

  const Visibilities mid = visibilities(0.875, frozen::kG_half_d2, 2);
  CHECK(mid.I == Catch::Approx(frozen::kI_half_d2).epsilon(1e-12));
  CHECK(mid.D == Catch::Approx(0.25).margin(1e-14));
  const double quad =
      4.0 * (mid.D - mid.I) * (mid.D - mid.I) - 4.0 * mid.D * (1.0 - mid.I);
  CHECK(std::abs(quad) <= 1e-10);

  CHECK(visibilities(1.0, 0.25 - 1e-13, 2).I == 0.0);  // clamp tiny negative
  CHECK_THROWS_AS(visibilities(1.2, 0.5, 2), std::domain_error);
  CHECK_THROWS_AS(visibilities(0.5, -0.1, 2), std::domain_error);
}

TEST_CASE("tradeoff_curve: endpoints, monotonicity, relations", "[fidelity]") {
  for (Index d : {2, 3, 4, 8}) {
    const double d2 = static_cast<double>(d * d);
    const auto curve = tradeoff_curve(d, 101);
    REQUIRE(curve.size() == 101);

    const auto& first = curve.front();
    CHECK(first.a == 0.0);
    CHECK(first.b == Catch::Approx(1.0).margin(1e-15));
    CHECK(first.F == 1.0);
    CHECK(first.G == Catch::Approx(1.0 / d2).margin(1e-15));
    CHECK(first.I == Catch::Approx(0.0).margin(1e-14));
    CHECK(first.D == Catch::Approx(0.0).margin(1e-14));

    const auto& last = curve.back();
    CHECK(last.a == 1.0);
    CHECK(last.b == Catch::Approx(0.0).margin(1e-15));
    CHECK(last.F == Catch::Approx(2.0 / d2).margin(1e-14));
    CHECK(last.G == Catch::Approx(2.0 / d2).margin(1e-14));
    CHECK(last.I == Catch::Approx(1.0).margin(1e-13));
    CHECK(last.D == Catch::Approx(1.0).margin(1e-13));

    for (std::size_t k = 1; k < curve.size(); ++k) {
      CHECK(curve[k].I >= curve[k - 1].I - 1e-14);
      CHECK(curve[k].D >= curve[k - 1].D - 1e-14);
    }
    for (const auto& pt : curve) {
      const auto res = tradeoff_residuals(pt.F, pt.G, d);
      CHECK(std::abs(res.gf) <= 1e-10);
      CHECK(std::abs(res.quad) <= 1e-10);
      // The two printed forms of the tradeoff have the same zero set.
      CHECK(std::abs(tradeoff_residual_fg(pt.F, pt.G, d)) <= 1e-9);
    }
  }
  CHECK_THROWS_AS(tradeoff_curve(2, 1), std::invalid_argument);
}

TEST_CASE("tradeoff_residuals: endpoints and infeasible point", "[fidelity]") {
  for (Index d : {2, 3, 4}) {
    const double d2 = static_cast<double>(d * d);
    const auto none = tradeoff_residuals(1.0, 1.0 / d2, d);
    CHECK(std::abs(none.gf) <= 1e-12);
    CHECK(std::abs(none.quad) <= 1e-12);
    const auto bell = tradeoff_residuals(2.0 / d2, 2.0 / d2, d);
    CHECK(std::abs(bell.gf) <= 1e-12);
    CHECK(std::abs(bell.quad) <= 1e-12);
    // (F, G) = (1, 2/d^2) is above the bound: I = 1, D = 0 gives d^2.
    const auto above = tradeoff_residuals(1.0, 2.0 / d2, d);
    CHECK(above.quad == Catch::Approx(d2).margin(1e-10));
  }

  CHECK_THROWS_AS(tradeoff_residuals(0.1, 0.25, 2), sqrt_domain_error);
  CHECK_THROWS_AS(tradeoff_residuals(0.9, 0.9, 2), sqrt_domain_error);
}

TEST_CASE("mc_fidelities: identity instrument is exact in F", "[fidelity]") {
  KrausInstrument instr;
  instr.dim = 2;
  instr.outcomes.push_back(
      {{Matrix::Identity(4, 4)}, Matrix::Identity(2, 2)});
  const auto est = mc_fidelities(instr, 2000, {9, 0});
  CHECK(est.F.value == 1.0);  // integrand is constant
  CHECK(est.F.stderr == 0.0);
  CHECK(std::abs(est.G.value - 0.25) <= 3.0 * est.G.stderr);
  CHECK(est.G.stderr > 0.0);
  CHECK(est.F.n_samples == 2000);
  CHECK(est.F.seed == 9);
}

TEST_CASE("mc_fidelities: optimal instrument against closed forms",
          "[fidelity][mc]") {
  SECTION("Bell point, d = 2") {
    const auto instr = optimal_discrete_instrument(OptimalParams(1.0, 2));
    const auto est = mc_fidelities(instr, 20000, {101, 0});
    CHECK(std::abs(est.F.value - 0.5) <= 3.0 * est.F.stderr);
    CHECK(std::abs(est.G.value - 0.5) <= 3.0 * est.G.stderr);
  }
  SECTION("a = 0.5, d = 3") {
    const auto instr = optimal_discrete_instrument(OptimalParams(0.5, 3));
    const auto est = mc_fidelities(instr, 20000, {102, 0});
    CHECK(std::abs(est.F.value - frozen::kF_half_d3) <= 3.0 * est.F.stderr);
    CHECK(std::abs(est.G.value - frozen::kG_half_d3) <= 3.0 * est.G.stderr);
  }
}

TEST_CASE("mc_fidelities: estimates stay inside [0,1]", "[fidelity]") {
  for (double a : {0.0, 0.3, 0.7, 1.0}) {
    const auto instr = optimal_discrete_instrument(OptimalParams(a, 2));
    const auto est = mc_fidelities(instr, 200, {103, 7});
    CHECK(est.F.value >= 0.0);
    CHECK(est.F.value <= 1.0);
    CHECK(est.G.value >= 0.0);
    CHECK(est.G.value <= 1.0);
  }
  const auto instr = optimal_discrete_instrument(OptimalParams(0.5, 2));
  CHECK_THROWS_AS(mc_fidelities(instr, 50, {0, 0}), std::invalid_argument);
}

TEST_CASE("mc_fidelities: error shrinks at the 1/sqrt(n) rate",
          "[fidelity][mc]") {
  const auto instr = optimal_discrete_instrument(OptimalParams(0.5, 2));
  const double f_exact = closed_form_F(0.5, 2);
  double err_small = 0.0;
  double err_large = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    err_small +=
        std::abs(mc_fidelities(instr, 2000, {s, 11}).F.value - f_exact);
    err_large +=
        std::abs(mc_fidelities(instr, 4000, {s, 12}).F.value - f_exact);
  }
  const double ratio = err_small / err_large;
  CHECK(ratio >= 1.2);
  CHECK(ratio <= 1.7);
}

TEST_CASE("mc_fidelities: deterministic under jobs", "[fidelity]") {
  const auto instr = optimal_discrete_instrument(OptimalParams(0.5, 2));
  const auto serial = mc_fidelities(instr, 3000, {77, 0}, 1);
  const auto parallel = mc_fidelities(instr, 3000, {77, 0}, 4);
  CHECK(serial.F.value == parallel.F.value);
  CHECK(serial.G.value == parallel.G.value);
  CHECK(serial.F.stderr == parallel.F.stderr);
}

TEST_CASE("covariantization preserves the fidelities", "[fidelity][mc]") {
  const Index d = 2;
  const double a = 0.5;
  const auto seed_instr = optimal_discrete_instrument(OptimalParams(a, d));
  const auto est = mc_fidelities_covariant(seed_instr, 5000, {2026, 0});
  CHECK(std::abs(est.F.value - closed_form_F(a, d)) <= 3.0 * est.F.stderr);
  CHECK(std::abs(est.G.value - closed_form_G(a, d)) <= 3.0 * est.G.stderr);
}
