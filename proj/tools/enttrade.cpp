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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "enttrade/enttrade.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Writes to the path or to stdout when path is "-".  False on IO failure.
bool write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

double sigma_distance(double value, double reference, double stderr) {
  const double diff = std::abs(value - reference);
  if (stderr <= 0.0) return diff == 0.0 ? 0.0 : 1e9;
  return std::min(diff / stderr, 1e9);
}

//----------------------------------------------------------------------------
// curve
//----------------------------------------------------------------------------

int run_curve(enttrade::Index dim, int points, const std::string& out,
              const std::string& format) {
  const auto curve = enttrade::tradeoff_curve(dim, points);
  std::string payload;
  if (format == "csv") {
    payload = "a,b,F,G,I,D\n";
    for (const auto& pt : curve)
      payload += fmt12(pt.a) + "," + fmt12(pt.b) + "," + fmt12(pt.F) + "," +
                 fmt12(pt.G) + "," + fmt12(pt.I) + "," + fmt12(pt.D) + "\n";
  } else {
    ordered_json rows = ordered_json::array();
    for (const auto& pt : curve) {
      ordered_json row;
      row["a"] = pt.a;
      row["b"] = pt.b;
      row["F"] = pt.F;
      row["G"] = pt.G;
      row["I"] = pt.I;
      row["D"] = pt.D;
      rows.push_back(row);
    }
    payload = rows.dump(2) + "\n";
  }
  if (!write_output(out, payload)) {
    std::cerr << "error: cannot write to '" << out << "'\n";
    return kExitUsage;
  }
  return kExitOk;
}

//----------------------------------------------------------------------------
// mc
//----------------------------------------------------------------------------

int run_mc(enttrade::Index dim, double a, std::size_t samples,
           std::uint64_t seed, int jobs, const std::string& out) {
  const enttrade::OptimalParams params(a, dim);
  const auto instr = enttrade::optimal_discrete_instrument(params);
  const auto est =
      enttrade::mc_fidelities(instr, samples, {seed, 0}, jobs);
  const double f_closed = enttrade::closed_form_F(a, dim);
  const double g_closed = enttrade::closed_form_G(a, dim);
  const double sig_f = sigma_distance(est.F.value, f_closed, est.F.stderr);
  const double sig_g = sigma_distance(est.G.value, g_closed, est.G.stderr);

  ordered_json report;
  report["a"] = a;
  report["b"] = params.b;
  report["F_closed"] = f_closed;
  report["G_closed"] = g_closed;
  report["F_mc"] = est.F.value;
  report["F_stderr"] = est.F.stderr;
  report["G_mc"] = est.G.value;
  report["G_stderr"] = est.G.stderr;
  report["sigmas_F"] = sig_f;
  report["sigmas_G"] = sig_g;
  report["samples"] = samples;
  report["seed"] = seed;
  if (!write_output(out, report.dump(2) + "\n")) {
    std::cerr << "error: cannot write to '" << out << "'\n";
    return kExitUsage;
  }
  return (sig_f <= 4.0 && sig_g <= 4.0) ? kExitOk : kExitCheckFailed;
}

//----------------------------------------------------------------------------
// optimize
//----------------------------------------------------------------------------

int run_optimize(enttrade::Index dim, double p, const std::string& out) {
  const auto result = enttrade::optimize(p, dim);
  const auto res = enttrade::tradeoff_residuals(result.point.F,
                                                result.point.G, dim);
  ordered_json report;
  report["p"] = p;
  report["x"] = result.chi.x;
  report["y"] = result.chi.y;
  report["a"] = result.point.a;
  report["b"] = result.point.b;
  report["F"] = result.point.F;
  report["G"] = result.point.G;
  report["I"] = result.point.I;
  report["D"] = result.point.D;
  report["lambda_max"] = result.lambda_max;
  report["form_residual"] = result.form_residual;
  report["gf_residual"] = res.gf;
  report["degenerate"] = result.degenerate;
  if (!write_output(out, report.dump(2) + "\n")) {
    std::cerr << "error: cannot write to '" << out << "'\n";
    return kExitUsage;
  }
  return kExitOk;
}

//----------------------------------------------------------------------------
// verify
//----------------------------------------------------------------------------

struct CheckSink {
  ordered_json report;
  bool all_pass = true;

  void add(const std::string& name, double value, bool pass) {
    report[name] = value;
    report[name + "_pass"] = pass;
    all_pass = all_pass && pass;
  }
};

int run_verify(enttrade::Index dim, std::size_t samples, std::uint64_t seed,
               double p, int jobs, const std::string& out) {
  using namespace enttrade;
  CheckSink sink;
  sink.report["dim"] = dim;
  sink.report["seed"] = seed;
  sink.report["samples"] = samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_matrix = [&](Index n) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) m(i, j) = Complex(gauss(rng), gauss(rng));
    return m;
  };

  // Operator-vector isomorphism identities.
  {
    double roundtrip = 0.0, eq5 = 0.0, ptrace = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      const Matrix a = random_matrix(dim);
      const Matrix b = random_matrix(dim);
      const Matrix c = random_matrix(dim);
      roundtrip = std::max(
          roundtrip, max_abs(Matrix(devectorize(vectorize(a), dim) - a)));
      eq5 = std::max(eq5, max_abs(Matrix(devectorize(
                              Vector(kron(a, b) * vectorize(c)), dim) -
                          a * c * b.transpose())));
      const Matrix dyad = vectorize(a) * vectorize(b).adjoint();
      const SubsystemSpec spec2 = SubsystemSpec::uniform(dim, 2);
      ptrace = std::max(
          ptrace, max_abs(Matrix(partial_trace(dyad, spec2, {1}) -
                                 a.transpose() * b.conjugate())));
      ptrace = std::max(ptrace, max_abs(Matrix(partial_trace(dyad, spec2, {2}) -
                                               a * b.adjoint())));
    }
    sink.add("vectorize_roundtrip_err", roundtrip, roundtrip <= 1e-12);
    sink.add("vec_kron_identity_err", eq5, eq5 <= 1e-10);
    sink.add("ptrace_identity_err", ptrace, ptrace <= 1e-10);
  }

  // Weyl basis orthogonality and POVM validity of the optimal family.
  {
    const auto basis = weyl_basis(dim);
    double ortho = 0.0;
    for (std::size_t r = 0; r < basis.size(); ++r)
      for (std::size_t s = 0; s < basis.size(); ++s) {
        const Complex ip = hs_inner(basis[r], basis[s]);
        const double expected = r == s ? static_cast<double>(dim) : 0.0;
        ortho = std::max(ortho, std::abs(ip - expected));
      }
    sink.add("weyl_orthogonality_err", ortho, ortho <= 1e-12);

    double completeness = 0.0;
    double min_eig = 0.0;
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto instr = optimal_discrete_instrument(OptimalParams(a, dim));
      completeness = std::max(completeness, instr.completeness_residual());
      for (std::size_t r = 0; r < instr.outcomes.size(); ++r) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(instr.povm_element(r),
                                                 Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      }
    }
    sink.add("povm_completeness_err", completeness, completeness <= 1e-10);
    sink.add("povm_min_eigenvalue", min_eig, min_eig >= -1e-10);
  }

  // Twirl identities by Monte Carlo.
  {
    Matrix x0 = Matrix::Zero(dim, dim);
    x0(0, 0) = 1.0;
    auto est = mc_average(
        [&](const Matrix& u) { return Matrix(u * x0 * u.adjoint()); }, dim,
        samples, {seed, 1}, jobs);
    double worst = 0.0;
    const Matrix expected =
        Matrix::Identity(dim, dim) / static_cast<double>(dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        worst = std::max(worst, std::abs(est.mean(i, j) - expected(i, j)) /
                                    (est.stderr_entries(i, j) + 1e-12));
    sink.add("twirl_irreducible_sigma", worst, worst <= 3.0);

    const Matrix y = random_matrix(dim * dim);
    const Matrix ibb =
        vectorize(Matrix::Identity(dim, dim)) *
        vectorize(Matrix::Identity(dim, dim)).adjoint();
    const double dd = static_cast<double>(dim);
    const Matrix eye = Matrix::Identity(dim * dim, dim * dim);
    const Matrix expected2 =
        (hs_inner(ibb, y) / dd) * (ibb / dd) +
        ((y.trace() - hs_inner(ibb, y) / dd) *
         (eye - ibb / dd) / (dd * dd - 1.0));
    auto est2 = mc_average(
        [&](const Matrix& u) {
          const Matrix w = kron(u, u.conjugate());
          return Matrix(w * y * w.adjoint());
        },
        dim, samples, {seed, 2}, jobs);
    double worst2 = 0.0;
    for (Index i = 0; i < est2.mean.rows(); ++i)
      for (Index j = 0; j < est2.mean.cols(); ++j)
        worst2 = std::max(worst2, std::abs(est2.mean(i, j) - expected2(i, j)) /
                                      (est2.stderr_entries(i, j) + 1e-12));
    sink.add("twirl_reducible_sigma", worst2, worst2 <= 3.0);
  }

  // R_F / R_G structure (dense up to d = 5).
  if (dim <= 5) {
    const auto rf = build_RF(dim);
    const auto rg = build_RG(dim);
    sink.add("rf_trace_err", std::abs(rf.matrix.trace().real() - 1.0),
             std::abs(rf.matrix.trace().real() - 1.0) <= 1e-12);
    sink.add("rg_trace_err", std::abs(rg.matrix.trace().real() - 1.0),
             std::abs(rg.matrix.trace().real() - 1.0) <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> ef(rf.matrix,
                                             Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> eg(rg.matrix,
                                             Eigen::EigenvaluesOnly);
    sink.add("rf_min_eigenvalue", ef.eigenvalues().minCoeff(),
             ef.eigenvalues().minCoeff() >= -1e-10);
    sink.add("rg_min_eigenvalue", eg.eigenvalues().minCoeff(),
             eg.eigenvalues().minCoeff() >= -1e-10);
  }

  // Optimal eigenvector form over a p grid.
  {
    double worst_form = 0.0;
    double worst_gf = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const auto r = optimize(0.1 * k, dim);
      worst_form = std::max(worst_form, r.form_residual);
      const auto res = tradeoff_residuals(r.point.F, r.point.G, dim);
      worst_gf = std::max(worst_gf, std::abs(res.gf));
    }
    sink.add("eigenvector_form_residual", worst_form, worst_form <= 1e-8);
    sink.add("optimizer_gf_residual", worst_gf, worst_gf <= 1e-8);
  }
  if (dim > kDenseChoiMaxD) {
    double worst = 0.0;
    for (double pp : {0.2, 0.5, 0.8})
      worst = std::max(worst, confirm_top_eigenvalue(pp, dim));
    sink.add("top_eigenvalue_power_err", worst, worst <= 1e-9);
  }

  // Analytic tradeoff curve identities.
  {
    double worst = 0.0;
    double worst_fg = 0.0;
    for (const auto& pt : tradeoff_curve(dim, 101)) {
      const auto res = tradeoff_residuals(pt.F, pt.G, dim);
      worst = std::max({worst, std::abs(res.gf), std::abs(res.quad)});
      worst_fg = std::max(worst_fg,
                          std::abs(tradeoff_residual_fg(pt.F, pt.G, dim)));
    }
    sink.add("tradeoff_residual_max", worst, worst <= 1e-10);
    sink.add("tradeoff_fg_equivalence", worst_fg, worst_fg <= 1e-9);
  }

  // Trace-preservation of the optimizer output at the requested p.
  {
    const auto r = optimize(p, dim);
    const auto tp = verify_tp_rank_one(
        r.chi, std::min<std::size_t>(samples, 2000), {seed, 3}, jobs);
    sink.add("tp_tr134_err", tp.tr134_residual, tp.tr134_residual <= 1e-9);
    sink.add("tp_trace_err", tp.trace_residual, tp.trace_residual <= 1e-9);
    sink.add("tp_mc34_max_dev", tp.mc34_max_dev, tp.mc34_ok);
  }

  // Choi pairing against the closed forms.
  {
    double worst = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const double a = 0.1 * k;
      const ChiVector chi{a, b_from_a(a, dim), dim};
      const Vector psi = chi_to_vector(chi);
      const double scale =
          static_cast<double>(dim * dim) / chi.norm2();
      const double f_pair = scale * psi.dot(apply_RF(psi, dim)).real();
      const double g_pair = scale * psi.dot(apply_RG(psi, dim)).real();
      worst = std::max({worst, std::abs(f_pair - closed_form_F(a, dim)),
                        std::abs(g_pair - closed_form_G(a, dim))});
    }
    sink.add("choi_pairing_err", worst, worst <= 1e-10);
  }

  sink.report["all_pass"] = sink.all_pass;
  if (!write_output(out, sink.report.dump(2) + "\n")) {
    std::cerr << "error: cannot write to '" << out << "'\n";
    return kExitUsage;
  }
  return sink.all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Optimal information-disturbance tradeoff for estimating an unknown "
      "maximally entangled state: closed forms, Monte-Carlo cross-checks and "
      "the covariant-instrument optimizer."};
  app.require_subcommand(1);

  int dim = 2;
  int points = 101;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  double p = 0.5;
  double a = 0.5;
  int jobs = 1;
  std::string out = "-";
  std::string format = "csv";

  auto* curve = app.add_subcommand("curve", "Sweep the optimal tradeoff curve");
  curve->add_option("--dim", dim, "Subsystem dimension d")
      ->check(CLI::Range(2, 32));
  curve->add_option("--points", points, "Number of sweep points")
      ->check(CLI::Range(2, 1000000));
  curve->add_option("--out", out, "Output path ('-' for stdout)");
  curve->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* verify = app.add_subcommand("verify", "Run the verification battery");
  verify->add_option("--dim", dim, "Subsystem dimension d")
      ->check(CLI::Range(2, 32));
  verify->add_option("--samples", samples, "Monte-Carlo sample count")
      ->check(CLI::Range(static_cast<std::size_t>(100),
                         static_cast<std::size_t>(100000000)));
  verify->add_option("--seed", seed, "RNG seed")->required();
  verify->add_option("--p", p, "Convex weight for the TP check")
      ->check(CLI::Range(0.0, 1.0));
  verify->add_option("--jobs", jobs, "Worker threads (does not change results)")
      ->check(CLI::Range(1, 256));
  verify->add_option("--out", out, "Output path ('-' for stdout)");

  auto* mc = app.add_subcommand(
      "mc", "Monte-Carlo fidelities of the optimal discrete instrument");
  mc->add_option("--dim", dim, "Subsystem dimension d")
      ->check(CLI::Range(2, 32));
  mc->add_option("--a", a, "Measurement-strength parameter")
      ->check(CLI::Range(0.0, 1.0));
  mc->add_option("--samples", samples, "Monte-Carlo sample count")
      ->check(CLI::Range(static_cast<std::size_t>(100),
                         static_cast<std::size_t>(100000000)));
  mc->add_option("--seed", seed, "RNG seed")->required();
  mc->add_option("--jobs", jobs, "Worker threads (does not change results)")
      ->check(CLI::Range(1, 256));
  mc->add_option("--out", out, "Output path ('-' for stdout)");

  auto* opt = app.add_subcommand(
      "optimize", "Maximize p G + (1-p) F over covariant instruments");
  opt->add_option("--dim", dim, "Subsystem dimension d")
      ->check(CLI::Range(2, 32));
  opt->add_option("--p", p, "Convex weight")->check(CLI::Range(0.0, 1.0));
  opt->add_option("--out", out, "Output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(curve)) return run_curve(dim, points, out, format);
    if (app.got_subcommand(verify))
      return run_verify(dim, samples, seed, p, jobs, out);
    if (app.got_subcommand(mc)) return run_mc(dim, a, samples, seed, jobs, out);
    if (app.got_subcommand(opt)) return run_optimize(dim, p, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
