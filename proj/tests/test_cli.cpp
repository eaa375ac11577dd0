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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_helpers.hpp"

using testutil::cli_path;
using testutil::run_command;

namespace {

std::vector<std::vector<double>> parse_csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli curve: csv schema and endpoint rows", "[cli]") {
  const auto res = run_command(cli_path() + " curve --dim 2 --points 3");
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.rfind("a,b,F,G,I,D\n", 0) == 0);
  CHECK(res.output.find("\n0,1,1,0.25,0,0\n") != std::string::npos);
  CHECK(res.output.back() == '\n');

  const auto rows = parse_csv_rows(res.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == Catch::Approx(0.5));
  CHECK(rows[1][4] == Catch::Approx(0.5756939094329987).epsilon(1e-11));
  CHECK(rows[1][5] == Catch::Approx(0.25).margin(1e-12));
  CHECK(rows[2][2] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("cli curve: d = 4 Bell endpoint", "[cli]") {
  const auto res = run_command(cli_path() + " curve --dim 4 --points 5");
  REQUIRE(res.exit_code == 0);
  const auto rows = parse_csv_rows(res.output);
  REQUIRE(rows.size() == 5);
  CHECK(rows.back()[2] == Catch::Approx(0.125).margin(1e-12));
  CHECK(rows.back()[3] == Catch::Approx(0.125).margin(1e-12));
}

TEST_CASE("cli curve: byte-identical reruns and file output", "[cli]") {
  const auto once = run_command(cli_path() + " curve --dim 3 --points 11");
  const auto twice = run_command(cli_path() + " curve --dim 3 --points 11");
  REQUIRE(once.exit_code == 0);
  CHECK(once.output == twice.output);

  const auto path =
      std::filesystem::temp_directory_path() / "enttrade_cli_curve.csv";
  const auto to_file = run_command(cli_path() + " curve --dim 3 --points 11 --out " +
                                   path.string());
  REQUIRE(to_file.exit_code == 0);
  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == once.output);
  std::filesystem::remove(path);

  const auto bad = run_command(cli_path() +
                               " curve --dim 3 --out /nonexistent-dir/x.csv");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("cli curve: json format", "[cli]") {
  const auto res =
      run_command(cli_path() + " curve --dim 2 --points 3 --format json");
  REQUIRE(res.exit_code == 0);
  const auto rows = nlohmann::json::parse(res.output);
  REQUIRE(rows.is_array());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["F"].get<double>() == 1.0);
  CHECK(rows[2]["I"].get<double>() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cli: usage errors exit with 2", "[cli]") {
  CHECK(run_command(cli_path() + " curve --dim 1").exit_code == 2);
  CHECK(run_command(cli_path() + " mc --dim 2 --a 0.5").exit_code == 2);
  CHECK(run_command(cli_path() + " optimize --p 1.5").exit_code == 2);
  CHECK(run_command(cli_path() + " nonsense").exit_code == 2);
  CHECK(run_command(cli_path() + " mc --a 2.0 --seed 1").exit_code == 2);
}

TEST_CASE("cli mc: matches closed forms and reports sigmas", "[cli]") {
  const auto res = run_command(
      cli_path() + " mc --dim 2 --a 1 --samples 20000 --seed 7");
  REQUIRE(res.exit_code == 0);
  const auto report = nlohmann::json::parse(res.output);
  CHECK(report["F_closed"].get<double>() == Catch::Approx(0.5));
  CHECK(report["G_closed"].get<double>() == Catch::Approx(0.5));
  CHECK(std::abs(report["F_mc"].get<double>() - 0.5) <=
        3.0 * report["F_stderr"].get<double>());
  CHECK(report["sigmas_F"].get<double>() <= 4.0);
  CHECK(report["sigmas_G"].get<double>() <= 4.0);
}

TEST_CASE("cli mc: a = 0 is exact in F", "[cli]") {
  const auto res = run_command(
      cli_path() + " mc --dim 2 --a 0 --samples 1000 --seed 5");
  REQUIRE(res.exit_code == 0);
  const auto report = nlohmann::json::parse(res.output);
  CHECK(report["F_mc"].get<double>() == 1.0);
  CHECK(report["F_stderr"].get<double>() == 0.0);
  CHECK(std::abs(report["G_mc"].get<double>() - 0.25) <=
        3.0 * report["G_stderr"].get<double>());
}

TEST_CASE("cli mc: d = 3 interior point", "[cli]") {
  const auto res = run_command(
      cli_path() + " mc --dim 3 --a 0.5 --samples 20000 --seed 11");
  REQUIRE(res.exit_code == 0);
  const auto report = nlohmann::json::parse(res.output);
  CHECK(report["sigmas_F"].get<double>() <= 4.0);
  CHECK(report["sigmas_G"].get<double>() <= 4.0);
}

TEST_CASE("cli optimize: endpoints and interior", "[cli]") {
  {
    const auto res = run_command(cli_path() + " optimize --dim 2 --p 0");
    REQUIRE(res.exit_code == 0);
    const auto r = nlohmann::json::parse(res.output);
    CHECK(std::abs(r["a"].get<double>()) <= 1e-8);
    CHECK(r["F"].get<double>() == Catch::Approx(1.0).margin(1e-10));
    CHECK(r["G"].get<double>() == Catch::Approx(0.25).margin(1e-10));
  }
  {
    const auto res = run_command(cli_path() + " optimize --dim 2 --p 1");
    REQUIRE(res.exit_code == 0);
    const auto r = nlohmann::json::parse(res.output);
    CHECK(r["F"].get<double>() == Catch::Approx(0.5).margin(1e-9));
    CHECK(r["G"].get<double>() == Catch::Approx(0.5).margin(1e-9));
  }
  {
    const auto res = run_command(cli_path() + " optimize --dim 2 --p 0.5");
    REQUIRE(res.exit_code == 0);
    const auto r = nlohmann::json::parse(res.output);
    CHECK(std::abs(r["gf_residual"].get<double>()) <= 1e-8);
    CHECK(r["form_residual"].get<double>() <= 1e-8);
  }
}

TEST_CASE("cli verify: passes at d = 2 and d = 3", "[cli][mc]") {
  for (int dim : {2, 3}) {
    const auto res = run_command(
        cli_path() + " verify --dim " + std::to_string(dim) +
        " --samples 20000 --seed 42");
    INFO(res.output);
    REQUIRE(res.exit_code == 0);
    const auto report = nlohmann::json::parse(res.output);
    CHECK(report["all_pass"].get<bool>());
    CHECK(report["eigenvector_form_residual"].get<double>() <= 1e-8);
    CHECK(report["tradeoff_residual_max"].get<double>() <= 1e-10);
  }
}

TEST_CASE("cli verify: requires a seed", "[cli]") {
  CHECK(run_command(cli_path() + " verify --dim 2").exit_code == 2);
}
