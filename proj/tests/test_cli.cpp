// Copyright 2026 The qnc authors
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
#include <cstdio>
#include <fstream>

#include "qnc/cli.hpp"

using namespace qnc;

namespace {

std::string write_temp(const std::string& name, const nlohmann::json& j) {
  const std::string path = "/tmp/qnc_test_" + name;
  std::ofstream out(path);
  out << j.dump();
  return path;
}

}  // namespace

TEST_CASE("kc command reports the canonical data") {
  cli::Options opt;
  const std::string swap_file = write_temp("swap.json", matrix_to_json(swap_gate()));
  const cli::CommandResult res = cli::cmd_kc(swap_file, opt);
  REQUIRE(res.exit_code == cli::kExitPass);
  REQUIRE(res.report["kc"].get<int>() == 3);
  REQUIRE(res.report["op_rank"].get<int>() == 4);
  REQUIRE(res.report["reconstruction_residual"].get<double>() < 1e-9);

  const cli::CommandResult ident = cli::cmd_kc("builtin:identity", opt);
  REQUIRE(ident.report["kc"].get<int>() == 0);

  const cli::CommandResult haar = cli::cmd_kc("builtin:haar", opt);
  REQUIRE(haar.exit_code == cli::kExitPass);
  REQUIRE(haar.report["reconstruction_residual"].get<double>() < 1e-9);

  // Non-unitary input is an input error.
  nlohmann::json bad = matrix_to_json(Mat(2.0 * Mat::Identity(4, 4)));
  const cli::CommandResult err = cli::cmd_kc(write_temp("bad.json", bad), opt);
  REQUIRE(err.exit_code == cli::kExitInputError);
}

TEST_CASE("verify command accepts butterfly swap and refuses ladder swap") {
  cli::Options opt;
  opt.seed = 7;
  const cli::CommandResult ok = cli::cmd_verify("butterfly", "builtin:swap", opt);
  REQUIRE(ok.exit_code == cli::kExitPass);
  REQUIRE(ok.report["verdict"].get<std::string>() == "implementable");
  REQUIRE(ok.report["min_fidelity"].get<double>() >= 1.0 - 1e-9);
  REQUIRE(ok.report["consumed_edges"].size() == 7);

  const cli::CommandResult refusal =
      cli::cmd_verify("ladder:2", "builtin:swap", opt);
  REQUIRE(refusal.exit_code == cli::kExitFail);
  REQUIRE(refusal.report["verdict"].get<std::string>() == "refused");
  REQUIRE(refusal.report["kc_number"].get<int>() == 3);

  const cli::CommandResult grail_ok =
      cli::cmd_verify("grail", "builtin:identity", opt);
  REQUIRE(grail_ok.exit_code == cli::kExitPass);

  const cli::CommandResult wide = cli::cmd_verify("cluster:3,2", "builtin:swap", opt);
  REQUIRE(wide.exit_code == cli::kExitFail);
  REQUIRE(wide.report["verdict"].get<std::string>() == "refused");

  const cli::CommandResult bad = cli::cmd_verify("ring", "builtin:swap", opt);
  REQUIRE(bad.exit_code == cli::kExitInputError);
}

TEST_CASE("verify reports are byte-identical for a fixed seed") {
  cli::Options opt;
  opt.seed = 42;
  const cli::CommandResult a = cli::cmd_verify("ladder:3", "builtin:swap", opt);
  const cli::CommandResult b = cli::cmd_verify("ladder:3", "builtin:swap", opt);
  REQUIRE(a.report.dump() == b.report.dump());
  REQUIRE(cli::render(a, opt) == cli::render(b, opt));
  opt.seed = 43;
  const cli::CommandResult c = cli::cmd_verify("ladder:3", "builtin:swap", opt);
  REQUIRE(a.report.dump() != c.report.dump());
}

TEST_CASE("scan command flags nothing on the default and small grids") {
  cli::Options opt;
  nlohmann::json small{{"magnitudes", {0.0, 0.5}}, {"phases", {0.0, kPi / 2}}};
  const cli::CommandResult res =
      cli::cmd_scan_fourqubit(write_temp("grid.json", small), opt);
  REQUIRE(res.exit_code == cli::kExitPass);
  REQUIRE(res.report["forbidden_count"].get<int>() == 0);

  nlohmann::json only7{{"families", {7}}};
  const cli::CommandResult f7 =
      cli::cmd_scan_fourqubit(write_temp("grid7.json", only7), opt);
  REQUIRE(f7.exit_code == cli::kExitPass);
  REQUIRE(f7.report["histogram"]["family_7"]["3,3,3"].get<int>() == 1);
  REQUIRE(f7.report["total_points"].get<int>() == 1);

  nlohmann::json empty{{"families", nlohmann::json::array()}};
  const cli::CommandResult none =
      cli::cmd_scan_fourqubit(write_temp("grid0.json", empty), opt);
  REQUIRE(none.exit_code == cli::kExitPass);
  REQUIRE(none.report["total_points"].get<int>() == 0);

  nlohmann::json bad{{"families", {0}}};
  REQUIRE(cli::cmd_scan_fourqubit(write_temp("gridbad.json", bad), opt)
              .exit_code == cli::kExitInputError);
}

TEST_CASE("trace command checks all steps against the closed forms") {
  cli::Options opt;
  const cli::CommandResult res = cli::cmd_trace(0.3, 0.2, 0.1, 0, opt);
  REQUIRE(res.exit_code == cli::kExitPass);
  REQUIRE(res.report["all_match"].get<bool>());

  const cli::CommandResult flat = cli::cmd_trace(0, 0, 0, 2, opt);
  REQUIRE(flat.exit_code == cli::kExitPass);
  REQUIRE(flat.report["eigenvalue_re"].get<double>() ==
          Catch::Approx(1.0).margin(1e-12));

  const cli::CommandResult l3 = cli::cmd_trace(kPi / 4, kPi / 4, kPi / 4, 3, opt);
  REQUIRE(l3.exit_code == cli::kExitPass);
  const Complex expect = std::exp(Complex(0, -3 * kPi / 4));
  REQUIRE(l3.report["eigenvalue_re"].get<double>() ==
          Catch::Approx(expect.real()).margin(1e-12));
  REQUIRE(l3.report["eigenvalue_im"].get<double>() ==
          Catch::Approx(expect.imag()).margin(1e-12));

  REQUIRE(cli::cmd_trace(0, 0, 0, 7, opt).exit_code == cli::kExitInputError);
}

TEST_CASE("convert command validates and rewrites circuits") {
  cli::Options opt;
  Rng rng(151);
  const ConvertedCircuit circuit = random_circuit(rng, 3, 2, 4, true);
  const std::string path = write_temp("circuit.json", circuit_to_json(circuit));
  const cli::CommandResult res = cli::cmd_convert(path, "/tmp/qnc_test_c.dot", opt);
  REQUIRE(res.exit_code == cli::kExitPass);
  REQUIRE(res.report["verdict"].get<std::string>() == "valid");
  REQUIRE(res.report["standard_form_residual"].get<double>() < 1e-9);
  std::ifstream dot("/tmp/qnc_test_c.dot");
  REQUIRE(dot.good());

  // An illegal circuit is a verification failure with a named rule.
  ConvertedCircuit bad;
  bad.wires = 3;
  CircuitColumn col;
  col.gates.push_back({2, 2, 1, {pauli_i(), pauli_x()}});
  col.gates.push_back({3, 3, 2, {pauli_i(), pauli_x()}});
  col.gates.push_back({2, 2, 1, {pauli_i(), pauli_z()}});
  bad.columns.push_back(col);
  const cli::CommandResult rej =
      cli::cmd_convert(write_temp("bad_circuit.json", circuit_to_json(bad)), "", opt);
  REQUIRE(rej.exit_code == cli::kExitFail);
  REQUIRE(rej.report["violations"].size() >= 1);
}

TEST_CASE("simulate command runs protocol files end to end") {
  cli::Options opt;
  opt.seed = 5;
  const ButterflyProgram prog = butterfly_protocol(0.4, 0.2, 0.1);
  const std::string path =
      write_temp("protocol.json", protocol_to_json(prog.protocol));
  const std::string target =
      write_temp("target.json", matrix_to_json(prog.target));
  const cli::CommandResult res = cli::cmd_simulate(path, "random", target, opt);
  REQUIRE(res.exit_code == cli::kExitPass);
  REQUIRE(res.report["min_fidelity"].get<double>() >= 1.0 - 1e-9);
  REQUIRE(res.report["total_probability"].get<double>() ==
          Catch::Approx(1.0).margin(1e-9));

  const cli::CommandResult no_target = cli::cmd_simulate(path, "random", "", opt);
  REQUIRE(no_target.exit_code == cli::kExitPass);
  REQUIRE(no_target.report["verdict"].get<std::string>() == "simulated");

  REQUIRE(cli::cmd_simulate("/nonexistent.json", "random", "", opt).exit_code ==
          cli::kExitInputError);
}
