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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "qnc/cli.hpp"

using namespace qnc;

namespace {

int finish(const cli::CommandResult& res, const cli::Options& opt) {
  const std::string rendered = cli::render(res, opt);
  if (!opt.out.empty()) {
    std::ofstream out(opt.out);
    if (!out) {
      std::cerr << "cannot write '" << opt.out << "'\n";
      return cli::kExitInputError;
    }
    out << rendered;
  }
  std::cout << rendered;
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network coding toolkit for distributed quantum computation"};
  app.require_subcommand(1);

  cli::Options opt;
  app.add_option("--seed", opt.seed, "random seed for generated inputs");
  app.add_option("--tol", opt.tol, "fidelity tolerance for verdicts");
  app.add_option("--out", opt.out, "write the report to this file");
  app.add_option("--format", opt.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string unitary = "builtin:identity";
  std::string network = "butterfly";
  std::string grid_file, circuit_file, dot_file, protocol_file;
  std::string input_source = "random", target_source;
  double x = 0, y = 0, z = 0;
  int eigen_index = 0;

  CLI::App* kc = app.add_subcommand(
      "kc", "canonical two-qubit form, parameter count and operator rank");
  kc->add_option("--in,--unitary", unitary,
                 "matrix JSON file or builtin:<name>")
      ->required();

  CLI::App* verify = app.add_subcommand(
      "verify", "compile and branch-exactly verify a protocol for a network");
  verify->add_option("--network", network,
                     "butterfly | grail | ladder:N | cluster:k,N")
      ->required();
  verify->add_option("--unitary", unitary, "matrix JSON file or builtin:<name>")
      ->required();

  CLI::App* scan = app.add_subcommand(
      "scan-fourqubit", "grid scan of the nine four-qubit families");
  scan->add_option("--grid", grid_file, "grid JSON file (optional)");

  CLI::App* trace = app.add_subcommand(
      "trace", "step trace of the butterfly circuit against closed forms");
  trace->add_option("--x", x, "first canonical parameter")->required();
  trace->add_option("--y", y, "second canonical parameter")->required();
  trace->add_option("--z", z, "third canonical parameter")->required();
  trace->add_option("--eigenvector,-j", eigen_index, "Bell eigenvector 0..3")
      ->required();

  CLI::App* convert = app.add_subcommand(
      "convert", "validate a converted circuit and its standard form");
  convert->add_option("--circuit", circuit_file, "circuit JSON file")
      ->required();
  convert->add_option("--dot", dot_file, "write a DOT diagram here");

  CLI::App* simulate =
      app.add_subcommand("simulate", "run a raw protocol file branch-exactly");
  simulate->add_option("--protocol", protocol_file, "protocol JSON file")
      ->required();
  simulate->add_option("--input", input_source,
                       "state JSON file or 'random' (seeded)");
  simulate->add_option("--target", target_source,
                       "optional target unitary for fidelity checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (kc->parsed()) return finish(cli::cmd_kc(unitary, opt), opt);
    if (verify->parsed())
      return finish(cli::cmd_verify(network, unitary, opt), opt);
    if (scan->parsed())
      return finish(cli::cmd_scan_fourqubit(grid_file, opt), opt);
    if (trace->parsed())
      return finish(cli::cmd_trace(x, y, z, eigen_index, opt), opt);
    if (convert->parsed())
      return finish(cli::cmd_convert(circuit_file, dot_file, opt), opt);
    if (simulate->parsed())
      return finish(
          cli::cmd_simulate(protocol_file, input_source, target_source, opt),
          opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInputError;
  }
  return cli::kExitInputError;
}
