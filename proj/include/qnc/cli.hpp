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

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qnc/convert.hpp"
#include "qnc/decompositions.hpp"
#include "qnc/implementability.hpp"
#include "qnc/linalg.hpp"
#include "qnc/locc.hpp"
#include "qnc/network.hpp"
#include "qnc/protocols.hpp"

namespace qnc::cli {

// Exit code contract: 0 = all checks pass, 1 = verification failure,
// 2 = input error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInputError = 2;

struct Options {
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::string format = "text";  // "text" | "json"
  std::string out;              // optional output path
};

struct CommandResult {
  int exit_code = kExitPass;
  nlohmann::json report;
};

// Plain text mirrors the JSON report key for key.
inline void render_text(const nlohmann::json& j, std::ostream& os,
                        const std::string& prefix = "") {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object() || value.is_array()) {
        os << prefix << key << ":\n";
        render_text(value, os, prefix + "  ");
      } else {
        os << prefix << key << ": " << value.dump() << "\n";
      }
    }
  } else if (j.is_array()) {
    int idx = 0;
    for (const auto& value : j) {
      if (value.is_object() || value.is_array()) {
        os << prefix << "- [" << idx << "]\n";
        render_text(value, os, prefix + "  ");
      } else {
        os << prefix << "- " << value.dump() << "\n";
      }
      ++idx;
    }
  } else {
    os << prefix << j.dump() << "\n";
  }
}

inline std::string render(const CommandResult& res, const Options& opt) {
  if (opt.format == "json") return res.report.dump(2) + "\n";
  std::ostringstream os;
  render_text(res.report, os);
  return os.str();
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw QncError("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return j;
}

// Unitary sources: a JSON matrix file, or builtin:swap | builtin:cnot |
// builtin:identity | builtin:uglobal:x,y,z | builtin:haar (seeded).
inline Mat load_unitary(const std::string& source, const Options& opt) {
  if (source.rfind("builtin:", 0) == 0) {
    const std::string name = source.substr(8);
    if (name == "swap") return swap_gate();
    if (name == "cnot") return cnot();
    if (name == "identity") return Mat::Identity(4, 4);
    if (name == "haar") {
      Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ull);
      return rng.haar_unitary(4);
    }
    if (name.rfind("uglobal:", 0) == 0) {
      std::istringstream ss(name.substr(8));
      double x = 0, y = 0, z = 0;
      char comma = 0;
      if (!(ss >> x >> comma >> y >> comma >> z))
        throw QncError("builtin:uglobal needs x,y,z");
      return canonical_gate(x, y, z);
    }
    throw QncError("unknown builtin unitary '" + name + "'");
  }
  return matrix_from_json(load_json_file(source));
}

namespace detail {

inline nlohmann::json branch_to_json(const Branch& br, const Vec* reference) {
  nlohmann::json j;
  nlohmann::json outcomes;
  for (const auto& [var, bit] : br.outcomes) outcomes[var] = bit;
  for (const std::string& var : br.free_vars) outcomes[var] = "*";
  j["outcomes"] = outcomes;
  j["assignments"] = br.multiplicity();
  j["probability"] = br.probability();
  if (reference != nullptr)
    j["fidelity"] = state_fidelity(br.state.amplitudes(), *reference);
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// kc: canonical form, parameter count and operator Schmidt rank of a
// two-qubit unitary.

inline CommandResult cmd_kc(const std::string& unitary_source,
                            const Options& opt) {
  CommandResult res;
  Mat u;
  try {
    u = load_unitary(unitary_source, opt);
    if (!is_unitary(u)) throw QncError("matrix is not unitary");
    if (u.rows() != 4) throw QncError("kc needs a 4x4 matrix");
  } catch (const std::exception& e) {
    res.exit_code = kExitInputError;
    res.report["error"] = e.what();
    return res;
  }
  const KrausCiracForm f = kraus_cirac(u);
  res.report = kraus_cirac_to_json(f);
  res.report["op_rank"] = operator_schmidt_rank(u);
  res.report["reconstruction_residual"] = max_abs(f.reconstruct() - u);
  return res;
}

// ---------------------------------------------------------------------------
// verify: compile the right protocol for a network and run it branch-exactly
// on basis inputs plus 20 seeded random inputs.

struct NetworkSpec {
  std::string kind;  // butterfly | grail | ladder | cluster
  int k = 0, n = 0;
};

inline NetworkSpec parse_network_spec(const std::string& s) {
  NetworkSpec spec;
  if (s == "butterfly") {
    spec.kind = "butterfly";
    return spec;
  }
  if (s == "grail") {
    spec.kind = "grail";
    return spec;
  }
  if (s.rfind("ladder:", 0) == 0) {
    spec.kind = "ladder";
    spec.k = 2;
    spec.n = std::stoi(s.substr(7));
    return spec;
  }
  if (s.rfind("cluster:", 0) == 0) {
    spec.kind = "cluster";
    std::istringstream ss(s.substr(8));
    char comma = 0;
    if (!(ss >> spec.k >> comma >> spec.n))
      throw QncError("cluster spec needs cluster:k,N");
    return spec;
  }
  throw QncError("unknown network '" + s +
                 "' (expect butterfly | grail | ladder:N | cluster:k,N)");
}

inline CommandResult cmd_verify(const std::string& network_spec,
                                const std::string& unitary_source,
                                const Options& opt) {
  CommandResult res;
  NetworkSpec spec;
  Mat u;
  try {
    spec = parse_network_spec(network_spec);
    u = load_unitary(unitary_source, opt);
    if (!is_unitary(u)) throw QncError("matrix is not unitary");
  } catch (const std::exception& e) {
    res.exit_code = kExitInputError;
    res.report["error"] = e.what();
    return res;
  }
  res.report["network"] = network_spec;
  res.report["seed"] = opt.seed;

  LoccProtocol protocol;
  if (spec.kind == "butterfly" || spec.kind == "grail" ||
      spec.kind == "ladder" || (spec.kind == "cluster" && spec.k == 2)) {
    if (u.rows() != 4) {
      res.exit_code = kExitInputError;
      res.report["error"] = "two-qubit networks need a 4x4 unitary";
      return res;
    }
    if (spec.kind == "butterfly") {
      protocol = implement_full_two_qubit(u);
    } else if (spec.kind == "grail") {
      protocol = grail_protocol(u);
    } else {
      const LadderResult lr = ladder_protocol(u, spec.n);
      res.report["kc_number"] = lr.kc_number;
      if (!lr.protocol) {
        res.exit_code = kExitFail;
        res.report["verdict"] = "refused";
        res.report["reason"] = lr.refusal;
        return res;
      }
      protocol = *lr.protocol;
    }
  } else {
    res.exit_code = kExitFail;
    res.report["verdict"] = "refused";
    res.report["reason"] =
        "no decision procedure for cluster networks with k >= 3; "
        "supply a converted circuit to the convert command instead";
    return res;
  }

  res.report["consumed_edges"] = protocol.consumed_edges;
  const ValidationReport vrep = validate(protocol);
  res.report["validation_ok"] = vrep.ok();

  std::vector<Qubit> reg;
  for (const auto& [label, node] : protocol.inputs) reg.push_back({label, node});
  std::vector<Vec> inputs;
  for (int b = 0; b < 4; ++b) inputs.push_back(Vec::Unit(4, b));
  Rng rng(opt.seed);
  for (int t = 0; t < 20; ++t) inputs.push_back(rng.random_state(4));

  double min_fidelity = 1.0;
  std::uint64_t branch_count = 0;
  nlohmann::json sample_branches = nlohmann::json::array();
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Vec want = u * inputs[t];
    const BranchSet out = execute(protocol, StateVector(reg, inputs[t]));
    branch_count = out.total_branches();
    for (const Branch& br : out.branches) {
      min_fidelity = std::min(
          min_fidelity, state_fidelity(br.state.amplitudes(), want));
      if (t == 4)  // first random input serves as the reported sample
        sample_branches.push_back(detail::branch_to_json(br, &want));
    }
  }
  res.report["inputs_tested"] = inputs.size();
  res.report["branch_count"] = branch_count;
  res.report["branches"] = sample_branches;
  res.report["min_fidelity"] = min_fidelity;
  const bool pass = min_fidelity >= 1.0 - opt.tol;
  res.report["verdict"] = pass ? "implementable" : "failed";
  res.exit_code = pass ? kExitPass : kExitFail;
  return res;
}

// ---------------------------------------------------------------------------
// scan-fourqubit: grid scan over the nine families.

inline CommandResult cmd_scan_fourqubit(const std::string& grid_file,
                                        const Options& opt) {
  (void)opt;
  CommandResult res;
  ScanGrid grid;
  try {
    if (!grid_file.empty()) {
      const nlohmann::json j = load_json_file(grid_file);
      if (j.contains("magnitudes"))
        grid.magnitudes = j.at("magnitudes").get<std::vector<double>>();
      if (j.contains("phases"))
        grid.phases = j.at("phases").get<std::vector<double>>();
      if (j.contains("families"))
        grid.families = j.at("families").get<std::vector<int>>();
      for (const int f : grid.families) family_parameter_count(f);
    }
  } catch (const std::exception& e) {
    res.exit_code = kExitInputError;
    res.report["error"] = e.what();
    return res;
  }
  const ScanReport rep = four_qubit_rank_scan(grid);
  res.report = scan_report_to_json(rep);
  res.exit_code = rep.clean() ? kExitPass : kExitFail;
  return res;
}

// ---------------------------------------------------------------------------
// trace: step states of the butterfly circuit against the closed forms.

inline CommandResult cmd_trace(double x, double y, double z, int eigen_index,
                               const Options& opt) {
  CommandResult res;
  if (eigen_index < 0 || eigen_index > 3) {
    res.exit_code = kExitInputError;
    res.report["error"] = "eigenvector index must be 0..3";
    return res;
  }
  const ButterflyTrace tr = butterfly_circuit_trace(x, y, z, eigen_index);
  const ButterflyTrace ref = butterfly_trace_reference(x, y, z, eigen_index);
  res.report["x"] = x;
  res.report["y"] = y;
  res.report["z"] = z;
  res.report["eigen_index"] = eigen_index;
  const Complex lambda = canonical_eigenvalue(x, y, z, eigen_index);
  res.report["eigenvalue_re"] = lambda.real();
  res.report["eigenvalue_im"] = lambda.imag();
  bool all_match = true;
  nlohmann::json steps = nlohmann::json::array();
  for (int s = 0; s < 6; ++s) {
    const double dev = max_abs(Mat(tr.after_step[static_cast<std::size_t>(s)] -
                                   ref.after_step[static_cast<std::size_t>(s)]));
    nlohmann::json js;
    js["step"] = s + 1;
    js["state"] = vector_to_json(tr.after_step[static_cast<std::size_t>(s)]);
    js["deviation_from_closed_form"] = dev;
    js["matches"] = dev <= 1e-10;
    all_match = all_match && dev <= 1e-10;
    steps.push_back(js);
  }
  for (int outcome = 0; outcome < 2; ++outcome) {
    nlohmann::json js;
    js["step"] = 7;
    js["outcome"] = outcome;
    js["probability"] = tr.probabilities[static_cast<std::size_t>(outcome)];
    const double dev = max_abs(Mat(tr.outputs[static_cast<std::size_t>(outcome)] -
                                   ref.outputs[static_cast<std::size_t>(outcome)]));
    js["deviation_from_closed_form"] = dev;
    const bool ok =
        dev <= 1e-10 &&
        std::abs(tr.probabilities[static_cast<std::size_t>(outcome)] - 0.5) <=
            1e-10;
    js["matches"] = ok;
    all_match = all_match && ok;
    steps.push_back(js);
  }
  res.report["steps"] = steps;
  res.report["all_match"] = all_match;
  res.exit_code = all_match ? kExitPass : kExitFail;
  (void)opt;
  return res;
}

// ---------------------------------------------------------------------------
// convert: validate a circuit file, report ranges and pair costs, and run
// the standard-form round trip (2 or 3 wires).

inline CommandResult cmd_convert(const std::string& circuit_file,
                                 const std::string& dot_out,
                                 const Options& opt) {
  CommandResult res;
  ConvertedCircuit circuit;
  try {
    circuit = circuit_from_json(load_json_file(circuit_file));
  } catch (const std::exception& e) {
    res.exit_code = kExitInputError;
    res.report["error"] = e.what();
    return res;
  }
  res.report["wires"] = circuit.wires;
  const SegmentCheck check = validate_circuit(circuit);
  nlohmann::json violations = nlohmann::json::array();
  for (const SegmentViolation& v : check.violations)
    violations.push_back({{"gate", v.gate_index}, {"rule", v.rule},
                          {"message", v.message}});
  res.report["violations"] = violations;
  if (!check.ok()) {
    res.report["verdict"] = "invalid";
    res.exit_code = kExitFail;
    return res;
  }
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t j = 0; j < circuit.columns.size(); ++j) {
    const ControlRanges cr =
        control_sets_and_ranges(circuit.columns[j].gates, circuit.wires);
    nlohmann::json jc;
    jc["column"] = j + 1;
    nlohmann::json ranges;
    for (const auto& [wire, range] : cr.ranges)
      ranges["wire_" + std::to_string(wire)] = {range.first, range.second};
    jc["ranges"] = ranges;
    jc["vertical_pairs"] = cr.pair_cost();
    cols.push_back(jc);
  }
  res.report["columns"] = cols;
  if (circuit.wires == 2 || circuit.wires == 3) {
    const StandardForm f = simulate_by_standard_form(circuit);
    res.report["standard_form_slots"] = f.slots.size();
    res.report["standard_form_residual"] =
        distance_up_to_phase(f.unitary(), circuit.unitary());
  }
  if (!dot_out.empty()) {
    std::ofstream out(dot_out);
    if (!out) {
      res.exit_code = kExitInputError;
      res.report["error"] = "cannot write '" + dot_out + "'";
      return res;
    }
    out << circuit_to_dot(circuit);
    res.report["dot_file"] = dot_out;
  }
  res.report["verdict"] = "valid";
  (void)opt;
  return res;
}

// ---------------------------------------------------------------------------
// simulate: run a raw protocol file on a given or seeded input state.

inline CommandResult cmd_simulate(const std::string& protocol_file,
                                  const std::string& input_source,
                                  const std::string& target_source,
                                  const Options& opt) {
  CommandResult res;
  LoccProtocol protocol;
  StateVector input;
  Mat target;
  bool have_target = false;
  try {
    protocol = protocol_from_json(load_json_file(protocol_file));
    std::vector<Qubit> reg;
    for (const auto& [label, node] : protocol.inputs)
      reg.push_back({label, node});
    if (input_source.empty() || input_source == "random") {
      Rng rng(opt.seed);
      input = StateVector(reg, rng.random_state(Eigen::Index{1} << reg.size()));
    } else {
      const StateVector loaded = StateVector::from_json(load_json_file(input_source));
      input = loaded;
    }
    if (!target_source.empty()) {
      target = load_unitary(target_source, opt);
      have_target = true;
    }
  } catch (const std::exception& e) {
    res.exit_code = kExitInputError;
    res.report["error"] = e.what();
    return res;
  }
  const ValidationReport vrep = validate(protocol);
  nlohmann::json violations = nlohmann::json::array();
  for (const Violation& v : vrep.violations)
    violations.push_back({{"kind", v.kind}, {"message", v.message}});
  res.report["violations"] = violations;
  if (!vrep.ok()) {
    res.report["verdict"] = "invalid";
    res.exit_code = kExitFail;
    return res;
  }
  const BranchSet out = execute(protocol, input);
  Vec want;
  if (have_target) want = target * input.amplitudes();
  nlohmann::json branches = nlohmann::json::array();
  double min_fid = 1.0;
  for (const Branch& br : out.branches) {
    nlohmann::json jb = detail::branch_to_json(br, have_target ? &want : nullptr);
    jb["state"] = br.state.to_json();
    branches.push_back(jb);
    if (have_target)
      min_fid = std::min(min_fid,
                         state_fidelity(br.state.amplitudes(), want));
  }
  res.report["branch_count"] = out.total_branches();
  res.report["total_probability"] = out.total_probability();
  res.report["branches"] = branches;
  if (have_target) {
    res.report["min_fidelity"] = min_fid;
    const bool pass = min_fid >= 1.0 - opt.tol;
    res.report["verdict"] = pass ? "implementable" : "failed";
    res.exit_code = pass ? kExitPass : kExitFail;
  } else {
    res.report["verdict"] = "simulated";
  }
  return res;
}

}  // namespace qnc::cli
