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

#include "qnc/decompositions.hpp"
#include "qnc/locc.hpp"

using namespace qnc;

namespace {

StateVector input_state(const LoccProtocol& p, const Vec& amps) {
  std::vector<Qubit> reg;
  for (const auto& [label, node] : p.inputs) reg.push_back({label, node});
  return StateVector(reg, amps);
}

// One-hop teleport protocol on a (1,2)-cluster.
LoccProtocol one_hop_teleport() {
  ProtocolBuilder b(build_cluster(1, 2));
  b.declare_input("in", "v:1,1");
  WireRef w{"in", "v:1,1"};
  w = b.teleport(w, b.consume_edge("K:1,1"));
  b.declare_output(w.label, w.node);
  return b.take();
}

}  // namespace

TEST_CASE("empty protocol is the identity channel") {
  ProtocolBuilder b(build_cluster(1, 1));
  b.declare_input("in", "v:1,1");
  b.declare_output("in", "v:1,1");
  const LoccProtocol p = b.take();
  Rng rng(1);
  const Vec psi = rng.random_state(2);
  const BranchSet out = execute(p, input_state(p, psi));
  REQUIRE(out.total_branches() == 1);
  REQUIRE(out.branches[0].probability() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(state_fidelity(out.branches[0].state.amplitudes(), psi) ==
          Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("teleportation yields four uniform branches with the input state") {
  const LoccProtocol p = one_hop_teleport();
  Rng rng(2);
  const Vec psi = rng.random_state(2);
  const BranchSet out = execute(p, input_state(p, psi));
  REQUIRE(out.total_branches() == 4);
  for (const Branch& br : out.expanded()) {
    REQUIRE(br.probability() == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(state_fidelity(br.state.amplitudes(), psi) ==
            Catch::Approx(1.0).margin(1e-10));
  }
  REQUIRE(out.total_probability() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("teleporting half of an entangled pair preserves entanglement") {
  ProtocolBuilder b(build_cluster(1, 2));
  b.declare_input("keep", "v:1,1");
  b.declare_input("move", "v:1,1");
  WireRef w{"move", "v:1,1"};
  w = b.teleport(w, b.consume_edge("K:1,1"));
  b.declare_output("keep", "v:1,1");
  b.declare_output(w.label, w.node);
  const LoccProtocol p = b.take();

  const BranchSet out = execute(p, input_state(p, bell_state(0)));
  for (const Branch& br : out.expanded()) {
    StateVector s = br.state;
    const SchmidtData d = schmidt_decompose(
        s, {s.reg()[0].label}, {s.reg()[1].label});
    REQUIRE(d.rank == 2);
    REQUIRE(state_fidelity(br.state.amplitudes(), bell_state(0)) ==
            Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("two-hop teleport consumes exactly two Bell pairs") {
  ProtocolBuilder b(build_cluster(1, 3));
  b.declare_input("in", "v:1,1");
  WireRef w{"in", "v:1,1"};
  w = b.teleport_cluster_path(w, {"K:1,1", "K:1,2"});
  b.declare_output(w.label, w.node);
  const LoccProtocol p = b.take();
  REQUIRE(p.consumed_edges.size() == 2);
  REQUIRE(w.node == "v:1,3");

  Rng rng(3);
  const Vec psi = rng.random_state(2);
  const BranchSet out = execute(p, input_state(p, psi));
  REQUIRE(out.total_branches() == 16);
  for (const Branch& br : out.branches)
    REQUIRE(state_fidelity(br.state.amplitudes(), psi) ==
            Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("teleport around a square returns the state to its start") {
  ProtocolBuilder b(build_cluster(2, 2));
  b.declare_input("in", "v:1,1");
  WireRef w{"in", "v:1,1"};
  w = b.teleport(w, b.consume_edge("S:1,1"));
  w = b.teleport(w, b.consume_edge("K:2,1"));
  w = b.teleport(w, b.consume_edge("S:1,2"));
  w = b.teleport(w, b.consume_edge("K:1,1"));
  REQUIRE(w.node == "v:1,1");
  b.declare_output(w.label, w.node);
  const LoccProtocol p = b.take();

  Rng rng(4);
  const Vec psi = rng.random_state(2);
  const BranchSet out = execute(p, input_state(p, psi));
  REQUIRE(out.total_branches() == 256);
  REQUIRE(out.branches.size() <= 4);  // merged classes stay small
  for (const Branch& br : out.branches)
    REQUIRE(state_fidelity(br.state.amplitudes(), psi) ==
            Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("column gate with identity targets is the identity channel") {
  ProtocolBuilder b(build_cluster(3, 1));
  std::vector<WireRef> wires;
  for (int i = 1; i <= 3; ++i) {
    const std::string label = "q" + std::to_string(i);
    const std::string node = Network::cluster_node(i, 1);
    b.declare_input(label, node);
    wires.push_back({label, node});
  }
  ColumnGate g;
  g.l = 1;
  g.m = 3;
  g.n = 2;
  g.targets = {pauli_i(), pauli_i(), pauli_i(), pauli_i()};
  emit_column_gate(b, wires, g);
  for (const WireRef& w : wires) b.declare_output(w.label, w.node);
  const LoccProtocol p = b.take();
  REQUIRE(p.consumed_edges.size() == 2);

  Rng rng(5);
  const Vec psi = rng.random_state(8);
  const BranchSet out = execute(p, input_state(p, psi));
  for (const Branch& br : out.branches)
    REQUIRE(state_fidelity(br.state.amplitudes(), psi) ==
            Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("fully controlled phase gate acts exactly on every branch") {
  // Controls on rows 1 and 3, target row 2; targets I, Z, Z, I.
  ProtocolBuilder b(build_cluster(3, 1));
  std::vector<WireRef> wires;
  for (int i = 1; i <= 3; ++i) {
    const std::string label = "q" + std::to_string(i);
    const std::string node = Network::cluster_node(i, 1);
    b.declare_input(label, node);
    wires.push_back({label, node});
  }
  ColumnGate g;
  g.l = 1;
  g.m = 3;
  g.n = 2;
  g.targets = {pauli_i(), pauli_z(), pauli_z(), pauli_i()};
  emit_column_gate(b, wires, g);
  for (const WireRef& w : wires) b.declare_output(w.label, w.node);
  const LoccProtocol p = b.take();

  Rng rng(6);
  for (int trial = 0; trial < 4; ++trial) {
    const Vec psi = rng.random_state(8);
    // Ideal action on register (q1, q2, q3): controls outer, target middle.
    const Mat ideal = fully_controlled_middle(pauli_i(), pauli_z(), pauli_z(),
                                              pauli_i());
    const Vec want = ideal * psi;
    const BranchSet out = execute(p, input_state(p, psi));
    for (const Branch& br : out.branches) {
      const StateVector s = br.state.reordered({"q1", "q2", "q3"});
      REQUIRE(state_fidelity(s.amplitudes(), want) ==
              Catch::Approx(1.0).margin(1e-10));
    }
  }
}

TEST_CASE("two-qubit column gate over a distance consumes the path") {
  ProtocolBuilder b(build_cluster(3, 1));
  std::vector<WireRef> wires;
  for (int i = 1; i <= 3; ++i) {
    const std::string label = "q" + std::to_string(i);
    const std::string node = Network::cluster_node(i, 1);
    b.declare_input(label, node);
    wires.push_back({label, node});
  }
  Rng rng(7);
  const Mat u0 = rng.haar_unitary(2), u1 = rng.haar_unitary(2);
  ColumnGate g;
  g.l = 1;
  g.m = 1;  // two-qubit controlled gate
  g.n = 3;
  g.targets = {u0, u1};
  emit_column_gate(b, wires, g);
  for (const WireRef& w : wires) b.declare_output(w.label, w.node);
  const LoccProtocol p = b.take();
  REQUIRE(p.consumed_edges.size() == 2);  // |l - n| pairs

  const Vec psi = rng.random_state(8);
  // Gate acts on (q1, q3); map the two-qubit ideal onto (q1, q2, q3).
  const Mat perm = qubit_permutation(3, {0, 2, 1});
  const Vec want = perm.adjoint() * kron(controlled_gate(u0, u1), pauli_i()) *
                   perm * psi;
  const BranchSet out = execute(p, input_state(p, psi));
  for (const Branch& br : out.branches) {
    const StateVector s = br.state.reordered({"q1", "q2", "q3"});
    REQUIRE(state_fidelity(s.amplitudes(), want) ==
            Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("validation flags locality violations") {
  ProtocolBuilder b(build_cluster(2, 1));
  b.declare_input("q1", "v:1,1");
  b.declare_input("q2", "v:2,1");
  b.local("v:1,1", {"q1", "q2"}, cnot());  // q2 lives at v:2,1
  b.declare_output("q1", "v:1,1");
  b.declare_output("q2", "v:2,1");
  const LoccProtocol p = b.take();
  const ValidationReport rep = validate(p);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.violations[0].kind == "locality");
  Rng rng(8);
  REQUIRE_THROWS_AS(execute(p, input_state(p, rng.random_state(4))), QncError);
}

TEST_CASE("validation flags double measurement and undeclared edges") {
  ProtocolBuilder b(build_cluster(1, 2));
  b.declare_input("in", "v:1,1");
  // Touch the edge qubits without declaring the edge consumed.
  b.local("v:1,1", {"K:1,1:1"}, pauli_x());
  b.measure("v:1,1", "in");
  Instruction again;
  again.op = Instruction::Op::measure;
  again.node = "v:1,1";
  again.labels = {"in"};
  again.vars = {"v_again"};
  b.protocol().instructions.push_back(again);
  b.declare_output("K:1,1:2", "v:1,2");
  const LoccProtocol p = b.take();
  const ValidationReport rep = validate(p);
  REQUIRE_FALSE(rep.ok());
  bool saw_double = false, saw_edge = false;
  for (const Violation& v : rep.violations) {
    if (v.kind == "measured-twice") saw_double = true;
    if (v.kind == "undeclared-edge") saw_edge = true;
  }
  REQUIRE(saw_double);
  REQUIRE(saw_edge);
}

TEST_CASE("execute rejects unnormalized inputs") {
  const LoccProtocol p = one_hop_teleport();
  std::vector<Qubit> reg{{"in", "v:1,1"}};
  REQUIRE_THROWS_AS(execute(p, StateVector(reg, Vec(2 * Vec::Unit(2, 0)))),
                    QncError);
}

TEST_CASE("branch probabilities always sum to one") {
  // A protocol with a genuinely random measurement.
  ProtocolBuilder b(build_cluster(1, 1));
  b.declare_input("in", "v:1,1");
  b.add_ancilla("v:1,1", "anc");
  b.local("v:1,1", {"anc"}, hadamard());
  b.local("v:1,1", {"anc", "in"}, controlled_gate(pauli_i(), pauli_x()));
  b.measure("v:1,1", "anc");
  b.declare_output("in", "v:1,1");
  const LoccProtocol p = b.take();
  const BranchSet out = execute(p, input_state(p, Vec(Vec::Unit(2, 0))));
  REQUIRE(out.total_probability() == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(out.total_branches() == 2);  // outcomes differ, no merging
}
