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

#include "qnc/protocols.hpp"

using namespace qnc;

namespace {

StateVector two_qubit_input(const LoccProtocol& p, const Vec& amps) {
  std::vector<Qubit> reg;
  for (const auto& [label, node] : p.inputs) reg.push_back({label, node});
  return StateVector(reg, amps);
}

void require_channel(const LoccProtocol& p, const Mat& target, const Vec& psi,
                     double tol = 1e-9) {
  const Vec want = target * psi;
  const BranchSet out = execute(p, two_qubit_input(p, psi));
  REQUIRE(out.total_probability() == Catch::Approx(1.0).margin(1e-9));
  for (const Branch& br : out.branches) {
    REQUIRE(state_fidelity(br.state.amplitudes(), want) ==
            Catch::Approx(1.0).margin(tol));
  }
}

}  // namespace

TEST_CASE("butterfly protocol with zero parameters is the identity") {
  const ButterflyProgram prog = butterfly_protocol(0, 0, 0);
  REQUIRE(prog.protocol.consumed_edges.size() == 7);
  REQUIRE(validate(prog.protocol).ok());
  Rng rng(71);
  for (int trial = 0; trial < 3; ++trial)
    require_channel(prog.protocol, Mat(Mat::Identity(4, 4)),
                    rng.random_state(4));
}

TEST_CASE("butterfly maps Bell eigenvectors to eigenvalue-weighted outputs") {
  const double x = 0.37, y = 0.21, z = 0.09;
  const ButterflyProgram prog = butterfly_protocol(x, y, z);
  for (int j = 0; j < 4; ++j) {
    const Vec psi = bell_state(j);
    const Vec want = canonical_eigenvalue(x, y, z, j) * psi;
    const BranchSet out = execute(prog.protocol, two_qubit_input(prog.protocol, psi));
    for (const Branch& br : out.branches) {
      const Vec normalized = br.state.amplitudes() / br.state.norm();
      REQUIRE(max_abs(Mat(normalized - want)) < 1e-10);
    }
  }
}

TEST_CASE("butterfly branches are uniform and exact on random inputs") {
  Rng rng(73);
  for (int trial = 0; trial < 3; ++trial) {
    const double x = rng.uniform(0, kPi / 2);
    const double y = rng.uniform(0, std::min(x, kPi / 2 - x));
    const double z = rng.uniform(0, y);
    const ButterflyProgram prog = butterfly_protocol(x, y, z);
    const Vec psi = rng.random_state(4);
    const Vec want = prog.target * psi;
    const BranchSet out = execute(prog.protocol, two_qubit_input(prog.protocol, psi));
    REQUIRE(out.total_branches() == (std::uint64_t{1} << 19));
    for (const Branch& br : out.branches) {
      REQUIRE(br.probability() ==
              Catch::Approx(std::pow(2.0, -19)).margin(1e-15));
      const Vec normalized = br.state.amplitudes() / br.state.norm();
      REQUIRE(max_abs(Mat(normalized - want)) < 1e-9);
    }
  }
}

TEST_CASE("butterfly circuit trace matches the closed forms") {
  Rng rng(79);
  for (int trial = 0; trial < 5; ++trial) {
    const double x = rng.uniform(0, kPi / 2);
    const double y = rng.uniform(0, kPi / 2);
    const double z = rng.uniform(0, kPi / 2);
    for (int j = 0; j < 4; ++j) {
      const ButterflyTrace tr = butterfly_circuit_trace(x, y, z, j);
      const Vec bell = bell_state(j);

      // Step 4: outcome parity of the first gate collapses onto |0>/|1>.
      StateVector ref(std::vector<Qubit>{{"q1", "n"}, {"q3", "n"}, {"q2", "n"}},
                      kron(bell, Vec(Vec::Unit(2, (j == 1 || j == 3) ? 1 : 0))));
      Vec want4 = ref.reordered({"q1", "q2", "q3"}).amplitudes();
      if (j == 1 || j == 3) want4 = -want4;
      REQUIRE(max_abs(Mat(tr.after_step[3] - want4)) < 1e-10);

      // Step 5: parameterized phases per eigenvector family.
      Complex phase5;
      switch (j) {
        case 0: phase5 = std::exp(kI * (-y + z)); break;
        case 1: phase5 = kI * std::exp(kI * (y + z)); break;
        case 2: phase5 = std::exp(kI * (y - z)); break;
        default: phase5 = kI * std::exp(kI * (-y - z)); break;
      }
      REQUIRE(max_abs(Mat(tr.after_step[4] - phase5 * want4 *
                          ((j == 1 || j == 3) ? -1.0 : 1.0))) < 1e-10);

      // Step 6: eigenvalue times |+>/|-> on the middle qubit.
      const Complex lambda = canonical_eigenvalue(x, y, z, j);
      Vec plus_minus(2);
      plus_minus << 1 / std::sqrt(2.0),
          ((j == 0 || j == 2) ? 1 : -1) / std::sqrt(2.0);
      StateVector ref6(
          std::vector<Qubit>{{"q1", "n"}, {"q3", "n"}, {"q2", "n"}},
          kron(bell, plus_minus));
      const Vec want6 =
          lambda * ref6.reordered({"q1", "q2", "q3"}).amplitudes();
      REQUIRE(max_abs(Mat(tr.after_step[5] - want6)) < 1e-10);

      // Measurement: probability 1/2 per outcome, both corrected branches
      // equal the eigenvalue-weighted eigenvector.
      for (int outcome = 0; outcome < 2; ++outcome) {
        REQUIRE(tr.probabilities[static_cast<std::size_t>(outcome)] ==
                Catch::Approx(0.5).margin(1e-10));
        const Vec normalized =
            tr.outputs[static_cast<std::size_t>(outcome)] * std::sqrt(2.0);
        REQUIRE(max_abs(Mat(normalized - lambda * bell)) < 1e-10);
      }
    }
  }
}

TEST_CASE("full two-qubit unitaries run over the butterfly") {
  Rng rng(83);
  const Vec psi = rng.random_state(4);
  // The swap gate is the interesting case: it cannot run on the plain
  // two-column ladder at all.
  require_channel(implement_full_two_qubit(swap_gate()), swap_gate(), psi);
  require_channel(implement_full_two_qubit(cnot()), cnot(), psi);
  const Mat local = kron(rng.haar_unitary(2), rng.haar_unitary(2));
  require_channel(implement_full_two_qubit(local), local, psi);
  const Mat haar = rng.haar_unitary(4);
  require_channel(implement_full_two_qubit(haar), haar, psi);
}

TEST_CASE("the butterfly protocol output is exact including phase") {
  Rng rng(89);
  const Mat u = rng.haar_unitary(4);
  const LoccProtocol p = implement_full_two_qubit(u);
  const Vec psi = rng.random_state(4);
  const Vec want = u * psi;
  const BranchSet out = execute(p, two_qubit_input(p, psi));
  for (const Branch& br : out.branches) {
    const Vec normalized = br.state.amplitudes() / br.state.norm();
    REQUIRE(max_abs(Mat(normalized - want)) < 1e-9);
  }
}

TEST_CASE("grail protocol implements arbitrary unitaries") {
  Rng rng(97);
  const Vec psi = rng.random_state(4);
  const LoccProtocol ident = grail_protocol(Mat(Mat::Identity(4, 4)));
  REQUIRE(ident.consumed_edges.size() == 9);
  require_channel(ident, Mat(Mat::Identity(4, 4)), psi);
  require_channel(grail_protocol(swap_gate()), swap_gate(), psi);
  const Mat ug = canonical_gate(0.4, 0.3, 0.1);
  require_channel(grail_protocol(ug), ug, psi);
}

TEST_CASE("ladder refuses gates whose parameter count exceeds the columns") {
  const LadderResult refused = ladder_protocol(swap_gate(), 2);
  REQUIRE_FALSE(refused.protocol.has_value());
  REQUIRE(refused.kc_number == 3);
  REQUIRE_FALSE(refused.refusal.empty());

  const LadderResult ok3 = ladder_protocol(swap_gate(), 3);
  REQUIRE(ok3.protocol.has_value());
  Rng rng(101);
  require_channel(*ok3.protocol, swap_gate(), rng.random_state(4));

  const LadderResult cnot1 = ladder_protocol(cnot(), 1);
  REQUIRE(cnot1.protocol.has_value());
  require_channel(*cnot1.protocol, cnot(), rng.random_state(4));
}

TEST_CASE("ladder resource use: 2(N-1) horizontal plus kc vertical pairs") {
  Rng rng(103);
  const Mat u = rng.haar_unitary(4);  // kc 3 almost surely
  const LadderResult res = ladder_protocol(u, 3);
  REQUIRE(res.protocol.has_value());
  int vertical = 0, horizontal = 0;
  for (const std::string& e : res.protocol->consumed_edges) {
    if (e.rfind("S:", 0) == 0) ++vertical;
    if (e.rfind("K:", 0) == 0) ++horizontal;
  }
  REQUIRE(horizontal == 4);
  REQUIRE(vertical == res.kc_number);
  require_channel(*res.protocol, u, rng.random_state(4));

  // One column beyond the parameter count: the extra column only relays.
  const LadderResult wide = ladder_protocol(cnot(), 3);
  REQUIRE(wide.protocol.has_value());
  int vertical_wide = 0;
  for (const std::string& e : wide.protocol->consumed_edges)
    if (e.rfind("S:", 0) == 0) ++vertical_wide;
  REQUIRE(vertical_wide == 1);
  require_channel(*wide.protocol, cnot(), rng.random_state(4));
}

TEST_CASE("second butterfly gate blocks do not factor into two controls") {
  // Generic parameters: no decomposition into a product of a (1;2)- and a
  // (3;2)-controlled gate exists.
  const auto blocks = butterfly_second_gate_blocks(0.31, 0.17);
  REQUIRE(product_form_defect(blocks[0], blocks[1], blocks[2], blocks[3]) > 0.1);
  // Degenerate parameters make the gate local, hence factorizable.
  const auto trivial = butterfly_second_gate_blocks(0.0, 0.0);
  REQUIRE(product_form_defect(trivial[0], trivial[1], trivial[2], trivial[3]) <
          1e-12);
}

TEST_CASE("vertical loops enable cyclic permutations") {
  const Network tri = build_generalized(3, 1, {{1, 2, 1}, {2, 3, 1}, {1, 3, 1}});
  const auto loops = find_vertical_loops(tri);
  REQUIRE(loops.size() == 1);
  const LoccProtocol p = cyclic_permutation_protocol(tri, loops[0]);
  REQUIRE(validate(p).ok());
  REQUIRE(p.consumed_edges.size() == 3);

  Rng rng(107);
  const Vec psi = rng.random_state(8);
  std::vector<Qubit> reg;
  for (const auto& [label, node] : p.inputs) reg.push_back({label, node});
  const BranchSet out = execute(p, StateVector(reg, psi));
  // The state of q_{rows[t]} moves to the node of rows[t+1]; relabeling the
  // outputs back to input order must reproduce the input state.
  for (const Branch& br : out.branches) {
    std::vector<std::string> order;
    for (const auto& [label, node] : p.outputs) order.push_back(label);
    const StateVector s = br.state.reordered(order);
    REQUIRE(state_fidelity(s.amplitudes(), psi) ==
            Catch::Approx(1.0).margin(1e-10));
    // Each output wire sits one step around the loop.
    for (std::size_t t = 0; t < 3; ++t) {
      const std::string expect_node = Network::cluster_node(
          loops[0].rows[(t + 1) % 3], loops[0].column);
      REQUIRE(p.outputs[t].second == expect_node);
    }
  }
}
