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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qnc/convert.hpp"
#include "qnc/decompositions.hpp"
#include "qnc/linalg.hpp"
#include "qnc/locc.hpp"
#include "qnc/network.hpp"

namespace qnc {

// ---------------------------------------------------------------------------
// The canonical two-qubit core exp(i(x XX + y YY + z ZZ)) is diagonal in the
// Bell basis; its eigenvalues drive the butterfly construction.

struct CanonicalEigensystem {
  std::array<Complex, 4> eigenvalues;
  std::array<Vec, 4> eigenvectors;
};

inline CanonicalEigensystem canonical_eigensystem(double x, double y, double z) {
  CanonicalEigensystem es;
  for (int j = 0; j < 4; ++j) {
    es.eigenvalues[static_cast<std::size_t>(j)] = canonical_eigenvalue(x, y, z, j);
    es.eigenvectors[static_cast<std::size_t>(j)] = bell_state(j);
  }
  return es;
}

// Single-qubit rotation u(x) = H diag(e^{ix}, -i e^{-ix}) applied at the
// middle output node right before the final measurement.
inline Mat butterfly_u_gate(double x) {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = std::exp(kI * x);
  d(1, 1) = -kI * std::exp(-kI * x);
  return hadamard() * d;
}

// Target blocks of the second fully controlled gate; the diagonal pair
// pattern carries the y and z parameters.
inline std::array<Mat, 4> butterfly_second_gate_blocks(double y, double z) {
  Mat w_eq = Mat::Zero(2, 2), w_ne = Mat::Zero(2, 2);
  w_eq(0, 0) = std::exp(kI * (z - y));
  w_eq(1, 1) = -kI * std::exp(kI * (z + y));
  w_ne(0, 0) = std::exp(-kI * (z - y));
  w_ne(1, 1) = -kI * std::exp(-kI * (z + y));
  return {w_eq, w_ne, w_ne, w_eq};
}

namespace detail {

// Emits the three-wire circuit that implements the canonical core over one
// column pair: Hadamards, the parity-phase gate at the inputs, the transfer
// to the output column, the parameterized gate and u(x), then the final
// measurement with conditional X corrections on the outer wires.
inline void emit_butterfly_core(ProtocolBuilder& b, std::vector<WireRef>& wires,
                                double x, double y, double z) {
  for (const WireRef& w : wires) b.local(w.node, {w.label}, hadamard());

  ColumnGate first;
  first.l = 1;
  first.m = 3;
  first.n = 2;
  first.column = 1;
  first.targets = {pauli_i(), pauli_z(), pauli_z(), pauli_i()};
  emit_column_gate(b, wires, first);

  const Mat xh = pauli_x() * hadamard();
  b.local(wires[0].node, {wires[0].label}, xh);
  b.local(wires[2].node, {wires[2].label}, xh);
  b.local(wires[1].node, {wires[1].label}, hadamard());

  for (int i = 0; i < 3; ++i)
    wires[static_cast<std::size_t>(i)] = b.teleport_cluster_path(
        wires[static_cast<std::size_t>(i)],
        {"K:" + std::to_string(i + 1) + ",1"});

  ColumnGate second;
  second.l = 1;
  second.m = 3;
  second.n = 2;
  second.column = 2;
  const auto blocks = butterfly_second_gate_blocks(y, z);
  second.targets = {blocks[0], blocks[1], blocks[2], blocks[3]};
  emit_column_gate(b, wires, second);

  b.local(wires[1].node, {wires[1].label}, butterfly_u_gate(x));
  const std::string k_var = b.measure(wires[1].node, wires[1].label);
  b.send(wires[1].node, wires[0].node, k_var);
  b.send(wires[1].node, wires[2].node, k_var);
  b.conditional_gate(wires[0].node, k_var, pauli_x(), {wires[0].label});
  b.conditional_gate(wires[2].node, k_var, pauli_x(), {wires[2].label});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Butterfly implementation of the canonical core. Deterministic: every
// measurement branch outputs exp(i(x XX + y YY + z ZZ)) |psi> exactly.

struct ButterflyProgram {
  double x = 0, y = 0, z = 0;
  Mat target;  // 4x4 ideal action on (in1, in2)
  LoccProtocol protocol;
};

inline ButterflyProgram butterfly_protocol(double x, double y, double z) {
  ButterflyProgram prog;
  prog.x = x;
  prog.y = y;
  prog.z = z;
  prog.target = canonical_gate(x, y, z);

  ProtocolBuilder b(butterfly_network());
  b.declare_input("in1", "i1");
  b.declare_input("in2", "i2");
  b.add_ancilla("n1", "mid");
  std::vector<WireRef> wires = {{"in1", "i1"}, {"mid", "n1"}, {"in2", "i2"}};
  detail::emit_butterfly_core(b, wires, x, y, z);
  b.declare_output(wires[0].label, wires[0].node);
  b.declare_output(wires[2].label, wires[2].node);
  prog.protocol = b.take();
  return prog;
}

// Full two-qubit unitary over the butterfly: single-qubit canonical factors
// act at the input and output nodes around the core.
inline LoccProtocol implement_full_two_qubit(const Mat& u) {
  const KrausCiracForm f = kraus_cirac(u);
  ProtocolBuilder b(butterfly_network());
  b.declare_input("in1", "i1");
  b.declare_input("in2", "i2");
  b.local("i1", {"in1"}, f.w);
  b.local("i2", {"in2"}, f.w_prime);
  b.add_ancilla("n1", "mid");
  std::vector<WireRef> wires = {{"in1", "i1"}, {"mid", "n1"}, {"in2", "i2"}};
  detail::emit_butterfly_core(b, wires, f.x, f.y, f.z);
  b.local(wires[0].node, {wires[0].label},
          Mat(std::exp(kI * f.global_phase) * f.u));
  b.local(wires[2].node, {wires[2].label}, f.u_prime);
  b.declare_output(wires[0].label, wires[0].node);
  b.declare_output(wires[2].label, wires[2].node);
  return b.take();
}

// ---------------------------------------------------------------------------
// Step-by-step trace of the butterfly circuit on a Bell-basis input, for
// verification against the closed forms. Steps:
//   1 input, 2 Hadamards, 3 first controlled gate, 4 basis flip,
//   5 second controlled gate, 6 u(x); then the measurement with conditional
//   corrections, reported per outcome.

struct ButterflyTrace {
  std::array<Vec, 6> after_step;      // three-qubit states, steps 1..6
  std::array<Vec, 2> outputs;         // two-qubit states after correction
  std::array<double, 2> probabilities{};  // per measurement outcome
};

inline ButterflyTrace butterfly_circuit_trace(double x, double y, double z,
                                              int eigen_index) {
  if (eigen_index < 0 || eigen_index > 3)
    throw QncError("butterfly_circuit_trace: eigenvector index must be 0..3");
  ButterflyTrace tr;
  // Register order (wire1, wire2, wire3); the Bell input sits on wires 1,3.
  std::vector<Qubit> reg{{"q1", "n"}, {"q2", "n"}, {"q3", "n"}};
  StateVector s(std::vector<Qubit>{{"q1", "n"}, {"q3", "n"}, {"q2", "n"}},
                kron(bell_state(eigen_index), Vec(Vec::Unit(2, 0))));
  s = s.reordered({"q1", "q2", "q3"});
  tr.after_step[0] = s.amplitudes();

  for (const char* q : {"q1", "q2", "q3"}) s.apply(hadamard(), {q});
  tr.after_step[1] = s.amplitudes();

  s.apply(fully_controlled_middle(pauli_i(), pauli_z(), pauli_z(), pauli_i()),
          {"q1", "q2", "q3"});
  tr.after_step[2] = s.amplitudes();

  const Mat xh = pauli_x() * hadamard();
  s.apply(xh, {"q1"});
  s.apply(xh, {"q3"});
  s.apply(hadamard(), {"q2"});
  tr.after_step[3] = s.amplitudes();

  const auto blocks = butterfly_second_gate_blocks(y, z);
  s.apply(fully_controlled_middle(blocks[0], blocks[1], blocks[2], blocks[3]),
          {"q1", "q2", "q3"});
  tr.after_step[4] = s.amplitudes();

  s.apply(butterfly_u_gate(x), {"q2"});
  tr.after_step[5] = s.amplitudes();

  for (int outcome = 0; outcome < 2; ++outcome) {
    StateVector branch = s.measured("q2", outcome);
    tr.probabilities[static_cast<std::size_t>(outcome)] = branch.squared_norm();
    if (outcome == 1) {
      branch.apply(pauli_x(), {"q1"});
      branch.apply(pauli_x(), {"q3"});
    }
    tr.outputs[static_cast<std::size_t>(outcome)] = branch.amplitudes();
  }
  return tr;
}

// Closed-form reference states for the trace, built from the Bell vectors
// and the parameter phases directly (no gate applications).
inline ButterflyTrace butterfly_trace_reference(double x, double y, double z,
                                                int eigen_index) {
  if (eigen_index < 0 || eigen_index > 3)
    throw QncError("butterfly_trace_reference: eigenvector index must be 0..3");
  const int j = eigen_index;
  ButterflyTrace ref;
  const Vec bell = bell_state(j);
  auto three = [&](const Vec& pair13, const Vec& mid) {
    StateVector s(std::vector<Qubit>{{"q1", "n"}, {"q3", "n"}, {"q2", "n"}},
                  kron(pair13, mid));
    return s.reordered({"q1", "q2", "q3"}).amplitudes();
  };
  const Vec zero = Vec::Unit(2, 0), one = Vec::Unit(2, 1);
  Vec plus(2), minus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  minus << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);

  ref.after_step[0] = three(bell, zero);
  ref.after_step[1] = three(Vec(kron(hadamard(), hadamard()) * bell),
                            Vec(hadamard() * zero));
  {
    const Mat hh = kron(hadamard(), hadamard());
    const Mat zz = kron(pauli_z(), pauli_z());
    ref.after_step[2] = (three(Vec(hh * bell), zero) +
                         three(Vec(zz * hh * bell), one)) /
                        std::sqrt(2.0);
  }
  const bool odd = (j == 1 || j == 3);
  ref.after_step[3] = odd ? Vec(-three(bell, one)) : three(bell, zero);
  Complex phase5;
  switch (j) {
    case 0: phase5 = std::exp(kI * (-y + z)); break;
    case 1: phase5 = kI * std::exp(kI * (y + z)); break;
    case 2: phase5 = std::exp(kI * (y - z)); break;
    default: phase5 = kI * std::exp(kI * (-y - z)); break;
  }
  ref.after_step[4] = phase5 * three(bell, odd ? one : zero);
  const Complex lambda = canonical_eigenvalue(x, y, z, j);
  ref.after_step[5] = lambda * three(bell, odd ? minus : plus);
  for (int outcome = 0; outcome < 2; ++outcome) {
    ref.probabilities[static_cast<std::size_t>(outcome)] = 0.5;
    ref.outputs[static_cast<std::size_t>(outcome)] =
        lambda / std::sqrt(2.0) * bell;
  }
  return ref;
}

// ---------------------------------------------------------------------------
// Grail implementation: teleport in over E:1, run the three-CNOT form on the
// (2,3)-cluster part (one controlled gate per column), teleport out over E:2.

inline LoccProtocol grail_protocol(const Mat& u) {
  const ThreeCnotCircuit circ = three_cnot_decompose(u);
  ProtocolBuilder b(grail_network());
  b.declare_input("in1", "i1");
  b.declare_input("in2", "i2");
  std::vector<WireRef> wires = {{"in1", "i1"}, {"in2", "i2"}};
  wires[0] = b.teleport(wires[0], b.consume_edge("E:1"));

  // Temporal order is the reverse of the matrix product: layer 3 first.
  for (int col = 1; col <= 3; ++col) {
    const auto& layer = circ.layers[static_cast<std::size_t>(4 - col)];
    b.local(wires[0].node, {wires[0].label}, layer.first);
    b.local(wires[1].node, {wires[1].label}, layer.second);
    ColumnGate cx;
    cx.l = 1;
    cx.m = 1;
    cx.n = 2;
    cx.column = col;
    cx.targets = {pauli_i(), pauli_x()};
    emit_column_gate(b, wires, cx);
    if (col < 3) {
      wires[0] = b.teleport_cluster_path(wires[0], {"K:1," + std::to_string(col)});
      wires[1] = b.teleport_cluster_path(wires[1], {"K:2," + std::to_string(col)});
    }
  }
  b.local(wires[0].node, {wires[0].label},
          Mat(std::exp(kI * circ.phase) * circ.layers[0].first));
  b.local(wires[1].node, {wires[1].label}, circ.layers[0].second);
  wires[1] = b.teleport(wires[1], b.consume_edge("E:2"));

  b.declare_output(wires[0].label, wires[0].node);
  b.declare_output(wires[1].label, wires[1].node);
  return b.take();
}

// ---------------------------------------------------------------------------
// Ladder networks ((2,N)-clusters). A two-qubit unitary compiles iff its
// canonical parameter count fits into the N columns; otherwise the refusal
// carries the parameter count.

struct LadderResult {
  std::optional<LoccProtocol> protocol;
  int kc_number = 0;
  std::string refusal;  // empty when a protocol exists
};

inline LadderResult ladder_protocol(const Mat& u, int n_columns) {
  if (n_columns < 1) throw QncError("ladder_protocol: need at least 1 column");
  LadderResult res;
  const KrausCiracForm f = kraus_cirac(u);
  res.kc_number = f.kc_number;
  if (f.kc_number > n_columns) {
    res.refusal = "kc number " + std::to_string(f.kc_number) + " exceeds " +
                  std::to_string(n_columns) + " columns";
    return res;
  }
  const auto factors = controlled_sequence(u, std::min(n_columns, 3));
  if (!factors)
    throw QncError("ladder_protocol: internal factorization failure");

  ProtocolBuilder b(build_cluster(2, n_columns));
  b.declare_input("in1", "v:1,1");
  b.declare_input("in2", "v:2,1");
  std::vector<WireRef> wires = {{"in1", "v:1,1"}, {"in2", "v:2,1"}};

  const int f_count = static_cast<int>(factors->size());
  for (int col = 1; col <= n_columns; ++col) {
    // Matrix product F_1 ... F_f applies F_f first; identity columns beyond
    // the factor list just pass the wires through.
    const int fi = f_count - col;
    if (fi >= 0) {
      const Mat& factor = (*factors)[static_cast<std::size_t>(fi)];
      if (operator_schmidt_rank(factor) <= 1) {
        const KronFactors loc = kron_factor(factor);
        b.local(wires[0].node, {wires[0].label},
                Mat(loc.phase * loc.a));
        b.local(wires[1].node, {wires[1].label}, loc.b);
      } else {
        const auto form = extract_controlled(factor, 1e-8);
        if (!form)
          throw QncError("ladder_protocol: factor has no controlled form");
        b.local(wires[0].node, {wires[0].label}, Mat(form->beta.adjoint()));
        ColumnGate g;
        g.l = 1;
        g.m = 1;
        g.n = 2;
        g.column = col;
        g.targets = {form->w[0], form->w[1]};
        emit_column_gate(b, wires, g);
        b.local(wires[0].node, {wires[0].label}, form->alpha);
      }
    }
    if (col < n_columns) {
      wires[0] = b.teleport_cluster_path(wires[0], {"K:1," + std::to_string(col)});
      wires[1] = b.teleport_cluster_path(wires[1], {"K:2," + std::to_string(col)});
    }
  }
  b.declare_output(wires[0].label, wires[0].node);
  b.declare_output(wires[1].label, wires[1].node);
  res.protocol = b.take();
  return res;
}

// ---------------------------------------------------------------------------
// Cyclic permutation around a loop of vertical edges: each node's qubit
// teleports to the next node of the loop, consuming the loop edges.

inline LoccProtocol cyclic_permutation_protocol(const Network& net,
                                                const VerticalLoop& loop) {
  ProtocolBuilder b(net);
  const std::size_t len = loop.rows.size();
  std::vector<WireRef> wires;
  for (std::size_t t = 0; t < len; ++t) {
    const std::string node =
        Network::cluster_node(loop.rows[t], loop.column);
    const std::string label = "q" + std::to_string(loop.rows[t]);
    b.declare_input(label, node);
    wires.push_back({label, node});
  }
  for (std::size_t t = 0; t < len; ++t)
    wires[t] = b.teleport(wires[t], b.consume_edge(loop.edge_ids[t]));
  for (const WireRef& w : wires) b.declare_output(w.label, w.node);
  return b.take();
}

}  // namespace qnc
