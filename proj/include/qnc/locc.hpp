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

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qnc/linalg.hpp"
#include "qnc/network.hpp"
#include "qnc/state.hpp"

namespace qnc {

// ---------------------------------------------------------------------------
// Instructions. Every quantum target of an instruction lives at the declared
// node; classical messages are free. Teleportation is not primitive, it
// expands to Bell measurement + send + conditional corrections.

struct ParityClause {
  std::vector<std::string> vars;
  int expected = 1;  // XOR(vars) == expected
};

struct Predicate {
  std::vector<ParityClause> clauses;  // conjunction

  bool eval(const std::map<std::string, int>& env) const {
    for (const ParityClause& c : clauses) {
      int parity = 0;
      for (const std::string& v : c.vars) {
        const auto it = env.find(v);
        if (it == env.end()) throw QncError("predicate references unset variable '" + v + "'");
        parity ^= it->second;
      }
      if (parity != c.expected) return false;
    }
    return true;
  }
};

struct Instruction {
  enum class Op {
    add_ancilla,
    local_unitary,
    measure,
    bell_measure,
    classical_send,
    conditional,
    discard
  };

  Op op = Op::local_unitary;
  std::string node;
  std::vector<std::string> labels;
  Mat gate;
  std::vector<std::string> vars;  // outcome vars (1 or 2)
  std::string from, to;           // classical_send
  Predicate pred;
  std::vector<Instruction> body;  // conditional body (local unitaries only)
};

struct LoccProtocol {
  Network network;
  std::vector<std::pair<std::string, std::string>> inputs;   // (label, node)
  std::vector<std::pair<std::string, std::string>> outputs;  // (label, node)
  std::vector<std::string> consumed_edges;
  std::vector<Instruction> instructions;
};

// ---------------------------------------------------------------------------
// Static validation: locality, single consumption, declared entanglement,
// classical-knowledge flow. Report-only; execute() refuses invalid input.

struct Violation {
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> touched_edges;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const LoccProtocol& p) {
  ValidationReport rep;
  auto flag = [&rep](const std::string& kind, const std::string& msg) {
    rep.violations.push_back({kind, msg});
  };

  struct Tracked {
    std::string node;
    bool measured = false;
  };
  std::map<std::string, Tracked> qubits;
  std::map<std::string, const EdgeRef*> edge_of_qubit;
  for (const auto& [label, node] : p.inputs) qubits[label] = {node, false};
  for (const EdgeRef& e : p.network.edges) {
    qubits[e.a.label] = {e.a.node, false};
    qubits[e.b.label] = {e.b.node, false};
    edge_of_qubit[e.a.label] = &e;
    edge_of_qubit[e.b.label] = &e;
  }
  std::map<std::string, std::set<std::string>> var_known_at;
  std::set<std::string> touched;

  auto touch = [&](const std::string& label) {
    const auto it = edge_of_qubit.find(label);
    if (it != edge_of_qubit.end()) touched.insert(it->second->id);
  };
  auto check_targets = [&](const Instruction& ins, const std::string& what) {
    for (const std::string& l : ins.labels) {
      const auto it = qubits.find(l);
      if (it == qubits.end()) {
        flag("unknown-label", what + " references unknown qubit '" + l + "'");
        continue;
      }
      if (it->second.measured)
        flag("measured-twice", what + " acts on retired qubit '" + l + "'");
      if (it->second.node != ins.node)
        flag("locality", what + " at " + ins.node + " touches qubit '" + l +
                             "' living at " + it->second.node);
      touch(l);
    }
  };

  auto walk = [&](auto&& self, const std::vector<Instruction>& instrs,
                  bool in_conditional) -> void {
    for (const Instruction& ins : instrs) {
      switch (ins.op) {
        case Instruction::Op::add_ancilla:
          if (qubits.count(ins.labels.at(0)))
            flag("duplicate-label", "ancilla '" + ins.labels[0] + "' reuses a label");
          else
            qubits[ins.labels[0]] = {ins.node, false};
          break;
        case Instruction::Op::local_unitary:
          check_targets(ins, "local unitary");
          if (!is_unitary(ins.gate))
            flag("non-unitary", "local operation at " + ins.node + " is not unitary");
          break;
        case Instruction::Op::measure:
        case Instruction::Op::bell_measure: {
          if (in_conditional) {
            flag("conditional-measure", "measurement inside a conditional body");
            break;
          }
          check_targets(ins, "measurement");
          for (const std::string& l : ins.labels) {
            const auto it = qubits.find(l);
            if (it != qubits.end()) it->second.measured = true;
          }
          for (const std::string& v : ins.vars) var_known_at[v].insert(ins.node);
          break;
        }
        case Instruction::Op::classical_send: {
          const auto it = var_known_at.find(ins.vars.at(0));
          if (it == var_known_at.end() || !it->second.count(ins.from))
            flag("unknown-variable", "node " + ins.from + " sends variable '" +
                                         ins.vars[0] + "' it does not hold");
          var_known_at[ins.vars.at(0)].insert(ins.to);
          break;
        }
        case Instruction::Op::conditional: {
          for (const ParityClause& c : ins.pred.clauses)
            for (const std::string& v : c.vars) {
              const auto it = var_known_at.find(v);
              if (it == var_known_at.end() || !it->second.count(ins.node))
                flag("unknown-variable", "conditional at " + ins.node +
                                             " uses variable '" + v +
                                             "' not known there");
            }
          self(self, ins.body, true);
          break;
        }
        case Instruction::Op::discard:
          check_targets(ins, "discard");
          for (const std::string& l : ins.labels) qubits[l].measured = true;
          break;
      }
    }
  };
  walk(walk, p.instructions, false);

  const std::set<std::string> declared(p.consumed_edges.begin(),
                                       p.consumed_edges.end());
  for (const std::string& t : touched) {
    rep.touched_edges.push_back(t);
    if (!declared.count(t))
      flag("undeclared-edge", "edge " + t + " is used but not declared consumed");
  }
  for (const std::string& d : declared)
    if (!touched.count(d))
      flag("unused-edge", "edge " + d + " is declared consumed but never used");

  for (const auto& [label, node] : p.outputs) {
    const auto it = qubits.find(label);
    if (it == qubits.end()) {
      flag("unknown-label", "output qubit '" + label + "' does not exist");
    } else {
      if (it->second.measured)
        flag("consumed-output", "output qubit '" + label + "' was measured");
      if (it->second.node != node)
        flag("misplaced-output", "output qubit '" + label + "' lives at " +
                                     it->second.node + ", declared " + node);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Branch-exact execution. All measurement outcomes are enumerated; branches
// whose continuations coincide are kept as one class with the distinguishing
// (already dead) variables marked free. Expanding the classes reproduces the
// plain exhaustive enumeration.

struct Branch {
  std::vector<std::pair<std::string, int>> outcomes;  // fixed, in order
  std::vector<std::string> free_vars;                 // every assignment occurs
  StateVector state;  // unnormalized; squared norm = per-assignment probability

  double probability() const { return state.squared_norm(); }
  std::uint64_t multiplicity() const { return std::uint64_t{1} << free_vars.size(); }
};

struct BranchSet {
  std::vector<Branch> branches;

  std::uint64_t total_branches() const {
    std::uint64_t n = 0;
    for (const Branch& b : branches) n += b.multiplicity();
    return n;
  }
  double total_probability() const {
    double s = 0;
    for (const Branch& b : branches)
      s += static_cast<double>(b.multiplicity()) * b.probability();
    return s;
  }
  // Materializes explicit branches (free variables enumerated).
  std::vector<Branch> expanded(std::uint64_t cap = (std::uint64_t{1} << 16)) const {
    if (total_branches() > cap)
      throw QncError("BranchSet: expansion of " +
                     std::to_string(total_branches()) + " branches exceeds cap");
    std::vector<Branch> out;
    for (const Branch& b : branches) {
      const std::size_t nf = b.free_vars.size();
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nf); ++mask) {
        Branch e;
        e.state = b.state;
        e.outcomes = b.outcomes;
        for (std::size_t i = 0; i < nf; ++i)
          e.outcomes.push_back({b.free_vars[i], static_cast<int>((mask >> i) & 1)});
        out.push_back(std::move(e));
      }
    }
    return out;
  }
};

struct ExecOptions {
  double merge_tol = 1e-12;
  std::size_t max_paths = 4096;  // live branch classes, safety valve
  bool check_validation = true;
};

namespace detail {

struct ExecNode {
  StateVector state;
  std::map<std::string, int> env;
  std::vector<std::pair<std::string, int>> order;
  std::vector<std::string> free_vars;
};

// Last execution step (pre-order position) at which each variable is read.
inline void var_last_use(const std::vector<Instruction>& instrs, int& step,
                         std::map<std::string, int>& last) {
  for (const Instruction& ins : instrs) {
    ++step;
    if (ins.op == Instruction::Op::classical_send) {
      last[ins.vars.at(0)] = step;
    } else if (ins.op == Instruction::Op::conditional) {
      for (const ParityClause& c : ins.pred.clauses)
        for (const std::string& v : c.vars) last[v] = step;
      var_last_use(ins.body, step, last);
    }
  }
}

inline int count_steps(const std::vector<Instruction>& instrs) {
  int n = 0;
  for (const Instruction& ins : instrs) {
    ++n;
    if (ins.op == Instruction::Op::conditional) n += count_steps(ins.body);
  }
  return n;
}

}  // namespace detail

inline BranchSet execute(const LoccProtocol& p, const StateVector& input,
                         const ExecOptions& opt = {}) {
  if (opt.check_validation) {
    const ValidationReport rep = validate(p);
    if (!rep.ok())
      throw QncError("execute: protocol fails validation: " +
                     rep.violations.front().kind + ": " +
                     rep.violations.front().message);
  }
  if (std::abs(input.squared_norm() - 1.0) > 1e-10)
    throw QncError("execute: input state is not normalized");
  {
    std::set<std::string> want, got;
    for (const auto& [l, n] : p.inputs) want.insert(l);
    for (const Qubit& q : input.reg()) got.insert(q.label);
    if (want != got)
      throw QncError("execute: input register does not match declared inputs");
  }

  std::map<std::string, const EdgeRef*> edge_of_qubit;
  for (const EdgeRef& e : p.network.edges) {
    edge_of_qubit[e.a.label] = &e;
    edge_of_qubit[e.b.label] = &e;
  }

  std::map<std::string, int> last_use;
  {
    int step = 0;
    detail::var_last_use(p.instructions, step, last_use);
  }

  std::vector<detail::ExecNode> nodes;
  {
    detail::ExecNode root;
    // Stamp declared node names onto the input register.
    std::vector<Qubit> reg = input.reg();
    for (Qubit& q : reg)
      for (const auto& [l, n] : p.inputs)
        if (q.label == l) q.node = n;
    root.state = StateVector(reg, input.amplitudes());
    nodes.push_back(std::move(root));
  }

  // Bell pairs enter the register on first use. Untouched pairs stay in
  // their own tensor factor, so this is equivalent to starting from the
  // full resource state.
  auto ensure_label = [&](detail::ExecNode& n, const std::string& label) {
    if (n.state.has(label)) return;
    const auto it = edge_of_qubit.find(label);
    if (it == edge_of_qubit.end())
      throw QncError("execute: unknown qubit '" + label + "'");
    n.state.add_bell_pair(it->second->a, it->second->b);
  };

  auto try_merge = [&](const std::set<std::string>& dead) {
    if (dead.empty()) return;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < nodes.size() && !changed; ++i) {
        for (std::size_t j = i + 1; j < nodes.size() && !changed; ++j) {
          detail::ExecNode& a = nodes[i];
          detail::ExecNode& b = nodes[j];
          if (a.free_vars != b.free_vars) continue;
          if (a.order.size() != b.order.size()) continue;
          int diff = -1;
          bool compatible = true;
          for (std::size_t t = 0; t < a.order.size(); ++t) {
            if (a.order[t].first != b.order[t].first) {
              compatible = false;
              break;
            }
            if (a.order[t].second != b.order[t].second) {
              if (diff >= 0 || !dead.count(a.order[t].first)) {
                compatible = false;
                break;
              }
              diff = static_cast<int>(t);
            }
          }
          if (!compatible || diff < 0) continue;
          if (a.state.dim() != b.state.dim() ||
              !(a.state.reg() == b.state.reg()))
            continue;
          const double scale =
              std::max(1.0, a.state.amplitudes().cwiseAbs().maxCoeff());
          if (max_abs(Mat(a.state.amplitudes() - b.state.amplitudes())) >
              opt.merge_tol * scale)
            continue;
          const std::string var = a.order[static_cast<std::size_t>(diff)].first;
          a.free_vars.push_back(var);
          a.order.erase(a.order.begin() + diff);
          a.env.erase(var);
          nodes.erase(nodes.begin() + static_cast<long>(j));
          changed = true;
        }
      }
    }
  };

  int step = 0;
  auto measure_one = [&](const Instruction& ins, const std::string& label,
                         const std::string& var) {
    std::vector<detail::ExecNode> next;
    next.reserve(nodes.size() * 2);
    for (detail::ExecNode& n : nodes) {
      ensure_label(n, label);
      const double parent = n.state.squared_norm();
      for (int outcome = 0; outcome < 2; ++outcome) {
        StateVector child = n.state.measured(label, outcome);
        if (child.squared_norm() <= 1e-18 * parent) continue;
        detail::ExecNode c;
        c.state = std::move(child);
        c.env = n.env;
        c.order = n.order;
        c.free_vars = n.free_vars;
        c.env[var] = outcome;
        c.order.push_back({var, outcome});
        next.push_back(std::move(c));
      }
    }
    (void)ins;
    nodes = std::move(next);
    if (nodes.size() > opt.max_paths)
      throw QncError("execute: branch count exceeded max_paths; "
                     "protocol does not converge under merging");
  };

  for (const Instruction& ins : p.instructions) {
    ++step;
    switch (ins.op) {
      case Instruction::Op::add_ancilla:
        for (detail::ExecNode& n : nodes)
          n.state.add_qubit({ins.labels.at(0), ins.node});
        break;
      case Instruction::Op::local_unitary:
        for (detail::ExecNode& n : nodes) {
          for (const std::string& l : ins.labels) ensure_label(n, l);
          n.state.apply(ins.gate, ins.labels);
        }
        break;
      case Instruction::Op::measure:
        measure_one(ins, ins.labels.at(0), ins.vars.at(0));
        break;
      case Instruction::Op::bell_measure: {
        for (detail::ExecNode& n : nodes) {
          ensure_label(n, ins.labels.at(0));
          ensure_label(n, ins.labels.at(1));
          n.state.apply(cnot(), {ins.labels[0], ins.labels[1]});
          n.state.apply(hadamard(), {ins.labels[0]});
        }
        measure_one(ins, ins.labels.at(0), ins.vars.at(0));
        measure_one(ins, ins.labels.at(1), ins.vars.at(1));
        break;
      }
      case Instruction::Op::classical_send:
        break;  // knowledge flow is a validation concern
      case Instruction::Op::conditional: {
        // Apply the body only on branches whose transcript satisfies the
        // predicate. Bodies cannot measure, so the branch list is stable.
        for (detail::ExecNode& n : nodes) {
          if (!ins.pred.eval(n.env)) continue;
          for (const Instruction& b : ins.body) {
            if (b.op != Instruction::Op::local_unitary)
              throw QncError("execute: conditional bodies are local unitaries");
            for (const std::string& l : b.labels) ensure_label(n, l);
            n.state.apply(b.gate, b.labels);
          }
        }
        // Keep the step counter aligned with the pre-order numbering.
        step += detail::count_steps(ins.body);
        break;
      }
      case Instruction::Op::discard:
        for (detail::ExecNode& n : nodes) {
          ensure_label(n, ins.labels.at(0));
          n.state = n.state.discarded(ins.labels.at(0));
        }
        break;
    }
    // Variables never read after this step are dead; merge branches that
    // differ only in dead bits and agree on the continuation state.
    std::set<std::string> dead;
    for (const detail::ExecNode& n : nodes)
      for (const auto& [v, bit] : n.order) {
        (void)bit;
        const auto it = last_use.find(v);
        if (it == last_use.end() || it->second <= step) dead.insert(v);
      }
    try_merge(dead);
  }

  // Finalize: restrict every branch to the declared outputs.
  std::vector<std::string> out_labels;
  for (const auto& [l, n] : p.outputs) out_labels.push_back(l);
  BranchSet result;
  for (detail::ExecNode& n : nodes) {
    Branch br;
    br.outcomes = n.order;
    br.free_vars = n.free_vars;
    if (n.state.num_qubits() == static_cast<int>(out_labels.size())) {
      br.state = n.state.reordered(out_labels);
    } else {
      // Leftover qubits (e.g. unused halves of materialized pairs) must be
      // in a product state with the outputs.
      const Mat m = n.state.bipartition_matrix(out_labels);
      Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
      const Eigen::VectorXd sv = svd.singularValues();
      if (sv.size() > 1 && sv(1) > 1e-9 * sv(0))
        throw QncError("execute: outputs entangled with leftover qubits");
      std::vector<Qubit> reg;
      for (const auto& [l, node] : p.outputs) reg.push_back({l, node});
      br.state = StateVector(reg, Vec(sv(0) * svd.matrixU().col(0)));
    }
    result.branches.push_back(std::move(br));
  }
  if (std::abs(result.total_probability() - 1.0) > 1e-9)
    throw QncError("execute: branch probabilities do not sum to 1");
  return result;
}

// ---------------------------------------------------------------------------
// Protocol builder with wire bookkeeping and the standard fragments.

struct WireRef {
  std::string label;
  std::string node;
};

class ProtocolBuilder {
 public:
  explicit ProtocolBuilder(Network net) { proto_.network = std::move(net); }

  LoccProtocol& protocol() { return proto_; }

  void declare_input(const std::string& label, const std::string& node) {
    proto_.inputs.push_back({label, node});
  }
  void declare_output(const std::string& label, const std::string& node) {
    proto_.outputs.push_back({label, node});
  }

  std::string fresh_var() { return "m" + std::to_string(var_counter_++); }
  std::string fresh_ancilla() { return "a" + std::to_string(anc_counter_++); }

  void add_ancilla(const std::string& node, const std::string& label) {
    Instruction ins;
    ins.op = Instruction::Op::add_ancilla;
    ins.node = node;
    ins.labels = {label};
    emit(std::move(ins));
  }

  void local(const std::string& node, const std::vector<std::string>& labels,
             const Mat& gate) {
    Instruction ins;
    ins.op = Instruction::Op::local_unitary;
    ins.node = node;
    ins.labels = labels;
    ins.gate = gate;
    emit(std::move(ins));
  }

  std::string measure(const std::string& node, const std::string& label) {
    Instruction ins;
    ins.op = Instruction::Op::measure;
    ins.node = node;
    ins.labels = {label};
    ins.vars = {fresh_var()};
    const std::string var = ins.vars[0];
    emit(std::move(ins));
    return var;
  }

  void send(const std::string& from, const std::string& to,
            const std::string& var) {
    Instruction ins;
    ins.op = Instruction::Op::classical_send;
    ins.from = from;
    ins.to = to;
    ins.node = to;
    ins.vars = {var};
    emit(std::move(ins));
  }

  void conditional_gate(const std::string& node, const std::string& var,
                        const Mat& gate, const std::vector<std::string>& labels) {
    Instruction ins;
    ins.op = Instruction::Op::conditional;
    ins.node = node;
    ins.pred.clauses = {{{var}, 1}};
    Instruction body;
    body.op = Instruction::Op::local_unitary;
    body.node = node;
    body.labels = labels;
    body.gate = gate;
    ins.body.push_back(std::move(body));
    emit(std::move(ins));
  }

  const EdgeRef& consume_edge(const std::string& edge_id) {
    const EdgeRef* e = proto_.network.edge(edge_id);
    if (e == nullptr) throw QncError("consume_edge: no edge '" + edge_id + "'");
    if (consumed_.count(edge_id))
      throw QncError("consume_edge: edge '" + edge_id + "' already consumed");
    consumed_.insert(edge_id);
    proto_.consumed_edges.push_back(edge_id);
    return *e;
  }

  const EdgeRef& consume_cluster_edge(const std::string& cluster_id) {
    const EdgeRef* e = proto_.network.find_cluster_edge(cluster_id);
    if (e == nullptr)
      throw QncError("consume_cluster_edge: no edge maps to '" + cluster_id + "'");
    return consume_edge(e->id);
  }

  // Teleports the state held by `wire` across the Bell pair of `edge`
  // (either direction). The wire re-binds to the far resource qubit.
  WireRef teleport(const WireRef& wire, const EdgeRef& edge) {
    const bool forward = edge.a.node == wire.node;
    if (!forward && edge.b.node != wire.node)
      throw QncError("teleport: edge " + edge.id + " does not touch " + wire.node);
    const Qubit& near = forward ? edge.a : edge.b;
    const Qubit& far = forward ? edge.b : edge.a;

    Instruction bm;
    bm.op = Instruction::Op::bell_measure;
    bm.node = wire.node;
    bm.labels = {wire.label, near.label};
    bm.vars = {fresh_var(), fresh_var()};
    const std::string vz = bm.vars[0], vx = bm.vars[1];
    emit(std::move(bm));
    send(wire.node, far.node, vz);
    send(wire.node, far.node, vx);
    conditional_gate(far.node, vx, pauli_x(), {far.label});
    conditional_gate(far.node, vz, pauli_z(), {far.label});
    return {far.label, far.node};
  }

  WireRef teleport_cluster_path(const WireRef& wire,
                                const std::vector<std::string>& cluster_edges) {
    WireRef cur = wire;
    for (const std::string& ce : cluster_edges)
      cur = teleport(cur, consume_cluster_edge(ce));
    return cur;
  }

  LoccProtocol take() { return std::move(proto_); }

 private:
  void emit(Instruction ins) { proto_.instructions.push_back(std::move(ins)); }

  LoccProtocol proto_;
  std::set<std::string> consumed_;
  int var_counter_ = 0;
  int anc_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Protocol files.

inline nlohmann::json instruction_to_json(const Instruction& ins) {
  nlohmann::json j;
  switch (ins.op) {
    case Instruction::Op::add_ancilla:
      j["op"] = "add_ancilla";
      j["node"] = ins.node;
      j["label"] = ins.labels.at(0);
      break;
    case Instruction::Op::local_unitary:
      j["op"] = "unitary";
      j["node"] = ins.node;
      j["labels"] = ins.labels;
      j["matrix"] = matrix_to_json(ins.gate);
      break;
    case Instruction::Op::measure:
      j["op"] = "measure";
      j["node"] = ins.node;
      j["label"] = ins.labels.at(0);
      j["var"] = ins.vars.at(0);
      break;
    case Instruction::Op::bell_measure:
      j["op"] = "bell_measure";
      j["node"] = ins.node;
      j["labels"] = ins.labels;
      j["vars"] = ins.vars;
      break;
    case Instruction::Op::classical_send:
      j["op"] = "send";
      j["from"] = ins.from;
      j["to"] = ins.to;
      j["var"] = ins.vars.at(0);
      break;
    case Instruction::Op::conditional: {
      j["op"] = "conditional";
      j["node"] = ins.node;
      nlohmann::json clauses = nlohmann::json::array();
      for (const ParityClause& c : ins.pred.clauses)
        clauses.push_back({{"vars", c.vars}, {"parity", c.expected}});
      j["when"] = clauses;
      nlohmann::json body = nlohmann::json::array();
      for (const Instruction& b : ins.body) body.push_back(instruction_to_json(b));
      j["body"] = body;
      break;
    }
    case Instruction::Op::discard:
      j["op"] = "discard";
      j["node"] = ins.node;
      j["label"] = ins.labels.at(0);
      break;
  }
  return j;
}

inline Instruction instruction_from_json(const nlohmann::json& j) {
  Instruction ins;
  const std::string op = j.at("op").get<std::string>();
  if (op == "add_ancilla") {
    ins.op = Instruction::Op::add_ancilla;
    ins.node = j.at("node").get<std::string>();
    ins.labels = {j.at("label").get<std::string>()};
  } else if (op == "unitary") {
    ins.op = Instruction::Op::local_unitary;
    ins.node = j.at("node").get<std::string>();
    ins.labels = j.at("labels").get<std::vector<std::string>>();
    ins.gate = matrix_from_json(j.at("matrix"));
  } else if (op == "measure") {
    ins.op = Instruction::Op::measure;
    ins.node = j.at("node").get<std::string>();
    ins.labels = {j.at("label").get<std::string>()};
    ins.vars = {j.at("var").get<std::string>()};
  } else if (op == "bell_measure") {
    ins.op = Instruction::Op::bell_measure;
    ins.node = j.at("node").get<std::string>();
    ins.labels = j.at("labels").get<std::vector<std::string>>();
    ins.vars = j.at("vars").get<std::vector<std::string>>();
  } else if (op == "send") {
    ins.op = Instruction::Op::classical_send;
    ins.from = j.at("from").get<std::string>();
    ins.to = j.at("to").get<std::string>();
    ins.node = ins.to;
    ins.vars = {j.at("var").get<std::string>()};
  } else if (op == "conditional") {
    ins.op = Instruction::Op::conditional;
    ins.node = j.at("node").get<std::string>();
    for (const auto& c : j.at("when"))
      ins.pred.clauses.push_back(
          {c.at("vars").get<std::vector<std::string>>(), c.at("parity").get<int>()});
    for (const auto& b : j.at("body")) ins.body.push_back(instruction_from_json(b));
  } else if (op == "discard") {
    ins.op = Instruction::Op::discard;
    ins.node = j.at("node").get<std::string>();
    ins.labels = {j.at("label").get<std::string>()};
  } else {
    throw QncError("instruction_from_json: unknown op '" + op + "'");
  }
  return ins;
}

inline nlohmann::json protocol_to_json(const LoccProtocol& p) {
  nlohmann::json j;
  j["network"] = network_to_json(p.network);
  nlohmann::json ins = nlohmann::json::array();
  for (const Instruction& i : p.instructions) ins.push_back(instruction_to_json(i));
  j["instructions"] = ins;
  auto pairs = [](const std::vector<std::pair<std::string, std::string>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [l, n] : v) arr.push_back({l, n});
    return arr;
  };
  j["inputs"] = pairs(p.inputs);
  j["outputs"] = pairs(p.outputs);
  j["consumed_edges"] = p.consumed_edges;
  return j;
}

inline LoccProtocol protocol_from_json(const nlohmann::json& j) {
  LoccProtocol p;
  p.network = network_from_json(j.at("network"));
  for (const auto& i : j.at("instructions"))
    p.instructions.push_back(instruction_from_json(i));
  for (const auto& pr : j.at("inputs"))
    p.inputs.push_back({pr.at(0).get<std::string>(), pr.at(1).get<std::string>()});
  for (const auto& pr : j.at("outputs"))
    p.outputs.push_back({pr.at(0).get<std::string>(), pr.at(1).get<std::string>()});
  p.consumed_edges = j.at("consumed_edges").get<std::vector<std::string>>();
  return p;
}

// ---------------------------------------------------------------------------
// Controlled gates over one column of a cluster-shaped network. Implements
// C_{l,m;n} (controls on rows l and m, target on row n, l < n < m or
// m < n < l) and the two-qubit special case l == m. Consumes exactly the
// vertical Bell pairs between min and max row: |l - n| + |m - n| pairs.

struct ColumnGate {
  int l = 0, m = 0, n = 0;   // rows; l == m means two-qubit controlled gate
  std::vector<Mat> targets;  // 2 entries for l == m, else 4 (index = 2a + b)
  int column = 1;
};

namespace detail {

inline std::vector<std::string> vertical_path(int from_row, int to_row, int j) {
  std::vector<std::string> edges;
  const int lo = std::min(from_row, to_row), hi = std::max(from_row, to_row);
  if (from_row < to_row) {
    for (int r = lo; r < hi; ++r)
      edges.push_back("S:" + std::to_string(r) + "," + std::to_string(j));
  } else {
    for (int r = hi - 1; r >= lo; --r)
      edges.push_back("S:" + std::to_string(r) + "," + std::to_string(j));
  }
  return edges;
}

}  // namespace detail

// Emits the column-local protocol for one controlled gate: entangle an
// ancilla with each control, teleport the ancillas to the target node, apply
// the gate there with the ancillas as controls, then decouple them with
// X-basis measurements and conditional Z corrections at the control nodes.
inline void emit_column_gate(ProtocolBuilder& b, std::vector<WireRef>& wires,
                             const ColumnGate& g) {
  const int k = static_cast<int>(wires.size());
  auto wire_at = [&](int row) -> WireRef& {
    if (row < 1 || row > k) throw QncError("emit_column_gate: row out of range");
    return wires[static_cast<std::size_t>(row - 1)];
  };
  const bool two_qubit = g.l == g.m;
  if (two_qubit) {
    if (g.targets.size() != 2)
      throw QncError("emit_column_gate: two-qubit gate needs 2 target blocks");
    if (g.l == g.n) throw QncError("emit_column_gate: control equals target");
  } else {
    if (g.targets.size() != 4)
      throw QncError("emit_column_gate: three-qubit gate needs 4 target blocks");
    if (!((g.l < g.n && g.n < g.m) || (g.m < g.n && g.n < g.l)))
      throw QncError("emit_column_gate: rows must satisfy l < n < m or m < n < l");
  }

  auto route_control = [&](int row) -> std::pair<WireRef, std::string> {
    WireRef& ctrl = wire_at(row);
    const std::string anc = b.fresh_ancilla();
    b.add_ancilla(ctrl.node, anc);
    b.local(ctrl.node, {ctrl.label, anc}, cnot());
    WireRef copy{anc, ctrl.node};
    copy = b.teleport_cluster_path(copy, detail::vertical_path(row, g.n, g.column));
    return {copy, ctrl.node};
  };

  const WireRef& target = wire_at(g.n);
  if (two_qubit) {
    const auto [copy, ctrl_node] = route_control(g.l);
    b.local(target.node, {copy.label, target.label},
            controlled_gate(g.targets[0], g.targets[1]));
    b.local(target.node, {copy.label}, hadamard());
    const std::string v = b.measure(target.node, copy.label);
    b.send(target.node, ctrl_node, v);
    b.conditional_gate(ctrl_node, v, pauli_z(), {wire_at(g.l).label});
  } else {
    const auto [copy_l, node_l] = route_control(g.l);
    const auto [copy_m, node_m] = route_control(g.m);
    b.local(target.node, {copy_l.label, copy_m.label, target.label},
            fully_controlled_gate(g.targets[0], g.targets[1], g.targets[2],
                                  g.targets[3]));
    for (const auto& [copy, ctrl_node, row] :
         {std::tuple{copy_l, node_l, g.l}, std::tuple{copy_m, node_m, g.m}}) {
      b.local(target.node, {copy.label}, hadamard());
      const std::string v = b.measure(target.node, copy.label);
      b.send(target.node, ctrl_node, v);
      b.conditional_gate(ctrl_node, v, pauli_z(), {wire_at(row).label});
    }
  }
}

}  // namespace qnc
