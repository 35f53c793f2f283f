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

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qnc/decompositions.hpp"
#include "qnc/linalg.hpp"
#include "qnc/locc.hpp"
#include "qnc/network.hpp"

namespace qnc {

// ---------------------------------------------------------------------------
// Controlled-gate descriptors on k wires. (a,b;c) has controls on wires a
// and b and target unitaries on wire c; a == b denotes the two-qubit gate.
// Three-qubit gates require a < c < b or b < c < a.

struct ControlledGateDesc {
  int a = 0, b = 0, c = 0;
  std::vector<Mat> targets;  // 2 blocks for a == b, else 4 (index 2*va + vb)

  bool two_qubit() const { return a == b; }
};

// Dense matrix of one gate on k wires (wire 1 = most significant bit).
inline Mat gate_on_wires(const ControlledGateDesc& g, int k) {
  Mat core;
  std::vector<int> order;
  if (g.two_qubit()) {
    if (g.targets.size() != 2) throw QncError("gate_on_wires: need 2 blocks");
    core = controlled_gate(g.targets[0], g.targets[1]);
    order = {g.a - 1, g.c - 1};
  } else {
    if (g.targets.size() != 4) throw QncError("gate_on_wires: need 4 blocks");
    core = fully_controlled_gate(g.targets[0], g.targets[1], g.targets[2],
                                 g.targets[3]);
    order = {g.a - 1, g.b - 1, g.c - 1};
  }
  for (int q = 0; q < k; ++q)
    if (std::find(order.begin(), order.end(), q) == order.end())
      order.push_back(q);
  const Mat perm = qubit_permutation(k, order);
  const Eigen::Index rest = (Eigen::Index{1} << k) / core.rows();
  return perm.adjoint() * kron(core, Mat(Mat::Identity(rest, rest))) * perm;
}

inline Mat segment_unitary(const std::vector<ControlledGateDesc>& gates, int k) {
  Mat u = Mat::Identity(Eigen::Index{1} << k, Eigen::Index{1} << k);
  for (const ControlledGateDesc& g : gates) u = gate_on_wires(g, k) * u;
  return u;
}

// ---------------------------------------------------------------------------
// Segment legality. A sequence is accepted iff it can be produced by the
// drawing rules: between two adjacent wires only one control index may
// appear, and on a single wire no target box may sit between two control
// dots.

struct SegmentViolation {
  int gate_index = -1;  // offending gate (position in the sequence)
  std::string rule;     // "index-range" | "index-order" | "region-index" |
                        // "box-between-dots"
  std::string message;
};

struct SegmentCheck {
  std::vector<SegmentViolation> violations;
  bool ok() const { return violations.empty(); }
};

inline SegmentCheck validate_segment(const std::vector<ControlledGateDesc>& gates,
                                     int k) {
  SegmentCheck check;
  auto flag = [&](int idx, const std::string& rule, const std::string& msg) {
    check.violations.push_back({idx, rule, msg});
  };
  std::map<int, int> region_index;        // region r (wires r, r+1) -> index
  std::vector<bool> saw_dot(static_cast<std::size_t>(k) + 1, false);
  std::vector<bool> dot_then_box(static_cast<std::size_t>(k) + 1, false);

  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const ControlledGateDesc& g = gates[gi];
    const int idx = static_cast<int>(gi);
    const auto in_range = [&](int w) { return w >= 1 && w <= k; };
    if (!in_range(g.a) || !in_range(g.b) || !in_range(g.c)) {
      flag(idx, "index-range", "wire index out of range");
      continue;
    }
    if (g.two_qubit()) {
      if (g.a == g.c) {
        flag(idx, "index-order", "control equals target");
        continue;
      }
    } else if (!((g.a < g.c && g.c < g.b) || (g.b < g.c && g.c < g.a))) {
      flag(idx, "index-order",
           "three-qubit gate needs a < c < b or b < c < a");
      continue;
    }

    auto claim_regions = [&](int ctrl) {
      const int lo = std::min(ctrl, g.c), hi = std::max(ctrl, g.c);
      for (int r = lo; r < hi; ++r) {
        const auto it = region_index.find(r);
        if (it == region_index.end()) {
          region_index[r] = ctrl;
        } else if (it->second != ctrl) {
          flag(idx, "region-index",
               "region between wires " + std::to_string(r) + " and " +
                   std::to_string(r + 1) + " already carries index " +
                   std::to_string(it->second));
        }
      }
    };
    claim_regions(g.a);
    if (!g.two_qubit()) claim_regions(g.b);

    for (const int ctrl : g.two_qubit() ? std::vector<int>{g.a}
                                        : std::vector<int>{g.a, g.b}) {
      if (dot_then_box[static_cast<std::size_t>(ctrl)])
        flag(idx, "box-between-dots",
             "wire " + std::to_string(ctrl) +
                 " has a target box between two control dots");
      saw_dot[static_cast<std::size_t>(ctrl)] = true;
    }
    if (saw_dot[static_cast<std::size_t>(g.c)])
      dot_then_box[static_cast<std::size_t>(g.c)] = true;
  }
  return check;
}

// ---------------------------------------------------------------------------
// Control sets and ranges. C_i collects the gates controlled by wire i;
// range(C_i) spans from min(i, targets) to max(i, targets). For legal
// sequences the ranges of distinct control wires have disjoint interiors and
// sum to at most k-1 consumed vertical pairs.

struct ControlRanges {
  std::map<int, std::vector<int>> sets;        // wire -> gate indices
  std::map<int, std::pair<int, int>> ranges;   // wire -> (a, b)
  bool ranges_disjoint = true;

  int pair_cost() const {
    int cost = 0;
    for (const auto& [w, r] : ranges) cost += r.second - r.first;
    return cost;
  }
};

inline ControlRanges control_sets_and_ranges(
    const std::vector<ControlledGateDesc>& gates, int k) {
  const SegmentCheck check = validate_segment(gates, k);
  if (!check.ok())
    throw QncError("control_sets_and_ranges: segment is not legal: " +
                   check.violations.front().message);
  ControlRanges out;
  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const ControlledGateDesc& g = gates[gi];
    out.sets[g.a].push_back(static_cast<int>(gi));
    if (!g.two_qubit() && g.b != g.a)
      out.sets[g.b].push_back(static_cast<int>(gi));
  }
  for (const auto& [wire, members] : out.sets) {
    int lo = wire, hi = wire;
    for (const int gi : members) {
      lo = std::min(lo, gates[static_cast<std::size_t>(gi)].c);
      hi = std::max(hi, gates[static_cast<std::size_t>(gi)].c);
    }
    out.ranges[wire] = {lo, hi};
  }
  for (auto it = out.ranges.begin(); it != out.ranges.end(); ++it)
    for (auto jt = std::next(it); jt != out.ranges.end(); ++jt)
      if (std::max(it->second.first, jt->second.first) <
          std::min(it->second.second, jt->second.second))
        out.ranges_disjoint = false;
  return out;
}

// ---------------------------------------------------------------------------
// LOCC compilation of a whole segment. One ancilla copy chain per control
// wire reaches every target node of that wire; copies decouple right after
// the last gate of their control set, so later boxes on the control wire
// cannot interfere.

struct SegmentCompilation {
  int vertical_pairs_consumed = 0;
};

inline SegmentCompilation compile_segment(
    ProtocolBuilder& b, std::vector<WireRef>& wires, int column,
    const std::vector<ControlledGateDesc>& gates) {
  const int k = static_cast<int>(wires.size());
  const SegmentCheck check = validate_segment(gates, k);
  if (!check.ok())
    throw QncError("compile_segment: segment is not legal: " +
                   check.violations.front().message);
  const ControlRanges cr = control_sets_and_ranges(gates, k);
  if (!cr.ranges_disjoint)
    throw QncError("compile_segment: control ranges overlap");

  auto wire_at = [&](int row) -> WireRef& {
    return wires[static_cast<std::size_t>(row - 1)];
  };
  // Copies of control-wire states parked at target nodes.
  std::map<std::pair<int, int>, WireRef> copies;  // (control wire, row)
  std::map<int, int> last_gate_of;                // control wire -> gate index
  for (const auto& [w, members] : cr.sets) last_gate_of[w] = members.back();
  std::set<int> routed;
  SegmentCompilation result;

  auto route_copies = [&](int w) {
    if (routed.count(w)) return;
    routed.insert(w);
    std::set<int> target_rows;
    for (const int gi : cr.sets.at(w))
      target_rows.insert(gates[static_cast<std::size_t>(gi)].c);
    auto route_side = [&](std::vector<int> rows_in_order) {
      if (rows_in_order.empty()) return;
      const std::string anc = b.fresh_ancilla();
      b.add_ancilla(wire_at(w).node, anc);
      b.local(wire_at(w).node, {wire_at(w).label, anc}, cnot());
      WireRef travelling{anc, wire_at(w).node};
      int at = w;
      for (std::size_t t = 0; t < rows_in_order.size(); ++t) {
        const int dest = rows_in_order[t];
        travelling = b.teleport_cluster_path(
            travelling, detail::vertical_path(at, dest, column));
        result.vertical_pairs_consumed += std::abs(dest - at);
        at = dest;
        if (t + 1 < rows_in_order.size()) {
          // Park a copy here and keep travelling with a fresh one.
          const std::string fresh = b.fresh_ancilla();
          b.add_ancilla(travelling.node, fresh);
          b.local(travelling.node, {travelling.label, fresh}, cnot());
          copies[{w, dest}] = travelling;
          travelling = {fresh, travelling.node};
        } else {
          copies[{w, dest}] = travelling;
        }
      }
    };
    std::vector<int> down, up;
    for (const int r : target_rows)
      (r < w ? down : up).push_back(r);
    std::sort(down.rbegin(), down.rend());  // nearest first, descending rows
    std::sort(up.begin(), up.end());
    route_side(down);
    route_side(up);
  };

  auto decouple = [&](int w) {
    for (auto it = copies.begin(); it != copies.end();) {
      if (it->first.first != w) {
        ++it;
        continue;
      }
      const WireRef& copy = it->second;
      b.local(copy.node, {copy.label}, hadamard());
      const std::string v = b.measure(copy.node, copy.label);
      b.send(copy.node, wire_at(w).node, v);
      b.conditional_gate(wire_at(w).node, v, pauli_z(), {wire_at(w).label});
      it = copies.erase(it);
    }
  };

  for (std::size_t gi = 0; gi < gates.size(); ++gi) {
    const ControlledGateDesc& g = gates[gi];
    route_copies(g.a);
    if (!g.two_qubit()) route_copies(g.b);
    const WireRef& target = wire_at(g.c);
    if (g.two_qubit()) {
      const WireRef& copy = copies.at({g.a, g.c});
      b.local(target.node, {copy.label, target.label},
              controlled_gate(g.targets[0], g.targets[1]));
    } else {
      const WireRef& copy_a = copies.at({g.a, g.c});
      const WireRef& copy_b = copies.at({g.b, g.c});
      b.local(target.node, {copy_a.label, copy_b.label, target.label},
              fully_controlled_gate(g.targets[0], g.targets[1], g.targets[2],
                                    g.targets[3]));
    }
    for (const int w : g.two_qubit() ? std::vector<int>{g.a}
                                     : std::vector<int>{g.a, g.b})
      if (last_gate_of.at(w) == static_cast<int>(gi)) decouple(w);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Converted circuits: per column a pre-local layer, a gate sequence and a
// post-local layer.

struct CircuitColumn {
  std::vector<Mat> pre;   // k single-qubit gates (empty = identity layer)
  std::vector<ControlledGateDesc> gates;
  std::vector<Mat> post;
};

struct ConvertedCircuit {
  int wires = 0;
  std::vector<CircuitColumn> columns;

  Mat unitary() const {
    const Eigen::Index d = Eigen::Index{1} << wires;
    Mat u = Mat::Identity(d, d);
    for (const CircuitColumn& col : columns) {
      if (!col.pre.empty()) u = local_layer(col.pre) * u;
      u = segment_unitary(col.gates, wires) * u;
      if (!col.post.empty()) u = local_layer(col.post) * u;
    }
    return u;
  }

  Mat local_layer(const std::vector<Mat>& locals) const {
    if (static_cast<int>(locals.size()) != wires)
      throw QncError("ConvertedCircuit: local layer needs one gate per wire");
    Mat layer = locals[0];
    for (int i = 1; i < wires; ++i)
      layer = kron(layer, locals[static_cast<std::size_t>(i)]);
    return layer;
  }
};

inline SegmentCheck validate_circuit(const ConvertedCircuit& c) {
  SegmentCheck all;
  for (const CircuitColumn& col : c.columns) {
    const SegmentCheck one = validate_segment(col.gates, c.wires);
    all.violations.insert(all.violations.end(), one.violations.begin(),
                          one.violations.end());
  }
  return all;
}

// ---------------------------------------------------------------------------
// Standard forms. Every converted circuit on 2 wires reduces to one
// controlled gate per column, and on 3 wires to one fully controlled gate
// with controls on the outer wires, in both cases padded by local layers.

struct StandardFormSlot {
  std::vector<Mat> pre;      // k entries, applied before the gate
  std::vector<Mat> targets;  // 2 (k = 2) or 4 (k = 3) target blocks
  std::vector<Mat> post;     // k entries
};

struct StandardForm {
  int k = 0, n = 0;
  std::vector<StandardFormSlot> slots;

  Mat slot_unitary(const StandardFormSlot& s) const {
    Mat pre = s.pre[0], post = s.post[0];
    for (int i = 1; i < k; ++i) {
      pre = kron(pre, s.pre[static_cast<std::size_t>(i)]);
      post = kron(post, s.post[static_cast<std::size_t>(i)]);
    }
    Mat gate;
    if (k == 2)
      gate = controlled_gate(s.targets[0], s.targets[1]);
    else
      gate = fully_controlled_middle(s.targets[0], s.targets[1], s.targets[2],
                                     s.targets[3]);
    return post * gate * pre;
  }

  Mat unitary() const {
    const Eigen::Index d = Eigen::Index{1} << k;
    Mat u = Mat::Identity(d, d);
    for (const StandardFormSlot& s : slots) u = slot_unitary(s) * u;
    return u;
  }
};

inline StandardForm standard_form(int k, int n) {
  if (k != 2 && k != 3)
    throw QncError("standard_form: only known for 2 and 3 wires");
  if (n < 1) throw QncError("standard_form: need at least one column");
  StandardForm f;
  f.k = k;
  f.n = n;
  for (int j = 0; j < n; ++j) {
    StandardFormSlot s;
    s.pre.assign(static_cast<std::size_t>(k), pauli_i());
    s.post.assign(static_cast<std::size_t>(k), pauli_i());
    s.targets.assign(k == 2 ? 2 : 4, pauli_i());
    f.slots.push_back(std::move(s));
  }
  return f;
}

// Rewrites a valid converted circuit column by column into the standard
// form; the result reproduces the circuit's unitary up to global phase.
inline StandardForm simulate_by_standard_form(const ConvertedCircuit& c) {
  if (c.wires != 2 && c.wires != 3)
    throw QncError("simulate_by_standard_form: only 2 or 3 wires");
  const SegmentCheck check = validate_circuit(c);
  if (!check.ok())
    throw QncError("simulate_by_standard_form: circuit is not legal: " +
                   check.violations.front().message);
  StandardForm f = standard_form(c.wires, std::max<int>(1, static_cast<int>(c.columns.size())));
  for (std::size_t j = 0; j < c.columns.size(); ++j) {
    const CircuitColumn& col = c.columns[j];
    Mat w = segment_unitary(col.gates, c.wires);
    if (!col.pre.empty()) w = w * c.local_layer(col.pre);
    if (!col.post.empty()) w = c.local_layer(col.post) * w;
    StandardFormSlot& slot = f.slots[j];
    if (c.wires == 2) {
      const auto form = extract_controlled(w, 1e-8);
      if (!form)
        throw QncError("simulate_by_standard_form: column has no controlled form");
      slot.pre = {form->beta.adjoint(), pauli_i()};
      slot.targets = {form->w[0], form->w[1]};
      slot.post = {form->alpha, pauli_i()};
    } else {
      const auto form = extract_fully_controlled(w, 1e-8);
      if (!form)
        throw QncError(
            "simulate_by_standard_form: column has no fully controlled form");
      slot.pre = {form->beta.adjoint(), pauli_i(), form->delta.adjoint()};
      slot.targets = {form->w[0][0], form->w[0][1], form->w[1][0],
                      form->w[1][1]};
      slot.post = {form->alpha, pauli_i(), form->gamma};
    }
  }
  if (distance_up_to_phase(f.unitary(), c.unitary()) > 1e-9)
    throw QncError("simulate_by_standard_form: round trip check failed");
  return f;
}

// ---------------------------------------------------------------------------
// Random legal circuits for property tests: rejection-free incremental
// sampling over the gates that keep the segment legal.

inline std::vector<ControlledGateDesc> random_segment(Rng& rng, int k,
                                                      int max_gates) {
  std::vector<ControlledGateDesc> all;
  for (int a = 1; a <= k; ++a)
    for (int c = 1; c <= k; ++c)
      if (a != c) all.push_back({a, a, c, {}});
  for (int l = 1; l <= k; ++l)
    for (int n = l + 1; n <= k; ++n)
      for (int m = n + 1; m <= k; ++m) {
        all.push_back({l, m, n, {}});
        all.push_back({m, l, n, {}});
      }
  std::vector<ControlledGateDesc> seq;
  const int want = static_cast<int>(rng.uniform() * (max_gates + 1));
  for (int t = 0; t < want; ++t) {
    std::vector<ControlledGateDesc> legal;
    for (const ControlledGateDesc& cand : all) {
      std::vector<ControlledGateDesc> trial = seq;
      trial.push_back(cand);
      if (validate_segment(trial, k).ok()) legal.push_back(cand);
    }
    if (legal.empty()) break;
    ControlledGateDesc pick =
        legal[static_cast<std::size_t>(rng.uniform() * legal.size()) %
              legal.size()];
    const std::size_t blocks = pick.two_qubit() ? 2 : 4;
    for (std::size_t i = 0; i < blocks; ++i)
      pick.targets.push_back(rng.haar_unitary(2));
    seq.push_back(std::move(pick));
  }
  return seq;
}

inline ConvertedCircuit random_circuit(Rng& rng, int k, int n,
                                       int max_gates_per_column,
                                       bool with_locals) {
  ConvertedCircuit c;
  c.wires = k;
  for (int j = 0; j < n; ++j) {
    CircuitColumn col;
    col.gates = random_segment(rng, k, max_gates_per_column);
    if (with_locals) {
      for (int i = 0; i < k; ++i) {
        col.pre.push_back(rng.haar_unitary(2));
        col.post.push_back(rng.haar_unitary(2));
      }
    }
    c.columns.push_back(std::move(col));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Circuit files and diagram export.

inline nlohmann::json circuit_to_json(const ConvertedCircuit& c) {
  nlohmann::json j;
  j["wires"] = c.wires;
  nlohmann::json cols = nlohmann::json::array();
  for (const CircuitColumn& col : c.columns) {
    nlohmann::json jc;
    nlohmann::json gates = nlohmann::json::array();
    for (const ControlledGateDesc& g : col.gates) {
      nlohmann::json jg;
      jg["ctrl"] = {g.a, g.b};
      jg["tgt"] = g.c;
      nlohmann::json u;
      if (g.two_qubit()) {
        u["0"] = matrix_to_json(g.targets[0]);
        u["1"] = matrix_to_json(g.targets[1]);
      } else {
        u["00"] = matrix_to_json(g.targets[0]);
        u["01"] = matrix_to_json(g.targets[1]);
        u["10"] = matrix_to_json(g.targets[2]);
        u["11"] = matrix_to_json(g.targets[3]);
      }
      jg["u"] = u;
      gates.push_back(jg);
    }
    jc["gates"] = gates;
    auto layer = [](const std::vector<Mat>& locals) {
      nlohmann::json arr = nlohmann::json::array();
      for (const Mat& m : locals) arr.push_back(matrix_to_json(m));
      return arr;
    };
    if (!col.pre.empty()) jc["pre"] = layer(col.pre);
    if (!col.post.empty()) jc["post"] = layer(col.post);
    cols.push_back(jc);
  }
  j["columns"] = cols;
  return j;
}

inline ConvertedCircuit circuit_from_json(const nlohmann::json& j) {
  ConvertedCircuit c;
  c.wires = j.at("wires").get<int>();
  for (const auto& jc : j.at("columns")) {
    CircuitColumn col;
    for (const auto& jg : jc.at("gates")) {
      ControlledGateDesc g;
      g.a = jg.at("ctrl").at(0).get<int>();
      g.b = jg.at("ctrl").at(1).get<int>();
      g.c = jg.at("tgt").get<int>();
      const auto& u = jg.at("u");
      if (g.two_qubit()) {
        g.targets = {matrix_from_json(u.at("0")), matrix_from_json(u.at("1"))};
      } else {
        g.targets = {matrix_from_json(u.at("00")), matrix_from_json(u.at("01")),
                     matrix_from_json(u.at("10")), matrix_from_json(u.at("11"))};
      }
      col.gates.push_back(std::move(g));
    }
    auto layer = [&](const char* key, std::vector<Mat>& out) {
      if (!jc.contains(key)) return;
      for (const auto& jm : jc.at(key)) out.push_back(matrix_from_json(jm));
    };
    layer("pre", col.pre);
    layer("post", col.post);
    c.columns.push_back(std::move(col));
  }
  return c;
}

inline std::string circuit_to_dot(const ConvertedCircuit& c) {
  std::ostringstream os;
  os << "digraph circuit {\n  rankdir=LR;\n  node [shape=plaintext];\n";
  for (int w = 1; w <= c.wires; ++w) {
    os << "  w" << w << "_in [label=\"wire " << w << "\"];\n";
  }
  int t = 0;
  std::vector<std::string> prev(static_cast<std::size_t>(c.wires));
  for (int w = 1; w <= c.wires; ++w)
    prev[static_cast<std::size_t>(w - 1)] = "w" + std::to_string(w) + "_in";
  for (std::size_t j = 0; j < c.columns.size(); ++j) {
    for (const ControlledGateDesc& g : c.columns[j].gates) {
      ++t;
      const std::string box = "g" + std::to_string(t);
      os << "  " << box << " [shape=box,label=\"(" << g.a << "," << g.b << ";"
         << g.c << ") col " << (j + 1) << "\"];\n";
      os << "  " << prev[static_cast<std::size_t>(g.c - 1)] << " -> " << box
         << ";\n";
      prev[static_cast<std::size_t>(g.c - 1)] = box;
      for (const int ctrl : g.two_qubit() ? std::vector<int>{g.a}
                                          : std::vector<int>{g.a, g.b}) {
        ++t;
        const std::string dot = "d" + std::to_string(t);
        os << "  " << dot << " [shape=point];\n";
        os << "  " << prev[static_cast<std::size_t>(ctrl - 1)] << " -> " << dot
           << ";\n";
        os << "  " << dot << " -> " << box << " [style=dashed];\n";
        prev[static_cast<std::size_t>(ctrl - 1)] = dot;
      }
    }
  }
  for (int w = 1; w <= c.wires; ++w) {
    os << "  w" << w << "_out [label=\"out " << w << "\"];\n";
    os << "  " << prev[static_cast<std::size_t>(w - 1)] << " -> w" << w
       << "_out;\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace qnc
