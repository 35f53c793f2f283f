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
#include <string>
#include <utility>
#include <vector>

#include "qnc/linalg.hpp"

namespace qnc {

// A labeled qubit. The node records where the qubit physically lives; it is
// fixed at creation and never moves (teleportation re-binds labels at the
// receiving node instead of moving qubits).
struct Qubit {
  std::string label;
  std::string node;

  friend bool operator==(const Qubit& a, const Qubit& b) {
    return a.label == b.label && a.node == b.node;
  }
};

// Dense state vector over an ordered register of labeled qubits. Amplitudes
// are big-endian: the first register qubit is the most significant bit of the
// basis index. Values are immutable in spirit; mutating ops return copies
// except where noted.
class StateVector {
 public:
  StateVector() : amps_(Vec::Ones(1)) {}

  StateVector(std::vector<Qubit> reg, Vec amps)
      : reg_(std::move(reg)), amps_(std::move(amps)) {
    if (amps_.size() != (Eigen::Index{1} << reg_.size()))
      throw QncError("StateVector: amplitude count does not match register");
    check_labels_unique();
  }

  // All qubits in |0>.
  static StateVector zeros(std::vector<Qubit> reg) {
    Vec v = Vec::Zero(Eigen::Index{1} << reg.size());
    v(0) = 1;
    return StateVector(std::move(reg), std::move(v));
  }

  const std::vector<Qubit>& reg() const { return reg_; }
  const Vec& amplitudes() const { return amps_; }
  int num_qubits() const { return static_cast<int>(reg_.size()); }
  Eigen::Index dim() const { return amps_.size(); }
  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }

  bool has(const std::string& label) const {
    return find_index(label) >= 0;
  }

  int position(const std::string& label) const {
    const int p = find_index(label);
    if (p < 0) throw QncError("unknown qubit label '" + label + "'");
    return p;
  }

  const Qubit& qubit(const std::string& label) const {
    return reg_[static_cast<std::size_t>(position(label))];
  }

  // Appends a fresh qubit in state `init` (defaults to |0>).
  void add_qubit(const Qubit& q, const Vec& init = Vec()) {
    if (has(q.label)) throw QncError("duplicate qubit label '" + q.label + "'");
    Vec local = init.size() == 0 ? Vec::Unit(2, 0) : init;
    if (local.size() != 2) throw QncError("add_qubit: init must have 2 amps");
    amps_ = kron(amps_, local);
    reg_.push_back(q);
  }

  // Appends two qubits in the Bell state (|00>+|11>)/sqrt(2).
  void add_bell_pair(const Qubit& a, const Qubit& b) {
    if (has(a.label) || has(b.label))
      throw QncError("duplicate qubit label in Bell pair");
    Vec bell = bell_state(0);
    amps_ = kron(amps_, bell);
    reg_.push_back(a);
    reg_.push_back(b);
  }

  // Applies `gate` to the listed qubits (first label = most significant bit
  // of the gate's index). Unitarity is enforced unless `require_unit` is
  // false (projections and Kraus-style operators used internally).
  void apply(const Mat& gate, const std::vector<std::string>& labels,
             bool require_unit = true) {
    const int a = static_cast<int>(labels.size());
    if (gate.rows() != gate.cols() ||
        gate.rows() != (Eigen::Index{1} << a))
      throw QncError("apply: gate dimension does not match target count");
    if (require_unit) require_unitary(gate, "apply");
    std::vector<int> pos(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      pos[i] = position(labels[i]);
      for (std::size_t k = 0; k < i; ++k)
        if (pos[k] == pos[i]) throw QncError("apply: duplicate target label");
    }
    const int n = num_qubits();
    // Bit for register position p is bit (n-1-p) of the basis index.
    std::vector<Eigen::Index> tbit(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
      tbit[i] = Eigen::Index{1} << (n - 1 - pos[i]);
    Eigen::Index tmask = 0;
    for (const auto b : tbit) tmask |= b;

    const Eigen::Index d = dim();
    const Eigen::Index sub = Eigen::Index{1} << a;
    Vec scratch(sub);
    for (Eigen::Index base = 0; base < d; ++base) {
      if ((base & tmask) != 0) continue;  // iterate target-cleared indices
      for (Eigen::Index g = 0; g < sub; ++g) {
        Eigen::Index idx = base;
        for (int i = 0; i < a; ++i)
          if ((g >> (a - 1 - i)) & 1) idx |= tbit[static_cast<std::size_t>(i)];
        scratch(g) = amps_(idx);
      }
      scratch = gate * scratch;
      for (Eigen::Index g = 0; g < sub; ++g) {
        Eigen::Index idx = base;
        for (int i = 0; i < a; ++i)
          if ((g >> (a - 1 - i)) & 1) idx |= tbit[static_cast<std::size_t>(i)];
        amps_(idx) = scratch(g);
      }
    }
  }

  // Projects `label` onto |outcome> and removes it from the register. The
  // result is unnormalized; its squared norm is the branch probability times
  // the squared norm of *this.
  StateVector measured(const std::string& label, int outcome) const {
    const int p = position(label);
    const int n = num_qubits();
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - p);
    std::vector<Qubit> reg;
    reg.reserve(reg_.size() - 1);
    for (int i = 0; i < n; ++i)
      if (i != p) reg.push_back(reg_[static_cast<std::size_t>(i)]);
    Vec out(dim() / 2);
    Eigen::Index w = 0;
    for (Eigen::Index idx = 0; idx < dim(); ++idx) {
      if (((idx & bit) != 0) != (outcome != 0)) continue;
      out(w++) = amps_(idx);
    }
    return StateVector(std::move(reg), std::move(out));
  }

  // Removes a qubit that is in a product state with the rest. Errors if it
  // is still entangled (relative tolerance on the Schmidt spectrum).
  StateVector discarded(const std::string& label) const {
    const int p = position(label);
    StateVector s0 = measured(label, 0);
    StateVector s1 = measured(label, 1);
    const double n0 = s0.squared_norm(), n1 = s1.squared_norm();
    (void)p;
    // Product iff the two slices are parallel (or one vanishes).
    if (n0 <= 1e-24 * (n0 + n1)) return s1;
    if (n1 <= 1e-24 * (n0 + n1)) return s0;
    const Complex ov = s0.amps_.dot(s1.amps_);
    if (std::abs(std::norm(ov) - n0 * n1) > 1e-20 * n0 * n1)
      throw QncError("discard: qubit '" + label + "' is still entangled");
    // Recombine the parallel slices to keep the overall norm and phase.
    Vec merged = s0.amps_ + s1.amps_;
    merged *= std::sqrt((n0 + n1) / merged.squaredNorm());
    // Align global phase with the dominant slice.
    return StateVector(s0.reg_, std::move(merged));
  }

  // Returns the state with the register permuted to `order` (which must be a
  // permutation of a subset == all current labels).
  StateVector reordered(const std::vector<std::string>& order) const {
    if (order.size() != reg_.size())
      throw QncError("reordered: order must list every register label");
    const int n = num_qubits();
    std::vector<int> src(order.size());
    std::vector<bool> seen(order.size(), false);
    std::vector<Qubit> reg;
    reg.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int p = position(order[i]);
      if (seen[static_cast<std::size_t>(p)])
        throw QncError("reordered: duplicate label in order");
      seen[static_cast<std::size_t>(p)] = true;
      src[i] = p;
      reg.push_back(reg_[static_cast<std::size_t>(p)]);
    }
    Vec out(dim());
    for (Eigen::Index idx = 0; idx < dim(); ++idx) {
      Eigen::Index nidx = 0;
      for (int i = 0; i < n; ++i) {
        const Eigen::Index b =
            (idx >> (n - 1 - src[static_cast<std::size_t>(i)])) & 1;
        nidx |= b << (n - 1 - i);
      }
      out(nidx) = amps_(idx);
    }
    return StateVector(std::move(reg), std::move(out));
  }

  // Reduced density matrix on `keep` (in the order given), tracing out the
  // rest. Input need not be normalized; trace equals the squared norm.
  Mat partial_trace(const std::vector<std::string>& keep) const {
    if (keep.empty()) throw QncError("partial_trace: empty keep set");
    const Mat m = bipartition_matrix(keep);
    return m * m.adjoint();
  }

  // Reshapes amplitudes into a (2^|labels_a|) x (2^rest) matrix with the
  // given labels as row index (in the order given) and the remaining
  // register qubits, in register order, as column index.
  Mat bipartition_matrix(const std::vector<std::string>& labels_a) const {
    std::vector<std::string> order(labels_a);
    std::vector<bool> in_a(reg_.size(), false);
    for (const auto& l : labels_a)
      in_a[static_cast<std::size_t>(position(l))] = true;
    for (const auto& q : reg_)
      if (!in_a[static_cast<std::size_t>(position(q.label))])
        order.push_back(q.label);
    const StateVector s = reordered(order);
    const Eigen::Index da = Eigen::Index{1} << labels_a.size();
    const Eigen::Index db = dim() / da;
    Mat m(da, db);
    for (Eigen::Index r = 0; r < da; ++r)
      for (Eigen::Index c = 0; c < db; ++c) m(r, c) = s.amps_(r * db + c);
    return m;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(reg_.size());
    for (const auto& q : reg_) out.push_back(q.label);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = vector_to_json(amps_);
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& q : reg_) labels.push_back({{"label", q.label}, {"node", q.node}});
    j["labels"] = labels;
    return j;
  }

  static StateVector from_json(const nlohmann::json& j) {
    Vec v = vector_from_json(j);
    std::vector<Qubit> reg;
    for (const auto& q : j.at("labels"))
      reg.push_back({q.at("label").get<std::string>(),
                     q.value("node", std::string{})});
    return StateVector(std::move(reg), std::move(v));
  }

 private:
  int find_index(const std::string& label) const {
    for (std::size_t i = 0; i < reg_.size(); ++i)
      if (reg_[i].label == label) return static_cast<int>(i);
    return -1;
  }

  void check_labels_unique() const {
    for (std::size_t i = 0; i < reg_.size(); ++i)
      for (std::size_t k = i + 1; k < reg_.size(); ++k)
        if (reg_[i].label == reg_[k].label)
          throw QncError("duplicate qubit label '" + reg_[i].label + "'");
  }

  std::vector<Qubit> reg_;
  Vec amps_;
};

}  // namespace qnc
