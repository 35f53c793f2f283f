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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnc/decompositions.hpp"
#include "qnc/linalg.hpp"
#include "qnc/state.hpp"

namespace qnc {

// ---------------------------------------------------------------------------
// Chain-form factors: the shape every column-wise implementable operation
// takes. The assembled matrix is
//   V = sum_{a_1..a_{k-1}} E_1^{(a_1)} (x) E_2^{(a_1,a_2)} (x) ...
//       (x) E_{k-1}^{(a_{k-2},a_{k-1})} (x) E_k^{(a_{k-1})}
// with 2x2 complex blocks. Unitary factors describe deterministic columns;
// general linear factors appear in the probabilistic setting.

struct ChainFactor {
  int k = 2;
  std::array<Mat, 2> first;                  // E_1^{(a)}
  std::vector<std::array<Mat, 4>> interior;  // E_i^{(a,a')}, index 2a + a'
  std::array<Mat, 2> last;                   // E_k^{(a)}
};

inline Mat assemble_chain_factor(const ChainFactor& f) {
  if (f.k < 2) throw QncError("assemble_chain_factor: need k >= 2");
  if (static_cast<int>(f.interior.size()) != f.k - 2)
    throw QncError("assemble_chain_factor: interior factor count mismatch");
  const Eigen::Index d = Eigen::Index{1} << f.k;
  Mat v = Mat::Zero(d, d);
  const int links = f.k - 1;
  for (int assign = 0; assign < (1 << links); ++assign) {
    auto bit = [&](int i) { return (assign >> i) & 1; };  // a_{i+1}
    Mat term = f.first[static_cast<std::size_t>(bit(0))];
    for (int i = 0; i < f.k - 2; ++i)
      term = kron(term, f.interior[static_cast<std::size_t>(i)]
                            [static_cast<std::size_t>(2 * bit(i) + bit(i + 1))]);
    term = kron(term, f.last[static_cast<std::size_t>(bit(links - 1))]);
    v += term;
  }
  return v;
}

inline Mat chain_compose(const std::vector<Mat>& factors) {
  if (factors.empty()) throw QncError("chain_compose: empty factor list");
  Mat u = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) {
    if (factors[i].rows() != u.rows() || factors[i].cols() != u.cols())
      throw QncError("chain_compose: dimension mismatch");
    u = u * factors[i];
  }
  return u;
}

// ---------------------------------------------------------------------------
// Exact decision for two-wire ladders: deterministically implementable over
// N columns iff the canonical parameter count is at most N. The certificate
// is a factor list multiplying to U, each factor controlled-equivalent.

struct LadderDecision {
  bool implementable = false;
  int kc_number = 0;
  std::optional<std::vector<Mat>> certificate;
};

inline LadderDecision decide_ladder(const Mat& u, int n_columns) {
  if (n_columns < 1) throw QncError("decide_ladder: need at least one column");
  LadderDecision d;
  d.kc_number = kraus_cirac(u).kc_number;
  d.implementable = d.kc_number <= n_columns;
  if (d.implementable)
    d.certificate = controlled_sequence(u, std::min(n_columns, 3));
  return d;
}

// ---------------------------------------------------------------------------
// Probabilistic chain verification: the factors may be non-unitary and only
// need to multiply to U up to a scalar (the branch amplitude).

inline bool probabilistic_chain_verify(const Mat& u,
                                       const std::vector<Mat>& factors,
                                       double rel_tol = 1e-9) {
  const Mat prod = chain_compose(factors);
  if (prod.rows() != u.rows() || prod.cols() != u.cols()) return false;
  const double pn = prod.norm();
  if (pn <= 1e-12) return false;
  const Complex c = (u.adjoint() * prod).trace() / u.squaredNorm();
  if (std::abs(c) <= 1e-12) return false;
  return (prod - c * u).norm() <= rel_tol * pn;
}

// ---------------------------------------------------------------------------
// Four-qubit Schmidt triple: ranks across the three pair partitions
// (12|34), (13|24), (14|23), in that order.

inline std::array<int, 3> schmidt_triple(const StateVector& state) {
  if (state.num_qubits() != 4)
    throw QncError("schmidt_triple: need a four-qubit state");
  const auto& reg = state.reg();
  auto rank_of = [&](int i, int j) {
    std::vector<std::string> a{reg[static_cast<std::size_t>(i)].label,
                               reg[static_cast<std::size_t>(j)].label};
    std::vector<std::string> b;
    for (int t = 0; t < 4; ++t)
      if (t != i && t != j) b.push_back(reg[static_cast<std::size_t>(t)].label);
    return schmidt_decompose(state, a, b).rank;
  };
  return {rank_of(0, 1), rank_of(0, 2), rank_of(0, 3)};
}

// ---------------------------------------------------------------------------
// The nine four-qubit families (determinant-1 SLOCC normal forms). Families
// 1..6 take 4, 3, 2, 2, 1, 1 complex parameters; 7..9 take none.

inline int family_parameter_count(int family) {
  switch (family) {
    case 1: return 4;
    case 2: return 3;
    case 3: return 2;
    case 4: return 2;
    case 5: return 1;
    case 6: return 1;
    case 7:
    case 8:
    case 9: return 0;
    default: throw QncError("family index must be 1..9");
  }
}

inline StateVector family_state(int family, const std::vector<Complex>& params) {
  if (static_cast<int>(params.size()) != family_parameter_count(family))
    throw QncError("family_state: family " + std::to_string(family) + " takes " +
                   std::to_string(family_parameter_count(family)) +
                   " parameters");
  Vec v = Vec::Zero(16);
  auto at = [&v](int b3, int b2, int b1, int b0) -> Complex& {
    return v(8 * b3 + 4 * b2 + 2 * b1 + b0);
  };
  const Complex a = params.size() > 0 ? params[0] : 0;
  const Complex b = params.size() > 1 ? params[1] : 0;
  const Complex c = params.size() > 2 ? params[2] : 0;
  const Complex d = params.size() > 3 ? params[3] : 0;
  switch (family) {
    case 1:
      at(0, 0, 0, 0) = at(1, 1, 1, 1) = (a + d) / 2.0;
      at(0, 0, 1, 1) = at(1, 1, 0, 0) = (a - d) / 2.0;
      at(0, 1, 0, 1) = at(1, 0, 1, 0) = (b + c) / 2.0;
      at(0, 1, 1, 0) = at(1, 0, 0, 1) = (b - c) / 2.0;
      break;
    case 2:
      at(0, 0, 0, 0) = at(1, 1, 1, 1) = (a + b) / 2.0;
      at(0, 0, 1, 1) = at(1, 1, 0, 0) = (a - b) / 2.0;
      at(0, 1, 0, 1) = at(1, 0, 1, 0) = c;
      at(0, 1, 1, 0) = 1;
      break;
    case 3:
      at(0, 0, 0, 0) = at(1, 1, 1, 1) = a;
      at(0, 1, 0, 1) = at(1, 0, 1, 0) = b;
      at(0, 1, 1, 0) = 1;
      at(0, 0, 1, 1) = 1;
      break;
    case 4:
      at(0, 0, 0, 0) = at(1, 1, 1, 1) = a;
      at(0, 1, 0, 1) = at(1, 0, 1, 0) = (a + b) / 2.0;
      at(0, 1, 1, 0) = at(1, 0, 0, 1) = (a - b) / 2.0;
      at(0, 0, 0, 1) = at(0, 0, 1, 0) = at(0, 1, 1, 1) = at(1, 0, 1, 1) =
          kI / std::sqrt(2.0);
      break;
    case 5:
      at(0, 0, 0, 0) = at(0, 1, 0, 1) = at(1, 0, 1, 0) = at(1, 1, 1, 1) = a;
      at(0, 0, 0, 1) = kI;
      at(0, 1, 1, 0) = 1;
      at(1, 0, 1, 1) = -kI;
      break;
    case 6:
      at(0, 0, 0, 0) = at(1, 1, 1, 1) = a;
      at(0, 0, 1, 1) = 1;
      at(0, 1, 0, 1) = 1;
      at(0, 1, 1, 0) = 1;
      break;
    case 7:
      at(0, 0, 0, 0) = 1;
      at(0, 1, 0, 1) = 1;
      at(1, 0, 0, 0) = 1;
      at(1, 1, 1, 0) = 1;
      break;
    case 8:
      at(0, 0, 0, 0) = 1;
      at(1, 0, 1, 1) = 1;
      at(1, 1, 0, 1) = 1;
      at(1, 1, 1, 0) = 1;
      break;
    case 9:
      at(0, 0, 0, 0) = 1;
      at(0, 1, 1, 1) = 1;
      break;
    default:
      throw QncError("family index must be 1..9");
  }
  const double norm = v.norm();
  if (norm < 1e-14)
    throw QncError("family_state: parameters give the zero state");
  v /= norm;
  std::vector<Qubit> reg{{"q1", "n"}, {"q2", "n"}, {"q3", "n"}, {"q4", "n"}};
  return StateVector(reg, v);
}

// ---------------------------------------------------------------------------
// Grid scan over the families: corroborates that no four-qubit state has
// Schmidt triple {4,2,2} (in the assigned cuts, and in any ordering).

struct ScanGrid {
  std::vector<double> magnitudes{0.0, 0.3, 0.7, 1.2};
  std::vector<double> phases{0.0, kPi / 4, kPi / 2, kPi};
  std::vector<int> families{1, 2, 3, 4, 5, 6, 7, 8, 9};
};

struct ScanRecord {
  int family = 0;
  std::vector<Complex> params;
  std::array<int, 3> triple{};
  bool forbidden_assigned = false;  // exactly (4,2,2) on (12|34,13|24,14|23)
  bool forbidden_any_order = false;
};

struct ScanReport {
  long total_points = 0;
  long skipped_null = 0;
  std::map<int, std::map<std::string, int>> histogram;  // family -> sorted triple
  std::vector<ScanRecord> forbidden;

  bool clean() const { return forbidden.empty(); }
};

inline std::vector<Complex> grid_values(const ScanGrid& grid) {
  std::vector<Complex> values;
  bool zero_seen = false;
  for (const double m : grid.magnitudes) {
    if (m == 0.0) {
      if (!zero_seen) values.push_back(Complex(0, 0));
      zero_seen = true;
      continue;
    }
    for (const double ph : grid.phases)
      values.push_back(m * std::exp(kI * ph));
  }
  return values;
}

inline ScanReport four_qubit_rank_scan(const ScanGrid& grid) {
  ScanReport rep;
  const std::vector<Complex> values = grid_values(grid);
  for (const int family : grid.families) {
    const int np = family_parameter_count(family);
    std::vector<std::size_t> idx(static_cast<std::size_t>(np), 0);
    while (true) {
      std::vector<Complex> params;
      for (int i = 0; i < np; ++i) params.push_back(values[idx[static_cast<std::size_t>(i)]]);
      ++rep.total_points;
      try {
        const StateVector s = family_state(family, params);
        ScanRecord rec;
        rec.family = family;
        rec.params = params;
        rec.triple = schmidt_triple(s);
        std::array<int, 3> sorted = rec.triple;
        std::sort(sorted.begin(), sorted.end());
        rec.forbidden_assigned =
            rec.triple[0] == 4 && rec.triple[1] == 2 && rec.triple[2] == 2;
        rec.forbidden_any_order =
            sorted[0] == 2 && sorted[1] == 2 && sorted[2] == 4;
        const std::string key = std::to_string(sorted[0]) + "," +
                                std::to_string(sorted[1]) + "," +
                                std::to_string(sorted[2]);
        rep.histogram[family][key] += 1;
        if (rec.forbidden_assigned || rec.forbidden_any_order)
          rep.forbidden.push_back(std::move(rec));
      } catch (const QncError&) {
        ++rep.skipped_null;
      }
      // Advance the mixed-radix counter.
      int pos = 0;
      for (; pos < np; ++pos) {
        if (++idx[static_cast<std::size_t>(pos)] < values.size()) break;
        idx[static_cast<std::size_t>(pos)] = 0;
      }
      if (pos == np) break;
      if (np == 0) break;
    }
  }
  return rep;
}

inline nlohmann::json scan_report_to_json(const ScanReport& rep) {
  nlohmann::json j;
  j["total_points"] = rep.total_points;
  j["skipped_null"] = rep.skipped_null;
  j["forbidden_count"] = rep.forbidden.size();
  nlohmann::json hist;
  for (const auto& [family, counts] : rep.histogram) {
    nlohmann::json h;
    for (const auto& [key, count] : counts) h[key] = count;
    hist["family_" + std::to_string(family)] = h;
  }
  j["histogram"] = hist;
  nlohmann::json bad = nlohmann::json::array();
  for (const ScanRecord& rec : rep.forbidden) {
    nlohmann::json r;
    r["family"] = rec.family;
    std::vector<double> re, im;
    for (const Complex& c : rec.params) {
      re.push_back(c.real());
      im.push_back(c.imag());
    }
    r["params_re"] = re;
    r["params_im"] = im;
    r["triple"] = rec.triple;
    bad.push_back(r);
  }
  j["forbidden"] = bad;
  return j;
}

}  // namespace qnc
