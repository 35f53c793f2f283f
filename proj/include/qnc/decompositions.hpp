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
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "qnc/linalg.hpp"
#include "qnc/state.hpp"

namespace qnc {

// ---------------------------------------------------------------------------
// Schmidt decomposition of a pure state across a bipartition.

struct SchmidtData {
  Eigen::VectorXd coefficients;  // descending
  Mat left;                      // columns = left vectors
  Mat right;                     // columns = right vectors
  int rank = 0;                  // coefficients with c/c_max > 1e-9
};

inline int relative_rank(const Eigen::VectorXd& sv, double rel = kRankRelTol) {
  if (sv.size() == 0) return 0;
  const double top = sv(0);
  if (top <= 0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) / top > rel) ++r;
  return r;
}

inline SchmidtData schmidt_decompose(const StateVector& state,
                                     const std::vector<std::string>& part_a,
                                     const std::vector<std::string>& part_b) {
  if (part_a.empty() || part_b.empty())
    throw QncError("schmidt_decompose: empty side of partition");
  if (part_a.size() + part_b.size() != state.reg().size())
    throw QncError("schmidt_decompose: partition must cover the register");
  std::vector<std::string> order(part_a);
  order.insert(order.end(), part_b.begin(), part_b.end());
  const StateVector s = state.reordered(order);  // also checks disjointness
  const Eigen::Index da = Eigen::Index{1} << part_a.size();
  const Eigen::Index db = Eigen::Index{1} << part_b.size();
  Mat m(da, db);
  for (Eigen::Index r = 0; r < da; ++r)
    for (Eigen::Index c = 0; c < db; ++c) m(r, c) = s.amplitudes()(r * db + c);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtData out;
  out.coefficients = svd.singularValues();
  out.left = svd.matrixU();
  out.right = svd.matrixV().conjugate();  // state = sum_i c_i left_i (x) right_i
  out.rank = relative_rank(out.coefficients);
  return out;
}

// ---------------------------------------------------------------------------
// Operator Schmidt decomposition. Factor operators are orthonormal under the
// normalized Hilbert-Schmidt inner product (M,N) = tr(M^dag N)/dim.

struct OperatorSchmidtData {
  Eigen::VectorXd coefficients;
  std::vector<Mat> left_ops;
  std::vector<Mat> right_ops;
  int rank = 0;
};

// Permutation matrix sending qubit `order[i]` of the input to position i.
inline Mat qubit_permutation(int n, const std::vector<int>& order) {
  const Eigen::Index d = Eigen::Index{1} << n;
  Mat p = Mat::Zero(d, d);
  for (Eigen::Index idx = 0; idx < d; ++idx) {
    Eigen::Index nidx = 0;
    for (int i = 0; i < n; ++i) {
      const Eigen::Index b = (idx >> (n - 1 - order[static_cast<std::size_t>(i)])) & 1;
      nidx |= b << (n - 1 - i);
    }
    p(nidx, idx) = 1;
  }
  return p;
}

inline OperatorSchmidtData operator_schmidt(const Mat& m,
                                            const std::vector<int>& side_a_qubits,
                                            int num_qubits) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  if (m.rows() != d || m.cols() != d)
    throw QncError("operator_schmidt: partition mismatch with dimension");
  std::vector<int> order(side_a_qubits);
  std::vector<bool> used(static_cast<std::size_t>(num_qubits), false);
  for (int q : order) {
    if (q < 0 || q >= num_qubits || used[static_cast<std::size_t>(q)])
      throw QncError("operator_schmidt: bad side-A qubit list");
    used[static_cast<std::size_t>(q)] = true;
  }
  for (int q = 0; q < num_qubits; ++q)
    if (!used[static_cast<std::size_t>(q)]) order.push_back(q);
  const int na = static_cast<int>(side_a_qubits.size());
  if (na == 0 || na == num_qubits)
    throw QncError("operator_schmidt: partition must be proper");
  const Mat perm = qubit_permutation(num_qubits, order);
  const Mat mm = perm * m * perm.adjoint();

  const Eigen::Index dA = Eigen::Index{1} << na;
  const Eigen::Index dB = d / dA;
  Mat r(dA * dA, dB * dB);
  for (Eigen::Index ar = 0; ar < dA; ++ar)
    for (Eigen::Index ac = 0; ac < dA; ++ac)
      for (Eigen::Index br = 0; br < dB; ++br)
        for (Eigen::Index bc = 0; bc < dB; ++bc)
          r(ar * dA + ac, br * dB + bc) = mm(ar * dB + br, ac * dB + bc);

  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  OperatorSchmidtData out;
  const Eigen::VectorXd sv = svd.singularValues();
  const double scale = std::sqrt(static_cast<double>(dA) * static_cast<double>(dB));
  out.coefficients = sv / scale;
  const Eigen::Index k = sv.size();
  for (Eigen::Index i = 0; i < k; ++i) {
    Mat p(dA, dA), q(dB, dB);
    for (Eigen::Index ar = 0; ar < dA; ++ar)
      for (Eigen::Index ac = 0; ac < dA; ++ac)
        p(ar, ac) = svd.matrixU()(ar * dA + ac, i);
    for (Eigen::Index br = 0; br < dB; ++br)
      for (Eigen::Index bc = 0; bc < dB; ++bc)
        q(br, bc) = std::conj(svd.matrixV()(br * dB + bc, i));
    out.left_ops.push_back(std::sqrt(static_cast<double>(dA)) * p);
    out.right_ops.push_back(std::sqrt(static_cast<double>(dB)) * q);
  }
  out.rank = relative_rank(sv);
  return out;
}

inline int operator_schmidt_rank(const Mat& m) {
  const int n = m.rows() == 4 ? 2 : (m.rows() == 8 ? 3 : 0);
  if (n == 0) throw QncError("operator_schmidt_rank: need 4x4 or 8x8");
  return operator_schmidt(m, {0}, n).rank;
}

// ---------------------------------------------------------------------------
// Nearest Kronecker factorization. For inputs of the exact form
// phase * (a (x) b) with unitary a, b this is exact.

struct KronFactors {
  Mat a, b;       // 2x2 unitaries
  Complex phase;  // input = phase * kron(a, b)
  double residual = 0;
};

inline Mat closest_unitary(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

inline KronFactors kron_factor(const Mat& l) {
  if (l.rows() != 4 || l.cols() != 4) throw QncError("kron_factor: need 4x4");
  Mat r(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int q = 0; q < 2; ++q)
          r(2 * i + k, 2 * j + q) = l(2 * i + j, 2 * k + q);
  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = svd.singularValues()(0);
  Mat a(2, 2), b(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      a(i, k) = svd.matrixU()(2 * i + k, 0);
      b(i, k) = std::conj(svd.matrixV()(2 * i + k, 0));
    }
  a *= std::sqrt(s);
  b *= std::sqrt(s);
  KronFactors out;
  out.a = closest_unitary(a);
  out.b = closest_unitary(b);
  out.phase = phase_align(l, kron(out.a, out.b));
  out.residual = max_abs(l - out.phase * kron(out.a, out.b));
  return out;
}

// ---------------------------------------------------------------------------
// Kraus-Cirac decomposition of a two-qubit unitary:
//   U = e^{i phase} (u (x) u') exp(i (x XX + y YY + z ZZ)) (w (x) w')
// with (x, y, z) folded into the chamber
//   0 <= x < pi/2 (0 <= x <= pi/4 when z = 0),
//   0 <= y <= min(x, pi/2 - x),  0 <= z <= y.
// kc_number counts the parameters above 1e-9 rad.

struct KrausCiracForm {
  Mat u, u_prime, w, w_prime;
  double x = 0, y = 0, z = 0;
  double global_phase = 0;
  int kc_number = 0;

  Mat reconstruct() const {
    return std::exp(kI * global_phase) * kron(u, u_prime) *
           canonical_gate(x, y, z) * kron(w, w_prime);
  }
};

namespace detail {

inline const Mat& magic_basis() {
  static const Mat q = [] {
    Mat m(4, 4);
    const double s = 1.0 / std::sqrt(2.0);
    m.col(0) = bell_state(0);
    m.col(1) = -kI * bell_state(1);
    m.col(2) = bell_state(3);
    m.col(3) = -kI * bell_state(2);
    (void)s;
    return m;
  }();
  return q;
}

// Real orthogonal basis diagonalizing a commuting pair of real symmetric
// matrices (here Re and Im of a symmetric unitary).
inline Eigen::MatrixXd diagonalize_commuting_pair(const Eigen::MatrixXd& a,
                                                  const Eigen::MatrixXd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::MatrixXd p = es.eigenvectors();
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < ev.size()) {
    Eigen::Index end = start + 1;
    while (end < ev.size() && std::abs(ev(end) - ev(start)) < 1e-9 * scale) ++end;
    if (end - start > 1) {
      const Eigen::MatrixXd w = p.middleCols(start, end - start);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(w.transpose() * b * w);
      p.middleCols(start, end - start) = w * es2.eigenvectors();
    }
    start = end;
  }
  if (p.determinant() < 0) p.col(0) *= -1;
  return p;
}

struct CanonicalState {
  double x = 0, y = 0, z = 0, phase = 0;
  Mat u, up, w, wp;  // U = e^{i phase} (u (x) up) N(x,y,z) (w (x) wp)

  void shift_into_range(int axis) {
    double& p = param(axis);
    const double half = kPi / 2;
    double n = std::floor(p / half);
    p -= n * half;
    if (p > half - 1e-12) {  // snap values that round up to the boundary
      p -= half;
      n += 1;
      p = std::max(p, 0.0);
    }
    if (p < 1e-12) p = 0;
    phase += n * half;
    if (std::llround(n) % 2 != 0) {
      const Mat& g = axis == 0 ? pauli_x() : (axis == 1 ? pauli_y() : pauli_z());
      w = g * w;
      wp = g * wp;
    }
  }

  void swap_axes(int i, int j) {
    Mat g;
    if ((i == 0 && j == 1) || (i == 1 && j == 0)) {
      g = phase_s();
    } else if ((i == 1 && j == 2) || (i == 2 && j == 1)) {
      g = rot(pauli_x(), -kPi / 4);
    } else {
      g = rot(pauli_y(), -kPi / 4);
    }
    u = u * g.adjoint();
    up = up * g.adjoint();
    w = g * w;
    wp = g * wp;
    std::swap(param(i), param(j));
  }

  // Negates two parameters by conjugating with a Pauli on the first qubit.
  void flip_pair(int keep_axis) {
    const Mat& g =
        keep_axis == 2 ? pauli_z() : (keep_axis == 0 ? pauli_x() : pauli_y());
    u = u * g;
    w = g * w;
    if (keep_axis != 0) x = -x;
    if (keep_axis != 1) y = -y;
    if (keep_axis != 2) z = -z;
  }

  double& param(int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  void sort_descending() {
    if (y > x + 1e-15) swap_axes(0, 1);
    if (z > y + 1e-15) swap_axes(1, 2);
    if (y > x + 1e-15) swap_axes(0, 1);
  }
};

}  // namespace detail

inline KrausCiracForm kraus_cirac(const Mat& input) {
  if (input.rows() != 4 || input.cols() != 4)
    throw QncError("kraus_cirac: need a 4x4 matrix");
  require_unitary(input, "kraus_cirac");

  // Normalize to SU(4) and move to the magic basis, where local unitaries
  // become real orthogonal and the canonical gate becomes diagonal.
  const Complex det = input.determinant();
  const double gamma = std::arg(det) / 4.0;
  const Mat su = input * std::exp(-kI * gamma);
  const Mat& q = detail::magic_basis();
  const Mat m = q.adjoint() * su * q;
  const Mat s = m.transpose() * m;

  const Eigen::MatrixXd p =
      detail::diagonalize_commuting_pair(s.real(), s.imag());
  std::array<double, 4> theta{};
  for (int j = 0; j < 4; ++j) {
    const Eigen::VectorXd col = p.col(j);
    const double aj = col.dot(s.real() * col);
    const double bj = col.dot(s.imag() * col);
    theta[static_cast<std::size_t>(j)] = std::atan2(bj, aj) / 2.0;
  }
  Mat o1 = m * p.cast<Complex>();
  for (int j = 0; j < 4; ++j)
    o1.col(j) *= std::exp(-kI * theta[static_cast<std::size_t>(j)]);
  if (o1.real().determinant() < 0) {
    theta[0] += kPi;
    o1.col(0) *= -1;
  }
  if (max_abs(Mat(o1.imag().cast<Complex>())) > 1e-7)
    throw QncError("kraus_cirac: magic-basis factor failed to come out real");

  // theta holds the diagonal exponents (x-y+z, -x+y+z, -x-y-z, x+y-z) up to
  // a uniform shift which is a global phase.
  const double t0 = theta[0], t1 = theta[1], t2 = theta[2], t3 = theta[3];
  detail::CanonicalState cs;
  cs.x = (t0 - t1 - t2 + t3) / 4.0;
  cs.y = (-t0 + t1 - t2 + t3) / 4.0;
  cs.z = (t0 + t1 - t2 - t3) / 4.0;
  cs.phase = gamma + (t0 + t1 + t2 + t3) / 4.0;

  const KronFactors left = kron_factor(q * o1 * q.adjoint());
  const KronFactors right =
      kron_factor(q * p.cast<Complex>().transpose() * q.adjoint());
  if (left.residual > 1e-8 || right.residual > 1e-8)
    throw QncError("kraus_cirac: local factors are not a tensor product");
  cs.u = left.a;
  cs.up = left.b;
  cs.w = right.a;
  cs.wp = right.b;
  cs.phase += std::arg(left.phase) + std::arg(right.phase);

  // Fold into the chamber.
  for (int iter = 0; iter < 200; ++iter) {
    for (int axis = 0; axis < 3; ++axis) cs.shift_into_range(axis);
    cs.sort_descending();
    if (cs.x + cs.y > kPi / 2 + 1e-15) {
      cs.flip_pair(2);  // negate x and y
      continue;
    }
    if (cs.z < 1e-12 && cs.x > kPi / 4 + 1e-15) {
      cs.z = 0;
      cs.flip_pair(1);  // negate x and z
      continue;
    }
    break;
  }

  KrausCiracForm out;
  out.u = cs.u;
  out.u_prime = cs.up;
  out.w = cs.w;
  out.w_prime = cs.wp;
  out.x = cs.x;
  out.y = cs.y;
  out.z = cs.z;
  out.global_phase = std::remainder(cs.phase, 2 * kPi);
  out.kc_number = (cs.x > 1e-9 ? 1 : 0) + (cs.y > 1e-9 ? 1 : 0) +
                  (cs.z > 1e-9 ? 1 : 0);
  if (max_abs(out.reconstruct() - input) > 1e-9)
    throw QncError("kraus_cirac: reconstruction check failed");
  return out;
}

inline nlohmann::json kraus_cirac_to_json(const KrausCiracForm& f) {
  nlohmann::json j;
  j["x"] = f.x;
  j["y"] = f.y;
  j["z"] = f.z;
  j["kc"] = f.kc_number;
  j["global_phase"] = f.global_phase;
  j["u"] = matrix_to_json(f.u);
  j["u'"] = matrix_to_json(f.u_prime);
  j["w"] = matrix_to_json(f.w);
  j["w'"] = matrix_to_json(f.w_prime);
  return j;
}

// ---------------------------------------------------------------------------
// Decomposition of U into a shortest sequence of factors that are each
// locally equivalent to a two-qubit controlled unitary. Succeeds iff
// kc_number(U) <= length; shorter factors cannot exist for larger kc_number.

inline std::optional<std::vector<Mat>> controlled_sequence(const Mat& u,
                                                           int length) {
  if (length < 1 || length > 3)
    throw QncError("controlled_sequence: length must be 1, 2 or 3");
  const KrausCiracForm f = kraus_cirac(u);
  if (f.kc_number > length) return std::nullopt;

  const Mat xx = kron(pauli_x(), pauli_x());
  const Mat yy = kron(pauli_y(), pauli_y());
  const Mat zz = kron(pauli_z(), pauli_z());
  std::vector<Mat> core;
  if (f.x > 1e-9) core.push_back(rot(xx, f.x));
  if (f.y > 1e-9) core.push_back(rot(yy, f.y));
  if (f.z > 1e-9) core.push_back(rot(zz, f.z));

  std::vector<Mat> factors;
  const Complex ph = std::exp(kI * f.global_phase);
  if (core.empty()) {
    factors.push_back(ph * kron(f.u * f.w, f.u_prime * f.w_prime));
  } else {
    for (std::size_t i = 0; i < core.size(); ++i) {
      Mat fac = core[i];
      if (i == 0) fac = ph * kron(f.u, f.u_prime) * fac;
      if (i + 1 == core.size()) fac = fac * kron(f.w, f.w_prime);
      factors.push_back(fac);
    }
  }
  while (static_cast<int>(factors.size()) < length)
    factors.push_back(Mat::Identity(4, 4));

  Mat prod = Mat::Identity(4, 4);
  for (const Mat& fac : factors) prod = prod * fac;
  if (max_abs(prod - u) > 1e-8)
    throw QncError("controlled_sequence: product check failed");
  return factors;
}

// ---------------------------------------------------------------------------
// Circuit with exactly three CNOTs (control = first qubit) and eight
// single-qubit unitaries:
//   U = e^{i phase} L0 . CNOT . L1 . CNOT . L2 . CNOT . L3,  Li = ai (x) bi.

struct ThreeCnotCircuit {
  std::array<std::pair<Mat, Mat>, 4> layers;
  double phase = 0;

  Mat reconstruct() const {
    const Mat& c = cnot();
    Mat m = kron(layers[0].first, layers[0].second);
    for (int i = 1; i < 4; ++i)
      m = m * c * kron(layers[static_cast<std::size_t>(i)].first,
                       layers[static_cast<std::size_t>(i)].second);
    return std::exp(kI * phase) * m;
  }
};

// Uses the identity CNOT (e^{iaX} (x) e^{ibZ}) CNOT = e^{i(a XX + b ZZ)}
// together with one basis change turning the YY term into a third CNOT
// conjugation.
inline ThreeCnotCircuit three_cnot_decompose(const Mat& u) {
  const KrausCiracForm f = kraus_cirac(u);
  const Mat sdg = phase_s().adjoint();
  const Mat a = rot(pauli_x(), f.y) * rot(pauli_z(), kPi / 4) * sdg;
  const Mat b = sdg * hadamard();
  const Mat p = rot(pauli_x(), f.x);
  const Mat q = hadamard() * rot(pauli_z(), f.z);

  ThreeCnotCircuit c;
  c.layers[0] = {f.u * phase_s(), f.u_prime * phase_s()};
  c.layers[1] = {a, b};
  c.layers[2] = {p, q};
  c.layers[3] = {f.w, f.w_prime};
  c.phase = f.global_phase - kPi / 4;
  if (max_abs(c.reconstruct() - u) > 1e-8)
    throw QncError("three_cnot_decompose: reconstruction check failed");
  return c;
}

// ---------------------------------------------------------------------------
// Controlled-form extraction. A two-qubit unitary of operator Schmidt rank
// <= 2 can be written V = sum_a |alpha_a><beta_a| (x) W_a with orthonormal
// pairs; this recovers the bases numerically.

struct ControlledForm {
  Mat alpha;               // columns |alpha_0>, |alpha_1>
  Mat beta;                // columns |beta_0>, |beta_1>
  std::array<Mat, 2> w;    // target operations

  Mat reconstruct() const {
    Mat v = Mat::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
      v += kron(Mat(alpha.col(a) * beta.col(a).adjoint()),
                w[static_cast<std::size_t>(a)]);
    return v;
  }
};

namespace detail {

struct ControlBases {
  Mat out_basis, in_basis;
  bool ok = false;
};

// Control bases of V on the cut (first qubit | rest). If V has the form
// sum_a |alpha_a><beta_a| (x) W_a, its operator Schmidt left factors span
// span{|alpha_a><beta_a|}, so any combination P in that span has SVD
// P = sum_a s_a |alpha_a><beta_a| (up to phases absorbed into the target
// blocks). The singular vectors thus recover the paired bases; combinations
// with a clear singular-value gap avoid the degenerate mixing freedom.
inline ControlBases control_bases_first(const Mat& v, int num_qubits) {
  ControlBases cb;
  const OperatorSchmidtData os = operator_schmidt(v, {0}, num_qubits);
  if (os.rank > 2 || os.rank == 0) return cb;
  const Mat p1 = os.left_ops[0];
  const Mat p2 = os.rank >= 2 ? os.left_ops[1] : Mat(Mat::Zero(2, 2));
  const std::array<Complex, 5> mixes = {Complex(0, 0), Complex(1, 0),
                                        Complex(0, 1), Complex(0.5, 0.25),
                                        Complex(-0.8, 0.6)};
  double best_gap = -1.0;
  for (const Complex& t : mixes) {
    const Mat pt = p1 + t * p2;
    Eigen::JacobiSVD<Mat> svd(pt, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double gap = svd.singularValues()(0) - svd.singularValues()(1);
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      cb.out_basis = svd.matrixU();
      cb.in_basis = svd.matrixV();
    }
  }
  cb.ok = true;
  return cb;
}

}  // namespace detail

inline std::optional<ControlledForm> extract_controlled(const Mat& v,
                                                        double tol = 1e-9) {
  if (v.rows() != 4 || v.cols() != 4)
    throw QncError("extract_controlled: need 4x4");
  const detail::ControlBases cb = detail::control_bases_first(v, 2);
  if (!cb.ok) return std::nullopt;
  ControlledForm form;
  form.alpha = cb.out_basis;
  form.beta = cb.in_basis;
  for (int a = 0; a < 2; ++a) {
    Mat w(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Complex acc = 0;
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y)
            acc += std::conj(form.alpha.col(a)(x)) * v(2 * x + i, 2 * y + j) *
                   form.beta.col(a)(y);
        w(i, j) = acc;
      }
    form.w[static_cast<std::size_t>(a)] = w;
  }
  if (max_abs(form.reconstruct() - v) <= std::max(tol, 1e-9) &&
      is_unitary(form.w[0], 1e-8) && is_unitary(form.w[1], 1e-8))
    return form;
  return std::nullopt;
}

// Fully controlled form of a three-qubit unitary with controls on the outer
// qubits: V = sum_ab |alpha_a><beta_a| (x) W_ab (x) |gamma_b><delta_b|.
struct FullyControlledForm {
  Mat alpha, beta, gamma, delta;
  std::array<std::array<Mat, 2>, 2> w;

  Mat reconstruct() const {
    Mat v = Mat::Zero(8, 8);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        v += kron(Mat(alpha.col(a) * beta.col(a).adjoint()),
                  kron(w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)],
                       Mat(gamma.col(b) * delta.col(b).adjoint())));
    return v;
  }
};

inline std::optional<FullyControlledForm> extract_fully_controlled(
    const Mat& v, double tol = 1e-8) {
  if (v.rows() != 8 || v.cols() != 8)
    throw QncError("extract_fully_controlled: need 8x8");
  const detail::ControlBases first = detail::control_bases_first(v, 3);
  if (!first.ok) return std::nullopt;
  // Reuse the same machinery for the last qubit by reversing qubit order.
  const Mat perm = qubit_permutation(3, {2, 1, 0});
  const detail::ControlBases last =
      detail::control_bases_first(Mat(perm * v * perm.adjoint()), 3);
  if (!last.ok) return std::nullopt;

  FullyControlledForm form;
  form.alpha = first.out_basis;
  form.beta = first.in_basis;
  form.gamma = last.out_basis;
  form.delta = last.in_basis;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Mat w(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          Complex acc = 0;
          for (int x = 0; x < 2; ++x)
            for (int m = 0; m < 2; ++m)
              for (int y = 0; y < 2; ++y)
                for (int n = 0; n < 2; ++n)
                  acc += std::conj(form.alpha.col(a)(x)) *
                         std::conj(form.gamma.col(b)(m)) *
                         v(4 * x + 2 * i + m, 4 * y + 2 * j + n) *
                         form.beta.col(a)(y) * form.delta.col(b)(n);
          w(i, j) = acc;
        }
      form.w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = w;
    }
  if (max_abs(form.reconstruct() - v) > tol) return std::nullopt;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (!is_unitary(form.w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], 1e-7))
        return std::nullopt;
  return form;
}

// ---------------------------------------------------------------------------
// Whether target blocks {w_ab} factor as w_ab = u_a v_b (up to one global
// phase). Returns the defect of the factorization criterion
//   w00 w10^{-1} = w01 w11^{-1};
// zero defect is equivalent to existence of the factors.

inline double product_form_defect(const Mat& w00, const Mat& w01,
                                  const Mat& w10, const Mat& w11) {
  const Mat lhs = w00 * w10.inverse();
  const Mat rhs = w01 * w11.inverse();
  return max_abs(lhs - rhs);
}

}  // namespace qnc
