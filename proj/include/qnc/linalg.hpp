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

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qnc {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Default tolerances. Unitarity and normalization are checked at 1e-12,
// matrix reconstructions at 1e-10, rank thresholds are relative at 1e-9.
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr double kReconstructTol = 1e-10;
inline constexpr double kRankRelTol = 1e-9;

struct QncError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_unitary(const Mat& m, double tol = kUnitaryTol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - Mat::Identity(m.rows(), m.cols())) <= tol;
}

inline void require_unitary(const Mat& m, const std::string& what,
                            double tol = kUnitaryTol) {
  if (!is_unitary(m, tol)) throw QncError(what + ": matrix is not unitary");
}

template <typename DerivedA, typename DerivedB>
Mat kron(const Eigen::MatrixBase<DerivedA>& a,
         const Eigen::MatrixBase<DerivedB>& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b.derived().template cast<Complex>();
  return out;
}

// ---------------------------------------------------------------------------
// Elementary gates and states.

inline const Mat& pauli_i() {
  static const Mat m = Mat::Identity(2, 2);
  return m;
}
inline const Mat& pauli_x() {
  static const Mat m = [] {
    Mat g(2, 2);
    g << 0, 1, 1, 0;
    return g;
  }();
  return m;
}
inline const Mat& pauli_y() {
  static const Mat m = [] {
    Mat g(2, 2);
    g << 0, -kI, kI, 0;
    return g;
  }();
  return m;
}
inline const Mat& pauli_z() {
  static const Mat m = [] {
    Mat g(2, 2);
    g << 1, 0, 0, -1;
    return g;
  }();
  return m;
}
inline const Mat& hadamard() {
  static const Mat m = [] {
    Mat g(2, 2);
    g << 1, 1, 1, -1;
    g /= std::sqrt(2.0);
    return g;
  }();
  return m;
}
inline const Mat& phase_s() {
  static const Mat m = [] {
    Mat g(2, 2);
    g << 1, 0, 0, kI;
    return g;
  }();
  return m;
}

inline Mat rot(const Mat& pauli, double theta) {
  // exp(i theta P) for an involution P.
  return std::cos(theta) * Mat::Identity(pauli.rows(), pauli.cols()) +
         kI * std::sin(theta) * pauli;
}

// Two-qubit controlled gate sum_a |a><a| (x) u_a, control = first qubit.
inline Mat controlled_gate(const Mat& u0, const Mat& u1) {
  Mat out = Mat::Zero(4, 4);
  out.block(0, 0, 2, 2) = u0;
  out.block(2, 2, 2, 2) = u1;
  return out;
}

// Three-qubit gate sum_ab |ab><ab| (x) u_ab on (control, control, target).
inline Mat fully_controlled_gate(const Mat& u00, const Mat& u01, const Mat& u10,
                                 const Mat& u11) {
  Mat out = Mat::Zero(8, 8);
  out.block(0, 0, 2, 2) = u00;
  out.block(2, 2, 2, 2) = u01;
  out.block(4, 4, 2, 2) = u10;
  out.block(6, 6, 2, 2) = u11;
  return out;
}

// Variant with the target in the middle: sum_ab |a><a| (x) u_ab (x) |b><b|.
inline Mat fully_controlled_middle(const Mat& u00, const Mat& u01,
                                   const Mat& u10, const Mat& u11) {
  Mat out = Mat::Zero(8, 8);
  const std::array<const Mat*, 4> u = {&u00, &u01, &u10, &u11};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          out(4 * a + 2 * i + b, 4 * a + 2 * j + b) =
              (*u[static_cast<std::size_t>(2 * a + b)])(i, j);
  return out;
}

inline const Mat& cnot() {
  static const Mat m = controlled_gate(pauli_i(), pauli_x());
  return m;
}
inline const Mat& cz() {
  static const Mat m = controlled_gate(pauli_i(), pauli_z());
  return m;
}
inline const Mat& swap_gate() {
  static const Mat m = [] {
    Mat g = Mat::Zero(4, 4);
    g(0, 0) = g(1, 2) = g(2, 1) = g(3, 3) = 1;
    return g;
  }();
  return m;
}

// exp(i (x XX + y YY + z ZZ)), the nonlocal core of a two-qubit unitary.
inline Mat canonical_gate(double x, double y, double z) {
  const Mat xx = kron(pauli_x(), pauli_x());
  const Mat yy = kron(pauli_y(), pauli_y());
  const Mat zz = kron(pauli_z(), pauli_z());
  return rot(xx, x) * rot(yy, y) * rot(zz, z);
}

// The Bell basis. bell_state(0..3) = (|00>+|11>, |00>-|11>, |01>+|10>,
// |01>-|10>)/sqrt(2); these are the eigenvectors of canonical_gate.
inline Vec bell_state(int j) {
  Vec v = Vec::Zero(4);
  const double s = 1.0 / std::sqrt(2.0);
  switch (j) {
    case 0: v(0) = s; v(3) = s; break;
    case 1: v(0) = s; v(3) = -s; break;
    case 2: v(1) = s; v(2) = s; break;
    case 3: v(1) = s; v(2) = -s; break;
    default: throw QncError("bell_state: index out of range");
  }
  return v;
}

inline Complex canonical_eigenvalue(double x, double y, double z, int j) {
  switch (j) {
    case 0: return std::exp(kI * (x - y + z));
    case 1: return std::exp(kI * (-x + y + z));
    case 2: return std::exp(kI * (x + y - z));
    case 3: return std::exp(kI * (-x - y - z));
    default: throw QncError("canonical_eigenvalue: index out of range");
  }
}

// ---------------------------------------------------------------------------
// Phase-insensitive comparisons. Canonical forms and protocol outputs are
// defined up to a global phase, so comparisons align phases first.

// Phase e^{i phi} minimizing ||a - e^{i phi} b||_F.
inline Complex phase_align(const Mat& a, const Mat& b) {
  const Complex t = (b.adjoint() * a).trace();
  if (std::abs(t) < 1e-300) return Complex(1, 0);
  return t / std::abs(t);
}

inline double distance_up_to_phase(const Mat& a, const Mat& b) {
  return max_abs(a - phase_align(a, b) * b);
}

inline double state_fidelity(const Vec& a, const Vec& b) {
  const double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na <= 0 || nb <= 0) throw QncError("state_fidelity: zero vector");
  return std::norm(a.dot(b)) / (na * nb);
}

// ---------------------------------------------------------------------------
// Deterministic random sources. Distributions are hand-rolled so that a seed
// pins the exact byte stream independent of the standard library.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // in [0, 1)
    return std::ldexp(static_cast<double>(engine_() >> 11), -53);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    // Box-Muller; one value per call keeps the stream position obvious.
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Complex gaussian_complex() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

  // Haar-distributed unitary via QR of a Ginibre matrix.
  Mat haar_unitary(Eigen::Index dim) {
    Mat g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = gaussian_complex();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j) {
      Complex d = r(j, j);
      d = (std::abs(d) < 1e-300) ? Complex(1, 0) : d / std::abs(d);
      q.col(j) *= d;
    }
    return q;
  }

  Vec random_state(Eigen::Index dim) {
    Vec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = gaussian_complex();
    const double n = v.norm();
    if (n <= 0) return random_state(dim);
    return v / n;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// JSON serialization: {"dims": [...], "re": [...], "im": [...]} row-major.

inline nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json j;
  j["dims"] = {m.rows(), m.cols()};
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  j["re"] = re;
  j["im"] = im;
  return j;
}

inline Mat matrix_from_json(const nlohmann::json& j) {
  if (!j.contains("dims") || !j.contains("re") || !j.contains("im"))
    throw QncError("matrix_from_json: need dims/re/im fields");
  const auto dims = j.at("dims").get<std::vector<Eigen::Index>>();
  Eigen::Index rows = 0, cols = 1;
  if (dims.size() == 1) {
    rows = dims[0];
  } else if (dims.size() == 2) {
    rows = dims[0];
    cols = dims[1];
  } else {
    throw QncError("matrix_from_json: dims must have one or two entries");
  }
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(re.size()) != rows * cols ||
      static_cast<Eigen::Index>(im.size()) != rows * cols)
    throw QncError("matrix_from_json: payload size does not match dims");
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, ++k) m(r, c) = {re[k], im[k]};
  return m;
}

inline nlohmann::json vector_to_json(const Vec& v) {
  nlohmann::json j = matrix_to_json(v);
  j["dims"] = {v.size()};
  return j;
}

inline Vec vector_from_json(const nlohmann::json& j) {
  const Mat m = matrix_from_json(j);
  if (m.cols() != 1) throw QncError("vector_from_json: expected a column");
  return m.col(0);
}

}  // namespace qnc
