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

#include "helpers.hpp"
#include "qnc/implementability.hpp"

using namespace qnc;
using qnc::testing::random_kc_class;

TEST_CASE("chain factor assembly reproduces controlled gates") {
  ChainFactor f;
  f.k = 2;
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  f.first = {p0, p1};
  f.last = {pauli_i(), pauli_x()};
  REQUIRE(max_abs(assemble_chain_factor(f) - cnot()) < 1e-15);

  // All-zero blocks except the identity route.
  ChainFactor id;
  id.k = 2;
  id.first = {pauli_i(), Mat(Mat::Zero(2, 2))};
  id.last = {pauli_i(), Mat(Mat::Zero(2, 2))};
  REQUIRE(max_abs(assemble_chain_factor(id) - Mat(Mat::Identity(4, 4))) <
          1e-15);
}

TEST_CASE("three-wire chain factors with projector data are fully controlled") {
  Rng rng(111);
  for (int trial = 0; trial < 6; ++trial) {
    Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    ChainFactor f;
    f.k = 3;
    f.first = {p0, p1};
    f.interior.push_back({rng.haar_unitary(2), rng.haar_unitary(2),
                          rng.haar_unitary(2), rng.haar_unitary(2)});
    f.last = {p0, p1};
    Mat v = assemble_chain_factor(f);
    REQUIRE(is_unitary(v, 1e-10));
    // Dress with local unitaries; the factor stays fully controlled in some
    // local basis, certified by the extraction.
    const Mat dl = kron(rng.haar_unitary(2),
                        kron(rng.haar_unitary(2), rng.haar_unitary(2)));
    const Mat dr = kron(rng.haar_unitary(2),
                        kron(rng.haar_unitary(2), rng.haar_unitary(2)));
    v = dl * v * dr;
    const auto form = extract_fully_controlled(v);
    REQUIRE(form.has_value());
    REQUIRE(max_abs(form->reconstruct() - v) < 1e-8);
  }
}

TEST_CASE("two-wire chain factors have operator Schmidt rank at most 2") {
  Rng rng(113);
  for (int trial = 0; trial < 20; ++trial) {
    ChainFactor f;
    f.k = 2;
    f.first = {rng.haar_unitary(2), rng.haar_unitary(2)};
    f.last = {rng.haar_unitary(2), rng.haar_unitary(2)};
    const Mat v = assemble_chain_factor(f);
    REQUIRE(operator_schmidt_rank(v) <= 2);
  }
}

TEST_CASE("chain composition multiplies factors in order") {
  Rng rng(127);
  const Mat a = rng.haar_unitary(4), b = rng.haar_unitary(4);
  REQUIRE(max_abs(chain_compose({a, b}) - Mat(a * b)) < 1e-14);
  REQUIRE_THROWS_AS(chain_compose({}), QncError);
  REQUIRE(max_abs(chain_compose({Mat(Mat::Identity(4, 4))}) -
                  Mat(Mat::Identity(4, 4))) == 0.0);

  // Three controlled factors composing to the swap gate.
  const auto seq = controlled_sequence(swap_gate(), 3);
  REQUIRE(seq.has_value());
  REQUIRE(max_abs(chain_compose(*seq) - swap_gate()) < 1e-8);
}

TEST_CASE("ladder decisions follow the canonical parameter count") {
  const LadderDecision no = decide_ladder(swap_gate(), 2);
  REQUIRE_FALSE(no.implementable);
  REQUIRE(no.kc_number == 3);
  REQUIRE_FALSE(no.certificate.has_value());

  const LadderDecision yes = decide_ladder(cnot(), 1);
  REQUIRE(yes.implementable);
  REQUIRE(yes.certificate.has_value());

  Rng rng(131);
  const Mat matchgate_like = random_kc_class(rng, 2);
  const LadderDecision mg = decide_ladder(matchgate_like, 2);
  REQUIRE(mg.implementable);
  REQUIRE(mg.kc_number == 2);
  REQUIRE(max_abs(chain_compose(*mg.certificate) - matchgate_like) < 1e-8);
}

TEST_CASE("probabilistic verification accepts proportional factorizations") {
  const auto seq = controlled_sequence(cnot(), 1);
  REQUIRE(probabilistic_chain_verify(cnot(), *seq));

  // Scaled factors still pass: only proportionality matters.
  std::vector<Mat> scaled = {Mat(2.0 * (*seq)[0]), Mat(Mat::Identity(4, 4) / 2.0)};
  REQUIRE(probabilistic_chain_verify(cnot(), scaled));

  // Swap against rank-limited factor pairs must fail.
  Rng rng(137);
  ChainFactor f1, f2;
  f1.k = f2.k = 2;
  f1.first = {rng.haar_unitary(2), rng.haar_unitary(2)};
  f1.last = {rng.haar_unitary(2), rng.haar_unitary(2)};
  f2.first = {rng.haar_unitary(2), rng.haar_unitary(2)};
  f2.last = {rng.haar_unitary(2), rng.haar_unitary(2)};
  REQUIRE_FALSE(probabilistic_chain_verify(
      swap_gate(),
      {assemble_chain_factor(f1), assemble_chain_factor(f2)}));
}

TEST_CASE("operator Schmidt rank 2 is preserved under inversion") {
  Rng rng(139);
  int tested = 0;
  while (tested < 40) {
    ChainFactor f;
    f.k = 2;
    // Random rank-2-form operator, not necessarily unitary.
    auto rnd = [&rng] {
      Mat m(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = rng.gaussian_complex();
      return m;
    };
    f.first = {rnd(), rnd()};
    f.last = {rnd(), rnd()};
    const Mat p = assemble_chain_factor(f);
    if (std::abs(p.determinant()) < 1e-3) continue;
    if (operator_schmidt_rank(p) != 2) continue;
    ++tested;
    REQUIRE(operator_schmidt_rank(Mat(p.inverse())) == 2);
  }
}

TEST_CASE("schmidt triples of the parameterless families") {
  REQUIRE(schmidt_triple(family_state(7, {})) == std::array<int, 3>{3, 3, 3});
  REQUIRE(schmidt_triple(family_state(8, {})) == std::array<int, 3>{3, 3, 3});
  REQUIRE(schmidt_triple(family_state(9, {})) == std::array<int, 3>{2, 2, 2});

  // GHZ-type check via a direct state.
  Vec ghz = Vec::Zero(16);
  ghz(0) = ghz(15) = 1 / std::sqrt(2.0);
  const StateVector s(
      std::vector<Qubit>{{"q1", "n"}, {"q2", "n"}, {"q3", "n"}, {"q4", "n"}},
      ghz);
  REQUIRE(schmidt_triple(s) == std::array<int, 3>{2, 2, 2});
}

TEST_CASE("schmidt triple is invariant under local unitaries") {
  Rng rng(149);
  const StateVector base = family_state(2, {Complex(0.7, 0.1), Complex(0.3, 0),
                                            Complex(0.2, -0.4)});
  const auto want = schmidt_triple(base);
  for (int trial = 0; trial < 10; ++trial) {
    StateVector dressed = base;
    for (const char* q : {"q1", "q2", "q3", "q4"})
      dressed.apply(rng.haar_unitary(2), {q});
    REQUIRE(schmidt_triple(dressed) == want);
  }
}

TEST_CASE("family constructors validate their parameters") {
  REQUIRE_THROWS_AS(family_state(1, {}), QncError);
  REQUIRE_THROWS_AS(family_state(9, {Complex(1, 0)}), QncError);
  REQUIRE_THROWS_AS(family_state(10, {}), QncError);
  // Zero parameters can give the null state for family 1.
  REQUIRE_THROWS_AS(family_state(1, {0, 0, 0, 0}), QncError);
  // Substitution check: family 5 with a = 0.
  const StateVector f5 = family_state(5, {Complex(0, 0)});
  const Vec amps = f5.amplitudes();
  const double s = 1 / std::sqrt(3.0);
  REQUIRE(std::abs(amps(1) - kI * s) < 1e-12);   // |0001>
  REQUIRE(std::abs(amps(6) - s) < 1e-12);        // |0110>
  REQUIRE(std::abs(amps(11) + kI * s) < 1e-12);  // |1011>
}

TEST_CASE("family 1 with a=d, b=c lands on the (4,2,4) triple") {
  const Complex a(0.7, 0.0), b(0.3, 0.0);
  const StateVector s = family_state(1, {a, b, b, a});
  const auto triple = schmidt_triple(s);
  REQUIRE(triple == std::array<int, 3>{4, 2, 4});
}

TEST_CASE("family 6 scan gives uniform triples of rank 2 or 3") {
  ScanGrid grid;
  grid.families = {6};
  const ScanReport rep = four_qubit_rank_scan(grid);
  REQUIRE(rep.clean());
  for (const auto& [key, count] : rep.histogram.at(6)) {
    REQUIRE((key == "2,2,2" || key == "3,3,3"));
  }
}

TEST_CASE("small grid scan finds no forbidden triple") {
  ScanGrid grid;
  grid.magnitudes = {0.0, 0.6};
  grid.phases = {0.0, kPi / 3};
  const ScanReport rep = four_qubit_rank_scan(grid);
  REQUIRE(rep.clean());
  REQUIRE(rep.total_points > 0);
  const nlohmann::json j = scan_report_to_json(rep);
  REQUIRE(j["forbidden_count"].get<int>() == 0);
}
