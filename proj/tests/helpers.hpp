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

#include "qnc/decompositions.hpp"
#include "qnc/linalg.hpp"

namespace qnc::testing {

// Draws chamber-interior canonical parameters for the requested class so the
// class of the sample is known by construction (independently of the
// extraction code under test).
inline Mat random_kc_class(Rng& rng, int kc, bool dress = true) {
  double x = 0, y = 0, z = 0;
  if (kc >= 1) x = rng.uniform(0.5, 0.7);
  if (kc >= 2) y = rng.uniform(0.25, 0.45);
  if (kc >= 3) z = rng.uniform(0.05, 0.2);
  if (kc == 1) x = rng.uniform(0.2, kPi / 4 - 0.05);
  Mat u = canonical_gate(x, y, z);
  if (dress)
    u = kron(rng.haar_unitary(2), rng.haar_unitary(2)) * u *
        kron(rng.haar_unitary(2), rng.haar_unitary(2));
  return u;
}

}  // namespace qnc::testing
