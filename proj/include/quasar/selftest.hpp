// Copyright 2026 The Quasar Authors.
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

#include <string>
#include <vector>

namespace quasar {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;  // worst errors observed, or the first failure
  double seconds = 0.0;
};

// Hamilton product vs. its 4x4 matrix representation, associativity, norm
// multiplicativity, conjugate anti-homomorphism, unit-basis witnesses.
SuiteResult algebra_suite();

// Central finite-difference checks of every layer's backward rules
// (dense, 3x5 convolution, three unrolled recurrent steps, the split
// activations, the softmax head with cross entropy, the CTC loss).
SuiteResult gradient_suite();

// Forward-backward CTC loss vs. exhaustive path enumeration on 200 small
// random instances, plus the worked collapse examples.
SuiteResult ctc_suite();

std::vector<SuiteResult> run_selftests();

}  // namespace quasar
