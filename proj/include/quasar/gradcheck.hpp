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

#include <functional>
#include <vector>

#include "quasar/tape.hpp"

namespace quasar {

// Builds a scalar loss from leaf variables created over the given point.
using LossBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central finite-difference verification of the tape's backward rules:
// returns max_i |analytic_i - (f(p+eps e_i) - f(p-eps e_i)) / 2eps|
//              / max(1, |analytic_i|)
// over every coordinate of every tensor in `point`.
double grad_check(const LossBuilder& f, const std::vector<RealTensor>& point, double eps);

}  // namespace quasar
