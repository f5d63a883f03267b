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

#include <cstdint>

#include "quasar/rng.hpp"
#include "quasar/tensor.hpp"

namespace quasar {

struct InitSpec {
  Index fan_in = 0;
  Index fan_out = 0;
  uint64_t seed = 0;
};

// Polar quaternion initialization: each weight is
//   w = |w| (cos(theta) + u_i sin(theta) i + u_j sin(theta) j + u_k sin(theta) k)
// with |w| ~ Rayleigh(sigma), sigma = 1/sqrt(2 (fan_in + fan_out)),
// theta ~ U[-pi, pi], and (u_i, u_j, u_k) a uniform unit 3-vector, so that
// E[|w|^2] = 2 sigma^2 = 1/(fan_in + fan_out). Deterministic given the seed.
QuaternionTensor quaternion_init(const InitSpec& spec, Shape shape);
QuaternionTensor quaternion_init(const InitSpec& spec, Shape shape, Rng& rng);

// Glorot-uniform real initialization for the real-valued baselines.
RealTensor glorot_init(Index fan_in, Index fan_out, Shape shape, Rng& rng);

}  // namespace quasar
