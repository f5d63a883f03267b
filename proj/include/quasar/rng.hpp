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

#include <cmath>
#include <cstdint>
#include <random>

namespace quasar {

// Seeded generator with hand-rolled variate transforms so that streams are
// reproducible bit-for-bit across standard library implementations
// (std::normal_distribution and friends are not pinned by the standard).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed), seed_mix_(splitmix(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller transform; consumes exactly two draws per variate.
  double normal() {
    const double u1 = unit_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  double rayleigh(double sigma) { return sigma * std::sqrt(-2.0 * std::log(unit_open())); }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent substream derived from the original seed; stable under
  // changes to the parent's draw count.
  Rng fork(uint64_t stream) const {
    return Rng(splitmix(seed_mix_ ^ (0x9e3779b97f4a7c15ull * (stream + 1))));
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;

  // Uniform on (0, 1]; safe as a log argument.
  double unit_open() { return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; }

  static uint64_t splitmix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  uint64_t seed_mix_;
};

}  // namespace quasar
