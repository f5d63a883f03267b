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

#include "quasar/init.hpp"

#include <cmath>

namespace quasar {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Uniform direction on the unit 2-sphere via normalized Gaussians.
void unit3(Rng& rng, double& ux, double& uy, double& uz) {
  double n;
  do {
    ux = rng.normal();
    uy = rng.normal();
    uz = rng.normal();
    n = std::sqrt(ux * ux + uy * uy + uz * uz);
  } while (n < 1e-12);
  ux /= n;
  uy /= n;
  uz /= n;
}
}  // namespace

QuaternionTensor quaternion_init(const InitSpec& spec, Shape shape, Rng& rng) {
  if (spec.fan_in <= 0 || spec.fan_out <= 0) throw InvalidFan();
  const double sigma = 1.0 / std::sqrt(2.0 * static_cast<double>(spec.fan_in + spec.fan_out));

  QuaternionTensor q = QuaternionTensor::zeros(std::move(shape));
  for (Index i = 0; i < q.units(); ++i) {
    const double mag = rng.rayleigh(sigma);
    const double theta = rng.uniform(-kPi, kPi);
    double ux, uy, uz;
    unit3(rng, ux, uy, uz);
    const double s = mag * std::sin(theta);
    q.r.data[i] = mag * std::cos(theta);
    q.x.data[i] = s * ux;
    q.y.data[i] = s * uy;
    q.z.data[i] = s * uz;
  }
  return q;
}

QuaternionTensor quaternion_init(const InitSpec& spec, Shape shape) {
  Rng rng(spec.seed);
  return quaternion_init(spec, std::move(shape), rng);
}

RealTensor glorot_init(Index fan_in, Index fan_out, Shape shape, Rng& rng) {
  if (fan_in <= 0 || fan_out <= 0) throw InvalidFan();
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  RealTensor t = RealTensor::zeros(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.data[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace quasar
