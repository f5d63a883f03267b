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

#include "quasar/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace quasar {

namespace {

double eval_at(const LossBuilder& f, const std::vector<RealTensor>& point) {
  Tape t;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const RealTensor& p : point) leaves.push_back(t.leaf(p));
  Var loss = f(t, leaves);
  if (t.val(loss).size() != 1) throw NonScalarLoss();
  return t.val(loss).data[0];
}

}  // namespace

double grad_check(const LossBuilder& f, const std::vector<RealTensor>& point, double eps) {
  // Analytic pass.
  Tape t;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const RealTensor& p : point) leaves.push_back(t.leaf(p));
  Var loss = f(t, leaves);
  if (t.val(loss).size() != 1) throw NonScalarLoss();
  Gradients grads = t.backward(loss);

  double worst = 0.0;
  std::vector<RealTensor> probe = point;
  for (size_t i = 0; i < point.size(); ++i) {
    const RealTensor& analytic = grads[leaves[i].id];
    for (Index j = 0; j < point[i].size(); ++j) {
      const double saved = probe[i].data[j];
      probe[i].data[j] = saved + eps;
      const double up = eval_at(f, probe);
      probe[i].data[j] = saved - eps;
      const double down = eval_at(f, probe);
      probe[i].data[j] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double rel =
          std::abs(analytic.data[j] - numeric) / std::max(1.0, std::abs(analytic.data[j]));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace quasar
