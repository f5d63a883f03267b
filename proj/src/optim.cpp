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

#include "quasar/optim.hpp"

namespace quasar {

void RmsProp::step(const std::vector<ParamRef>& params,
                   const std::vector<const RealTensor*>& grads) {
  if (grads.size() != params.size())
    throw ShapeMismatch("optimizer: one gradient slot per parameter required");
  if (acc_.empty()) {
    acc_.reserve(params.size());
    for (const ParamRef& p : params) acc_.push_back(Eigen::ArrayXd::Zero(p.tensor->size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    RealTensor& p = *params[i].tensor;
    Eigen::ArrayXd g = grads[i] ? grads[i]->data : Eigen::ArrayXd::Zero(p.size());
    if (params[i].decay && l2_ > 0.0) g += l2_ * p.data;
    acc_[i] = rho_ * acc_[i] + (1.0 - rho_) * g.square();
    p.data -= lr_ * g / (acc_[i].sqrt() + eps_);
  }
  ++steps_;
}

double lr_schedule_update(double initial_lr, const std::vector<double>& dev_metric_history,
                          double factor, int patience) {
  TrainSchedule sched;
  sched.lr = initial_lr;
  sched.factor = factor;
  sched.patience = patience;
  for (double m : dev_metric_history) sched.observe(m);
  return sched.lr;
}

}  // namespace quasar
