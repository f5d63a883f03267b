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

#include <limits>
#include <vector>

#include "quasar/layers.hpp"

namespace quasar {

// RMSProp with vanilla hyperparameters: acc <- rho acc + (1-rho) g^2,
// p <- p - lr g / (sqrt(acc) + eps), with the L2 term folded into g for
// decaying parameters before both updates.
class RmsProp {
 public:
  RmsProp(double lr, double rho = 0.99, double eps = 1e-8, double l2 = 0.0)
      : lr_(lr), rho_(rho), eps_(eps), l2_(l2) {}

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long long steps() const { return steps_; }

  // grads[i] may be null (parameter unreachable this step: treated as zero
  // gradient apart from the L2 term).
  void step(const std::vector<ParamRef>& params, const std::vector<const RealTensor*>& grads);

 private:
  double lr_, rho_, eps_, l2_;
  long long steps_ = 0;
  std::vector<Eigen::ArrayXd> acc_;
};

// Halving schedule: the rate is multiplied by `factor` whenever the
// validation metric has failed to improve on its best for `patience`
// consecutive observations.
struct TrainSchedule {
  double lr = 8e-4;
  double factor = 0.5;
  int patience = 1;

  double best = std::numeric_limits<double>::infinity();
  int stall = 0;

  // Feeds one epoch's validation metric (lower is better); returns the
  // learning rate to use next.
  double observe(double dev_metric) {
    if (dev_metric < best) {
      best = dev_metric;
      stall = 0;
    } else if (++stall >= patience) {
      lr *= factor;
      stall = 0;
    }
    return lr;
  }
};

// Replays a whole metric history through a fresh schedule and returns the
// resulting rate.
double lr_schedule_update(double initial_lr, const std::vector<double>& dev_metric_history,
                          double factor = 0.5, int patience = 1);

}  // namespace quasar
