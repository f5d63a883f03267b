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

#include <vector>

#include <Eigen/Core>

#include "quasar/errors.hpp"

namespace quasar {

using Index = Eigen::Index;

// Target symbols, excluding blank. Blank is always the last class column.
using LabelSequence = std::vector<int>;

// Per-frame class posteriors, rows = frames, columns = classes + blank.
// Each row sums to one; the last column is the blank symbol.
struct FramePosterior {
  Eigen::MatrixXd p;  // [T, classes+1]
  Index frames() const { return p.rows(); }
  Index columns() const { return p.cols(); }
  int blank() const { return static_cast<int>(p.cols()) - 1; }
};

// Merges adjacent repeats, then removes blanks.
LabelSequence collapse(const std::vector<int>& path, int blank);

// Fewest frames that can carry the target: its length plus one forced blank
// between each adjacent repeated pair.
Index ctc_min_frames(const LabelSequence& target);

struct CtcResult {
  double loss = 0.0;
  // d(loss)/d(logit) for the pre-softmax logits that produced the
  // posteriors; same shape as the posterior matrix.
  Eigen::MatrixXd grad_logits;
};

// Forward-backward evaluation of -log P(target | posteriors) over the
// blank-augmented label sequence, computed in log space. Throws
// ImpossibleTarget when the target cannot fit in the available frames.
CtcResult ctc_loss(const FramePosterior& post, const LabelSequence& target);

// Exact loss by enumerating every (classes+1)^T path; the test oracle for
// ctc_loss. Throws TooLarge beyond 1e7 paths.
double ctc_loss_bruteforce(const FramePosterior& post, const LabelSequence& target);

// Per-frame argmax (ties to the lowest class id) followed by collapse.
LabelSequence best_path_decode(const FramePosterior& post);

}  // namespace quasar
