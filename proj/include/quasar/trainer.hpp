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

#include <optional>
#include <string>

#include "quasar/checkpoint.hpp"
#include "quasar/dataset.hpp"
#include "quasar/metrics.hpp"
#include "quasar/model.hpp"

namespace quasar {

struct TrainOptions {
  std::string out_dir;
  std::string resume;  // checkpoint to continue from, may be empty
  int threads = 1;     // parallel evaluation workers (training is single-writer)
  bool quiet = true;
  std::optional<uint64_t> seed_override;
};

struct TrainResult {
  std::vector<std::string> metric_lines;
  std::string best_checkpoint;
  std::string last_checkpoint;
  double first_train_loss = 0.0;
  double final_train_loss = 0.0;
  double best_dev_loss = 0.0;
};

// Epoch loop: forward, head loss, backward, RMSProp update, halving
// schedule on the dev loss; logs one metrics line per epoch and keeps the
// best-dev checkpoint. Deterministic given seed, config and data.
TrainResult train(const ModelConfig& cfg, const Dataset& train_set, const Dataset& dev_set,
                  const TrainOptions& opts);

// Decodes every utterance (best-path for CTC heads, per-frame argmax for
// framewise heads) and scores it against the labels. Workers split the
// utterances; results merge in utterance order, so the report is identical
// for any thread count.
EvalReport evaluate(Model& model, const Dataset& data, int threads = 1);
EvalReport evaluate_checkpoint(const std::string& path, const Dataset& data, int threads = 1);

// Shared by train/evaluate: bands, label ranges, frame counts.
void validate_dataset(const ModelConfig& cfg, const Dataset& ds, const std::string& which);

}  // namespace quasar
