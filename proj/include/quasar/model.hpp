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

#include "quasar/config.hpp"
#include "quasar/layers.hpp"

namespace quasar {

struct LayerCount {
  std::string name;
  long long weights = 0;
  long long other = 0;  // biases, activation slopes
  long long total() const { return weights + other; }
};

// Exact real-parameter counts per layer, derived from the configuration
// alone (no allocation); matches Model::build parameter storage item for
// item.
std::vector<LayerCount> param_table(const ModelConfig& cfg);
long long param_total(const ModelConfig& cfg);

// Softmax output columns: one per class, plus blank for CTC heads.
Index head_columns(const ModelConfig& cfg);

// A group of utterances forwarded together; shorter ones are zero-padded to
// the longest.
struct BatchInput {
  std::vector<const QuaternionTensor*> utts;  // each [T_i, bands]
  std::vector<Index> lengths;
  Index bands = 0;
  Index max_frames = 0;
};

BatchInput make_batch(const std::vector<const QuaternionTensor*>& utts);

struct ModelLogits {
  Var logits;          // [rows, head columns]
  Index batch = 0;     // B
  Index frames = 0;    // padded frame count T
  // Row of utterance b, frame t: step-major puts it at t*B + b (recurrent
  // stacks), otherwise at b*T + t (convolutional stacks).
  bool step_major = false;
  Index row_of(Index b, Index t) const { return step_major ? t * batch + b : b * frames + t; }
};

class Model {
 public:
  Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  static Model build(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  // Trainable tensors in declaration order (the checkpoint block order).
  std::vector<ParamRef> params();
  long long param_count_actual();

  ModelLogits forward(LeafRegistry& reg, const BatchInput& in, bool training,
                      Rng& dropout_rng) const;

 private:
  ModelConfig cfg_;
  Act act_ = Act::PReLU;

  // convolutional path
  QConv2d qconv0_;
  std::vector<QConv2d> qconvs_;
  RealConv2d rconv0_;
  std::vector<RealConv2d> rconvs_;
  std::vector<QDense> qdenses_;
  std::vector<RealDense> rdenses_;

  // recurrent path
  std::vector<QRNNCell> qcells_;
  std::vector<RealRNNCell> rcells_;

  SoftmaxHead head_;
  std::vector<RealTensor> prelu_slopes_;

  ModelLogits forward_conv(LeafRegistry& reg, const BatchInput& in, bool training,
                           Rng& rng) const;
  ModelLogits forward_recurrent(LeafRegistry& reg, const BatchInput& in, bool training,
                                Rng& rng) const;
};

}  // namespace quasar
