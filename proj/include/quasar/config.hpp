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
#include <string>
#include <vector>

#include "quasar/tensor.hpp"

namespace quasar {

enum class ArchKind { CNN, QCNN, RNN, QRNN };
enum class HeadKind { CTC, Framewise };

ArchKind arch_from_string(const std::string& s);
std::string arch_to_string(ArchKind a);
bool arch_is_quaternion(ArchKind a);
bool arch_is_conv(ArchKind a);
HeadKind head_from_string(const std::string& s);
std::string head_to_string(HeadKind h);

// Widths are always given in real-equivalent units, the convention used for
// reporting model sizes; quaternion architectures divide them by four.
struct ConvSpec {
  Index first_maps = 32;     // pre-pooling convolution output maps
  std::vector<Index> maps;   // output maps of the main convolution stack
  Index kernel_h = 3;
  Index kernel_w = 5;
  Index pool = 2;            // frequency pooling window after the first conv
};

struct RecurrentSpec {
  Index layers = 4;
  Index hidden = 1024;
};

struct TrainSpec {
  Index epochs = 25;
  double lr = 8e-4;
  double halving = 0.5;
  int patience = 1;
  Index batch = 8;
  double rho = 0.99;
  double eps = 1e-8;
};

struct ModelConfig {
  ArchKind arch = ArchKind::QCNN;
  HeadKind head = HeadKind::CTC;
  Index classes = 0;       // target symbols, excluding blank
  Index input_bands = 40;  // quaternion dimension per frame
  std::string activation = "prelu";
  double dropout = 0.2;
  double l2 = 1e-5;
  uint64_t seed = 1;
  std::vector<Index> dense;  // dense widths after the conv stack
  ConvSpec conv;
  RecurrentSpec recurrent;
  TrainSpec train;
};

// Throws InvalidConfig with a human-readable reason.
void validate(const ModelConfig& cfg);

ModelConfig parse_config(const std::string& text);
// Canonical serialization (sorted keys, two-space indent); parsing it back
// reproduces the config exactly.
std::string canonical_config_text(const ModelConfig& cfg);

ModelConfig load_config(const std::string& path);
void save_config(const ModelConfig& cfg, const std::string& path);

}  // namespace quasar
