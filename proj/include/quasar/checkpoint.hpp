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

#include "quasar/model.hpp"

namespace quasar {

struct CheckpointMeta {
  int epoch = 0;
  std::vector<std::string> history;  // metric log lines up to this epoch
};

// Container layout: "QNNCKPT1" magic, little-endian u64 manifest length, a
// JSON manifest (format version, config, tensor names/shapes, epoch,
// history), then the raw little-endian doubles of every tensor in
// declaration order. Round trips are bit-exact.
void save_checkpoint(const std::string& path, Model& model, const CheckpointMeta& meta);

Model load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

// Overwrites the parameters of an existing model; shapes and names must
// match (BadCheckpoint otherwise).
void load_checkpoint_into(const std::string& path, Model& model, CheckpointMeta* meta = nullptr);

}  // namespace quasar
