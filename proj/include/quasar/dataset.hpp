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

#include "quasar/tensor.hpp"

namespace quasar {

// One utterance: acoustic quaternions [frames, bands] plus integer labels.
// For a CTC head the labels are the target symbols; for a framewise head
// they are one class id per frame.
struct Utterance {
  std::string id;
  QuaternionTensor feats;
  std::vector<int> labels;

  Index frames() const { return feats.shape[0]; }
  Index bands() const { return feats.shape[1]; }
};

struct Dataset {
  std::vector<Utterance> utts;
  Index bands = 0;
};

// Directory layout: one <id>.qacf per utterance, a labels.txt with
// "<id> <int> <int> ..." lines, and an optional dataset.json declaring how
// the feature files are to be read:
//   {"features": "energy"}       log-mel energies; deltas are computed and
//                                packed into acoustic quaternions on load
//                                (the default when dataset.json is absent)
//   {"features": "quaternion4"}  rows hold the four component planes
//                                stacked r|x|y|z, 4*bands rows in total
Dataset load_dataset(const std::string& dir);

// Writes a dataset in the quaternion4 layout (plus labels and metadata).
void write_dataset(const std::string& dir, const Dataset& ds);

}  // namespace quasar
