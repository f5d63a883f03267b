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

#include "quasar/dataset.hpp"

namespace quasar {

// Bundled synthetic tasks for desk-scale end-to-end runs. Both are fully
// deterministic given the seed.

// Sequence task for the CTC head: 1-3 symbols drawn from three noisy
// quaternion prototypes, separated by silence; labels are the symbol
// sequence. 8 bands, 3 classes.
Dataset make_ctc_toy(uint64_t seed, Index n_utts);

// Per-frame task for the framewise head: a hidden Markov chain over four
// states emits noisy state prototypes; labels are the per-frame states.
// 8 bands, 4 classes.
Dataset make_framewise_toy(uint64_t seed, Index n_utts);

constexpr Index kToyBands = 8;
constexpr Index kCtcToyClasses = 3;
constexpr Index kFramewiseToyClasses = 4;

}  // namespace quasar
