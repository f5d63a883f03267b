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

#include "quasar/ctc.hpp"

namespace quasar {

struct EditStats {
  long long subs = 0, ins = 0, dels = 0;
  long long ref_len = 0;

  long long errors() const { return subs + ins + dels; }
  // 100 * (S+I+D) / reference length.
  double per() const {
    return 100.0 * static_cast<double>(errors()) /
           static_cast<double>(ref_len > 0 ? ref_len : 1);
  }
  EditStats& operator+=(const EditStats& o) {
    subs += o.subs;
    ins += o.ins;
    dels += o.dels;
    ref_len += o.ref_len;
    return *this;
  }
};

// Levenshtein alignment with unit costs. Among alignments of minimal total
// error, the breakdown minimizing (subs, ins, dels) lexicographically is
// chosen, which makes the counts unique and testable by enumeration.
EditStats edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp);

struct EvalReport {
  std::vector<std::string> utt_ids;
  std::vector<LabelSequence> decoded;
  EditStats edits;
  double per = 0.0;
  double frame_accuracy = -1.0;  // framewise heads only; -1 otherwise
  long long param_count = 0;
  std::vector<std::string> history;  // per-epoch metric lines, if known

  std::string to_json() const;
};

}  // namespace quasar
