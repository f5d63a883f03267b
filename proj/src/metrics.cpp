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

#include "quasar/metrics.hpp"

#include <json.hpp>

namespace quasar {

namespace {

struct Cost {
  int total = 0, subs = 0, ins = 0, dels = 0;

  bool operator<(const Cost& o) const {
    if (total != o.total) return total < o.total;
    if (subs != o.subs) return subs < o.subs;
    if (ins != o.ins) return ins < o.ins;
    return dels < o.dels;
  }
  Cost plus(int t, int s, int i, int d) const { return {total + t, subs + s, ins + i, dels + d}; }
};

}  // namespace

EditStats edit_distance(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const size_t R = ref.size(), H = hyp.size();
  std::vector<Cost> prev(H + 1), cur(H + 1);
  for (size_t j = 1; j <= H; ++j) prev[j] = prev[j - 1].plus(1, 0, 1, 0);
  for (size_t i = 1; i <= R; ++i) {
    cur[0] = prev[0].plus(1, 0, 0, 1);
    for (size_t j = 1; j <= H; ++j) {
      const bool match = ref[i - 1] == hyp[j - 1];
      Cost best = prev[j - 1].plus(match ? 0 : 1, match ? 0 : 1, 0, 0);
      Cost via_ins = cur[j - 1].plus(1, 0, 1, 0);
      Cost via_del = prev[j].plus(1, 0, 0, 1);
      if (via_ins < best) best = via_ins;
      if (via_del < best) best = via_del;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cost& c = prev[H];
  EditStats s;
  s.subs = c.subs;
  s.ins = c.ins;
  s.dels = c.dels;
  s.ref_len = static_cast<long long>(R);
  return s;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["per"] = per;
  j["errors"]["substitutions"] = edits.subs;
  j["errors"]["insertions"] = edits.ins;
  j["errors"]["deletions"] = edits.dels;
  j["errors"]["reference_tokens"] = edits.ref_len;
  if (frame_accuracy >= 0.0) j["frame_accuracy"] = frame_accuracy;
  j["param_count"] = param_count;
  nlohmann::json utts = nlohmann::json::array();
  for (size_t i = 0; i < utt_ids.size(); ++i) {
    nlohmann::json u;
    u["id"] = utt_ids[i];
    u["decoded"] = decoded[i];
    utts.push_back(std::move(u));
  }
  j["utterances"] = std::move(utts);
  if (!history.empty()) j["history"] = history;
  return j.dump(2) + "\n";
}

}  // namespace quasar
