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

#include "quasar/toyset.hpp"

#include <array>

#include "quasar/rng.hpp"

namespace quasar {

namespace {

struct Proto {
  // Per band: four component values.
  std::vector<std::array<double, 4>> bands;
};

std::vector<Proto> make_prototypes(Rng& rng, Index classes, Index bands, double amp) {
  std::vector<Proto> protos(static_cast<size_t>(classes));
  for (auto& p : protos) {
    p.bands.resize(static_cast<size_t>(bands));
    for (auto& b : p.bands)
      for (double& v : b) v = amp * (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.6, 1.0);
  }
  return protos;
}

void emit_frame(QuaternionTensor& q, Index t, const Proto* proto, double noise, Rng& rng) {
  const Index F = q.shape[1];
  for (Index f = 0; f < F; ++f) {
    const Index at = t * F + f;
    const std::array<double, 4> base =
        proto ? proto->bands[static_cast<size_t>(f)] : std::array<double, 4>{0, 0, 0, 0};
    q.r.data[at] = base[0] + noise * rng.normal();
    q.x.data[at] = base[1] + noise * rng.normal();
    q.y.data[at] = base[2] + noise * rng.normal();
    q.z.data[at] = base[3] + noise * rng.normal();
  }
}

}  // namespace

// The prototypes define the task itself and stay fixed; the seed only
// drives utterance composition and noise, so differently seeded draws are
// train/dev splits of the same task.
constexpr uint64_t kCtcProtoSeed = 0x9c7c1a5e;
constexpr uint64_t kFramewiseProtoSeed = 0x51e77ab1;

Dataset make_ctc_toy(uint64_t seed, Index n_utts) {
  Rng proto_rng(kCtcProtoSeed);
  Rng rng = Rng(seed).fork(2);
  const std::vector<Proto> protos = make_prototypes(proto_rng, kCtcToyClasses, kToyBands, 1.0);
  constexpr double kNoise = 0.15;

  Dataset ds;
  ds.bands = kToyBands;
  for (Index i = 0; i < n_utts; ++i) {
    Utterance u;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "utt%04lld", static_cast<long long>(i));
    u.id = buf;

    const int n_symbols = 1 + static_cast<int>(rng.uniform() * 3.0);  // 1..3
    std::vector<std::pair<const Proto*, int>> plan;                    // (proto or null, frames)
    plan.emplace_back(nullptr, 2 + static_cast<int>(rng.uniform() * 2.0));
    for (int s = 0; s < n_symbols; ++s) {
      const int sym = static_cast<int>(rng.uniform() * kCtcToyClasses);
      u.labels.push_back(sym);
      plan.emplace_back(&protos[static_cast<size_t>(sym)],
                        5 + static_cast<int>(rng.uniform() * 3.0));
      plan.emplace_back(nullptr, 2 + static_cast<int>(rng.uniform() * 2.0));
    }
    Index frames = 0;
    for (const auto& seg : plan) frames += seg.second;

    u.feats = QuaternionTensor::zeros({frames, kToyBands});
    Index t = 0;
    for (const auto& seg : plan)
      for (int k = 0; k < seg.second; ++k) emit_frame(u.feats, t++, seg.first, kNoise, rng);
    ds.utts.push_back(std::move(u));
  }
  return ds;
}

Dataset make_framewise_toy(uint64_t seed, Index n_utts) {
  Rng proto_rng(kFramewiseProtoSeed);
  Rng rng = Rng(seed).fork(4);
  const std::vector<Proto> protos =
      make_prototypes(proto_rng, kFramewiseToyClasses, kToyBands, 1.0);
  constexpr double kNoise = 0.1;
  constexpr double kSelfLoop = 0.85;
  constexpr Index kFrames = 40;

  Dataset ds;
  ds.bands = kToyBands;
  for (Index i = 0; i < n_utts; ++i) {
    Utterance u;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "utt%04lld", static_cast<long long>(i));
    u.id = buf;
    u.feats = QuaternionTensor::zeros({kFrames, kToyBands});

    int state = static_cast<int>(rng.uniform() * kFramewiseToyClasses);
    for (Index t = 0; t < kFrames; ++t) {
      if (t > 0 && !rng.bernoulli(kSelfLoop)) {
        const int jump = 1 + static_cast<int>(rng.uniform() * (kFramewiseToyClasses - 1));
        state = (state + jump) % kFramewiseToyClasses;
      }
      u.labels.push_back(state);
      emit_frame(u.feats, t, &protos[static_cast<size_t>(state)], kNoise, rng);
    }
    ds.utts.push_back(std::move(u));
  }
  return ds;
}

}  // namespace quasar
