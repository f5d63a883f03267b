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

#include "quasar/model.hpp"

namespace quasar {

Index head_columns(const ModelConfig& cfg) {
  return cfg.classes + (cfg.head == HeadKind::CTC ? 1 : 0);
}

// ---------------------------------------------------------------------------
// parameter accounting

namespace {

struct Dims {
  bool quat;
  Index q(Index real_width) const { return quat ? real_width / 4 : real_width; }
};

}  // namespace

std::vector<LayerCount> param_table(const ModelConfig& cfg) {
  validate(cfg);
  const Dims d{arch_is_quaternion(cfg.arch)};
  const long long comp = d.quat ? 4 : 1;
  const bool prelu = act_from_string(cfg.activation) == Act::PReLU;
  std::vector<LayerCount> rows;
  auto act_row = [&](const std::string& name) {
    if (prelu) rows.push_back({name + ".act", 0, 1});
  };

  if (arch_is_conv(cfg.arch)) {
    const Index kh = cfg.conv.kernel_h, kw = cfg.conv.kernel_w;
    Index in_maps = d.quat ? 1 : 4;  // one quaternion plane or its four real views
    Index out = d.q(cfg.conv.first_maps);
    rows.push_back({"conv0", comp * out * in_maps * kh * kw, comp * out});
    act_row("conv0");
    in_maps = out;
    for (size_t i = 0; i < cfg.conv.maps.size(); ++i) {
      out = d.q(cfg.conv.maps[i]);
      const std::string name = "conv" + std::to_string(i + 1);
      rows.push_back({name, comp * out * in_maps * kh * kw, comp * out});
      act_row(name);
      in_maps = out;
    }
    const Index pooled = (cfg.input_bands + cfg.conv.pool - 1) / cfg.conv.pool;
    Index in_units = in_maps * pooled;
    for (size_t i = 0; i < cfg.dense.size(); ++i) {
      const Index out_units = d.q(cfg.dense[i]);
      const std::string name = "dense" + std::to_string(i);
      rows.push_back({name, comp * out_units * in_units, comp * out_units});
      act_row(name);
      in_units = out_units;
    }
    rows.push_back({"head", head_columns(cfg) * comp * in_units, head_columns(cfg)});
  } else {
    const Index hidden = d.q(cfg.recurrent.hidden);
    Index in_units = cfg.input_bands;
    for (Index l = 0; l < cfg.recurrent.layers; ++l) {
      const std::string name = "rnn" + std::to_string(l);
      rows.push_back({name, comp * (hidden * hidden + hidden * in_units), comp * hidden});
      act_row(name);
      in_units = hidden;
    }
    rows.push_back({"head", head_columns(cfg) * comp * hidden, head_columns(cfg)});
  }
  return rows;
}

long long param_total(const ModelConfig& cfg) {
  long long total = 0;
  for (const LayerCount& c : param_table(cfg)) total += c.total();
  return total;
}

// ---------------------------------------------------------------------------
// batches

BatchInput make_batch(const std::vector<const QuaternionTensor*>& utts) {
  if (utts.empty()) throw EmptyDataset();
  BatchInput b;
  b.utts = utts;
  for (const QuaternionTensor* u : utts) {
    if (u->shape.size() != 2)
      throw ShapeMismatch("utterance features must be [frames, bands]");
    if (b.bands == 0) b.bands = u->shape[1];
    if (u->shape[1] != b.bands)
      throw DimensionMismatch("utterances mix band counts within a batch");
    b.lengths.push_back(u->shape[0]);
    b.max_frames = std::max(b.max_frames, u->shape[0]);
  }
  return b;
}

// ---------------------------------------------------------------------------
// construction

Model Model::build(const ModelConfig& cfg) {
  validate(cfg);
  Model m;
  m.cfg_ = cfg;
  m.act_ = act_from_string(cfg.activation);
  Rng rng(cfg.seed);
  const Dims d{arch_is_quaternion(cfg.arch)};
  size_t act_sites = 0;

  if (arch_is_conv(cfg.arch)) {
    const Index kh = cfg.conv.kernel_h, kw = cfg.conv.kernel_w;
    const Index ph = (kh - 1) / 2, pw = (kw - 1) / 2;  // "same" for odd kernels
    if (d.quat) {
      m.qconv0_ = QConv2d{1, d.q(cfg.conv.first_maps), kh, kw, ph, pw};
      m.qconv0_.init(rng);
      Index maps = m.qconv0_.out_maps_q;
      m.qconvs_.reserve(cfg.conv.maps.size());
      for (Index real_maps : cfg.conv.maps) {
        QConv2d c{maps, d.q(real_maps), kh, kw, ph, pw};
        c.init(rng);
        maps = c.out_maps_q;
        m.qconvs_.push_back(std::move(c));
      }
      const Index pooled = (cfg.input_bands + cfg.conv.pool - 1) / cfg.conv.pool;
      Index units = maps * pooled;
      m.qdenses_.reserve(cfg.dense.size());
      for (Index real_width : cfg.dense) {
        QDense dl{units, d.q(real_width)};
        dl.init(rng);
        units = dl.out_q;
        m.qdenses_.push_back(std::move(dl));
      }
      m.head_.in_dim = 4 * units;
      act_sites = 1 + m.qconvs_.size() + m.qdenses_.size();
    } else {
      m.rconv0_ = RealConv2d{4, cfg.conv.first_maps, kh, kw, ph, pw};
      m.rconv0_.init(rng);
      Index maps = m.rconv0_.out_maps;
      m.rconvs_.reserve(cfg.conv.maps.size());
      for (Index real_maps : cfg.conv.maps) {
        RealConv2d c{maps, real_maps, kh, kw, ph, pw};
        c.init(rng);
        maps = c.out_maps;
        m.rconvs_.push_back(std::move(c));
      }
      const Index pooled = (cfg.input_bands + cfg.conv.pool - 1) / cfg.conv.pool;
      Index units = maps * pooled;
      m.rdenses_.reserve(cfg.dense.size());
      for (Index real_width : cfg.dense) {
        RealDense dl{units, real_width};
        dl.init(rng);
        units = dl.out;
        m.rdenses_.push_back(std::move(dl));
      }
      m.head_.in_dim = units;
      act_sites = 1 + m.rconvs_.size() + m.rdenses_.size();
    }
  } else {
    const Act cell_act = m.act_;
    if (d.quat) {
      const Index hidden = d.q(cfg.recurrent.hidden);
      Index in_units = cfg.input_bands;
      m.qcells_.reserve(static_cast<size_t>(cfg.recurrent.layers));
      for (Index l = 0; l < cfg.recurrent.layers; ++l) {
        QRNNCell cell;
        cell.in_q = in_units;
        cell.hidden_q = hidden;
        cell.out_q = 0;  // the stack feeds the real head directly
        cell.act = cell_act;
        cell.init(rng);
        in_units = hidden;
        m.qcells_.push_back(std::move(cell));
      }
      m.head_.in_dim = 4 * hidden;
    } else {
      const Index hidden = cfg.recurrent.hidden;
      Index in_units = cfg.input_bands * 4;  // real view of the acoustic quaternions
      m.rcells_.reserve(static_cast<size_t>(cfg.recurrent.layers));
      for (Index l = 0; l < cfg.recurrent.layers; ++l) {
        RealRNNCell cell;
        cell.in = in_units;
        cell.hidden = hidden;
        cell.act = cell_act;
        cell.init(rng);
        in_units = hidden;
        m.rcells_.push_back(std::move(cell));
      }
      m.head_.in_dim = hidden;
    }
    act_sites = static_cast<size_t>(cfg.recurrent.layers);
  }

  m.head_.classes = head_columns(cfg);
  m.head_.init(rng);
  if (m.act_ == Act::PReLU)
    for (size_t i = 0; i < act_sites; ++i)
      m.prelu_slopes_.push_back(RealTensor::constant({1}, 0.25));
  return m;
}

std::vector<ParamRef> Model::params() {
  std::vector<ParamRef> out;
  size_t site = 0;
  auto slope = [&](const std::string& name) {
    if (act_ == Act::PReLU) {
      out.push_back({name + ".act", &prelu_slopes_[site], false});
      ++site;
    }
  };
  if (arch_is_conv(cfg_.arch)) {
    if (arch_is_quaternion(cfg_.arch)) {
      qconv0_.register_params("conv0", out);
      slope("conv0");
      for (size_t i = 0; i < qconvs_.size(); ++i) {
        qconvs_[i].register_params("conv" + std::to_string(i + 1), out);
        slope("conv" + std::to_string(i + 1));
      }
      for (size_t i = 0; i < qdenses_.size(); ++i) {
        qdenses_[i].register_params("dense" + std::to_string(i), out);
        slope("dense" + std::to_string(i));
      }
    } else {
      rconv0_.register_params("conv0", out);
      slope("conv0");
      for (size_t i = 0; i < rconvs_.size(); ++i) {
        rconvs_[i].register_params("conv" + std::to_string(i + 1), out);
        slope("conv" + std::to_string(i + 1));
      }
      for (size_t i = 0; i < rdenses_.size(); ++i) {
        rdenses_[i].register_params("dense" + std::to_string(i), out);
        slope("dense" + std::to_string(i));
      }
    }
  } else {
    for (size_t l = 0; l < qcells_.size(); ++l) {
      qcells_[l].register_params("rnn" + std::to_string(l), out);
      slope("rnn" + std::to_string(l));
    }
    for (size_t l = 0; l < rcells_.size(); ++l) {
      rcells_[l].register_params("rnn" + std::to_string(l), out);
      slope("rnn" + std::to_string(l));
    }
  }
  head_.register_params("head", out);
  return out;
}

long long Model::param_count_actual() {
  long long total = 0;
  for (const ParamRef& p : params()) total += p.tensor->size();
  return total;
}

// ---------------------------------------------------------------------------
// forward

namespace {

// [B, C, F, T] -> [B*T, C*F] per-frame feature rows (row = b*T + t).
std::shared_ptr<std::vector<Index>> frame_rows_perm(Index B, Index C, Index F, Index T) {
  auto idx = std::make_shared<std::vector<Index>>(static_cast<size_t>(B * C * F * T));
  size_t n = 0;
  for (Index b = 0; b < B; ++b)
    for (Index t = 0; t < T; ++t)
      for (Index c = 0; c < C; ++c)
        for (Index f = 0; f < F; ++f) (*idx)[n++] = ((b * C + c) * F + f) * T + t;
  return idx;
}

}  // namespace

ModelLogits Model::forward(LeafRegistry& reg, const BatchInput& in, bool training,
                           Rng& dropout_rng) const {
  if (in.bands != cfg_.input_bands)
    throw DimensionMismatch("model expects " + std::to_string(cfg_.input_bands) +
                            " bands, data has " + std::to_string(in.bands));
  return arch_is_conv(cfg_.arch) ? forward_conv(reg, in, training, dropout_rng)
                                 : forward_recurrent(reg, in, training, dropout_rng);
}

ModelLogits Model::forward_conv(LeafRegistry& reg, const BatchInput& in, bool training,
                                Rng& rng) const {
  Tape& t = reg.tape_ref();
  const Index B = static_cast<Index>(in.utts.size());
  const Index T = in.max_frames, F = in.bands;
  const bool quat = arch_is_quaternion(cfg_.arch);

  std::vector<Var> slopes;
  for (const RealTensor& s : prelu_slopes_) slopes.push_back(reg.bind(s));
  size_t site = 0;
  auto next_slope = [&]() { return act_ == Act::PReLU ? slopes[site++] : Var{}; };

  // Input planes [B, maps, F, T]: one quaternion map, or its four real views.
  const Shape plane{B, 1, F, T};
  RealTensor blocks[4] = {RealTensor::zeros(plane), RealTensor::zeros(plane),
                          RealTensor::zeros(plane), RealTensor::zeros(plane)};
  for (Index b = 0; b < B; ++b) {
    const QuaternionTensor& u = *in.utts[static_cast<size_t>(b)];
    for (Index tt = 0; tt < in.lengths[static_cast<size_t>(b)]; ++tt)
      for (Index f = 0; f < F; ++f) {
        const Index dst = (b * F + f) * T + tt;
        const Index src = tt * F + f;
        blocks[0].data[dst] = u.r.data[src];
        blocks[1].data[dst] = u.x.data[src];
        blocks[2].data[dst] = u.y.data[src];
        blocks[3].data[dst] = u.z.data[src];
      }
  }

  Var logits;
  if (quat) {
    QVar x{t.leaf(std::move(blocks[0])), t.leaf(std::move(blocks[1])),
           t.leaf(std::move(blocks[2])), t.leaf(std::move(blocks[3]))};
    x = split_activation(t, qconv0_.forward(reg, x), act_, next_slope());
    x = maxpool_freq(t, x, cfg_.conv.pool);
    for (const QConv2d& conv : qconvs_) {
      x = split_activation(t, conv.forward(reg, x), act_, next_slope());
      x = quaternion_dropout(t, x, cfg_.dropout, training, rng);
    }
    const Shape s = t.shape(x.r);  // [B, maps, F', T]; copied: gathers below grow the tape
    auto perm = frame_rows_perm(s[0], s[1], s[2], s[3]);
    const Shape rows{B * T, s[1] * s[2]};
    x = {t.gather(x.r, perm, rows), t.gather(x.x, perm, rows), t.gather(x.y, perm, rows),
         t.gather(x.z, perm, rows)};
    for (const QDense& dense : qdenses_) {
      x = split_activation(t, dense.forward(reg, x), act_, next_slope());
      x = quaternion_dropout(t, x, cfg_.dropout, training, rng);
    }
    logits = head_.logits(reg, qconcat_real(t, x));
  } else {
    // Real baseline: the four component planes become four input channels.
    RealTensor stacked = RealTensor::zeros({B, 4, F, T});
    const Index plane_size = F * T;
    for (Index b = 0; b < B; ++b)
      for (int c = 0; c < 4; ++c)
        stacked.data.segment((b * 4 + c) * plane_size, plane_size) =
            blocks[c].data.segment(b * plane_size, plane_size);
    Var x = t.leaf(std::move(stacked));
    x = real_activation(t, rconv0_.forward(reg, x), act_, next_slope());
    x = real_maxpool_freq(t, x, cfg_.conv.pool);
    for (const RealConv2d& conv : rconvs_) {
      x = real_activation(t, conv.forward(reg, x), act_, next_slope());
      x = real_dropout(t, x, cfg_.dropout, training, rng);
    }
    const Shape s = t.shape(x);
    auto perm = frame_rows_perm(s[0], s[1], s[2], s[3]);
    x = t.gather(x, perm, {B * T, s[1] * s[2]});
    for (const RealDense& dense : rdenses_) {
      x = real_activation(t, dense.forward(reg, x), act_, next_slope());
      x = real_dropout(t, x, cfg_.dropout, training, rng);
    }
    logits = head_.logits(reg, x);
  }

  ModelLogits out;
  out.logits = logits;
  out.batch = B;
  out.frames = T;
  out.step_major = false;
  return out;
}

ModelLogits Model::forward_recurrent(LeafRegistry& reg, const BatchInput& in, bool training,
                                     Rng& rng) const {
  Tape& t = reg.tape_ref();
  const Index B = static_cast<Index>(in.utts.size());
  const Index T = in.max_frames, F = in.bands;
  const bool quat = arch_is_quaternion(cfg_.arch);

  std::vector<Var> slopes;
  for (const RealTensor& s : prelu_slopes_) slopes.push_back(reg.bind(s));

  std::vector<Var> step_logits;
  step_logits.reserve(static_cast<size_t>(T));

  if (quat) {
    std::vector<QRNNCell::Bound> bounds;
    bounds.reserve(qcells_.size());
    for (size_t l = 0; l < qcells_.size(); ++l) {
      bounds.push_back(qcells_[l].bind(reg));
      if (act_ == Act::PReLU) bounds.back().slope = slopes[l];
    }

    std::vector<QVar> h;
    for (const QRNNCell& cell : qcells_) {
      QuaternionTensor h0 = QuaternionTensor::zeros({B, cell.hidden_q});
      h.push_back(qleaf(t, h0));
    }
    for (Index tt = 0; tt < T; ++tt) {
      RealTensor step[4] = {RealTensor::zeros({B, F}), RealTensor::zeros({B, F}),
                            RealTensor::zeros({B, F}), RealTensor::zeros({B, F})};
      for (Index b = 0; b < B; ++b) {
        if (tt >= in.lengths[static_cast<size_t>(b)]) continue;
        const QuaternionTensor& u = *in.utts[static_cast<size_t>(b)];
        for (int c = 0; c < 4; ++c)
          step[c].data.segment(b * F, F) = u.block(c).data.segment(tt * F, F);
      }
      QVar x{t.leaf(std::move(step[0])), t.leaf(std::move(step[1])), t.leaf(std::move(step[2])),
             t.leaf(std::move(step[3]))};
      for (size_t l = 0; l < qcells_.size(); ++l) {
        // Dropout lives on the upward connections only; the recurrent state
        // h[l] carries forward untouched.
        h[l] = qcells_[l].step(t, bounds[l], h[l], x);
        x = quaternion_dropout(t, h[l], cfg_.dropout, training, rng);
      }
      step_logits.push_back(head_.logits(reg, qconcat_real(t, x)));
    }
  } else {
    std::vector<RealRNNCell::Bound> bounds;
    bounds.reserve(rcells_.size());
    for (size_t l = 0; l < rcells_.size(); ++l) {
      bounds.push_back(rcells_[l].bind(reg));
      if (act_ == Act::PReLU) bounds.back().slope = slopes[l];
    }

    std::vector<Var> h;
    for (const RealRNNCell& cell : rcells_) h.push_back(t.leaf(RealTensor::zeros({B, cell.hidden})));
    for (Index tt = 0; tt < T; ++tt) {
      RealTensor step = RealTensor::zeros({B, 4 * F});
      for (Index b = 0; b < B; ++b) {
        if (tt >= in.lengths[static_cast<size_t>(b)]) continue;
        const QuaternionTensor& u = *in.utts[static_cast<size_t>(b)];
        for (int c = 0; c < 4; ++c)
          step.data.segment(b * 4 * F + c * F, F) = u.block(c).data.segment(tt * F, F);
      }
      Var x = t.leaf(std::move(step));
      for (size_t l = 0; l < rcells_.size(); ++l) {
        h[l] = rcells_[l].step(t, bounds[l], h[l], x);
        x = real_dropout(t, h[l], cfg_.dropout, training, rng);
      }
      step_logits.push_back(head_.logits(reg, x));
    }
  }

  ModelLogits out;
  out.logits = t.concat_rows(step_logits);
  out.batch = B;
  out.frames = T;
  out.step_major = true;
  return out;
}

}  // namespace quasar
