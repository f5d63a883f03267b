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

#include <functional>
#include <string>
#include <vector>

#include "quasar/init.hpp"
#include "quasar/rng.hpp"
#include "quasar/tape.hpp"

namespace quasar {

enum class Act { Identity, Tanh, Sigmoid, ReLU, PReLU };

Act act_from_string(const std::string& name);
std::string act_to_string(Act a);

// A trainable tensor; quaternion parameters contribute one entry per
// component block. `decay` marks weight matrices subject to L2.
struct ParamRef {
  std::string name;
  RealTensor* tensor = nullptr;
  bool decay = true;
};

// Binds parameter storage to tape leaves for one forward pass and remembers
// the pairing so the trainer can route gradients back to storage.
struct LeafRegistry {
  explicit LeafRegistry(Tape& t) : tape(&t) {}
  Tape& tape_ref() { return *tape; }

  Var bind(const RealTensor& t) {
    Var v = tape->leaf(t);
    bound.emplace_back(&t, v);
    return v;
  }
  QVar bind(const QuaternionTensor& q) {
    return {bind(q.r), bind(q.x), bind(q.y), bind(q.z)};
  }

  Tape* tape;
  std::vector<std::pair<const RealTensor*, Var>> bound;
};

// Componentwise scalar activation on all four blocks (the split scheme).
// PReLU shares one slope scalar across every component.
QVar split_activation(Tape& t, const QVar& q, Act act, Var prelu_slope = {});
Var real_activation(Tape& t, Var v, Act act, Var prelu_slope = {});

// Contraction of a quaternion weight matrix [N, M] against quaternion rows
// [B, M] through the Hamilton product (weight on the left), expressed as the
// 16 block-wise real products.
QVar qlinear(Tape& t, const QVar& rows, const QVar& weight);

// ---------------------------------------------------------------------------
// dense layers

struct QDense {
  Index in_q = 0, out_q = 0;
  QuaternionTensor w;  // [out_q, in_q]
  QuaternionTensor b;  // [out_q]

  struct Bound {
    QVar w, b;
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const { return {reg.bind(w), reg.bind(b)}; }
  QVar forward_with(Tape& t, const Bound& bound, const QVar& in) const;
  QVar forward(LeafRegistry& reg, const QVar& in) const {  // [B, in_q] -> [B, out_q]
    return forward_with(reg.tape_ref(), bind(reg), in);
  }
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

struct RealDense {
  Index in = 0, out = 0;
  RealTensor w;  // [out, in]
  RealTensor b;  // [out]

  struct Bound {
    Var w, b;
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const { return {reg.bind(w), reg.bind(b)}; }
  Var forward_with(Tape& t, const Bound& bound, Var in) const;
  Var forward(LeafRegistry& reg, Var in) const {
    return forward_with(reg.tape_ref(), bind(reg), in);
  }
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

QuaternionTensor qdense_eval(const QDense& layer, const QuaternionTensor& in);

// ---------------------------------------------------------------------------
// 2-D convolution (cross-correlation) over [batch, maps, freq, time]

struct ConvPlan {
  Index B, Cin, H, W, Kh, Kw, ph, pw, Ho, Wo, Cout;
  std::shared_ptr<const std::vector<Index>> im2col;       // [B*Ho*Wo, Cin*Kh*Kw]
  std::shared_ptr<const std::vector<Index>> to_nchw;      // [B*Ho*Wo, Cout] -> [B,Cout,Ho,Wo]
};

ConvPlan make_conv_plan(const Shape& input, const Shape& kernel, Index ph, Index pw);

struct QConv2d {
  Index in_maps_q = 0, out_maps_q = 0;
  Index kh = 0, kw = 0;
  Index pad_h = 0, pad_w = 0;  // "same" for odd kernels when pad = (K-1)/2
  QuaternionTensor w;          // [out_maps_q, in_maps_q, Kh, Kw]
  QuaternionTensor b;          // [out_maps_q]

  struct Bound {
    QVar w, b;
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const { return {reg.bind(w), reg.bind(b)}; }
  QVar forward_with(Tape& t, const Bound& bound, const QVar& in) const;
  QVar forward(LeafRegistry& reg, const QVar& in) const {  // [B,Cin,H,W] -> [B,Cout,H',W']
    return forward_with(reg.tape_ref(), bind(reg), in);
  }
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

struct RealConv2d {
  Index in_maps = 0, out_maps = 0;
  Index kh = 0, kw = 0;
  Index pad_h = 0, pad_w = 0;
  RealTensor w;  // [out_maps, in_maps, Kh, Kw]
  RealTensor b;  // [out_maps]

  struct Bound {
    Var w, b;
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const { return {reg.bind(w), reg.bind(b)}; }
  Var forward_with(Tape& t, const Bound& bound, Var in) const;
  Var forward(LeafRegistry& reg, Var in) const {
    return forward_with(reg.tape_ref(), bind(reg), in);
  }
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

QuaternionTensor qconv2d_eval(const QConv2d& layer, const QuaternionTensor& in);

// ---------------------------------------------------------------------------
// vanilla recurrence

struct QRNNCell {
  Index in_q = 0, hidden_q = 0;
  Index out_q = 0;         // 0 disables the quaternion output projection
  QuaternionTensor w_hh;   // [H, H]
  QuaternionTensor w_hx;   // [H, in_q]
  QuaternionTensor b_h;    // [H]
  QuaternionTensor w_out;  // [out_q, H]
  QuaternionTensor b_out;  // [out_q]
  Act act = Act::Tanh;

  struct Bound {
    QVar w_hh, w_hx, b_h, w_out, b_out;
    Var slope;  // only consulted for PReLU
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const;
  // h_t = act(w_hh (x) h_prev + w_hx (x) x_t + b_h)
  QVar step(Tape& t, const Bound& bound, const QVar& h_prev, const QVar& x_t) const;
  // out = beta(w_out (x) h_t + b_out)
  QVar output(Tape& t, const Bound& bound, const QVar& h_t, Act beta = Act::Identity) const;
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

struct RealRNNCell {
  Index in = 0, hidden = 0;
  RealTensor w_hh;  // [H, H]
  RealTensor w_hx;  // [H, in]
  RealTensor b_h;   // [H]
  Act act = Act::Tanh;

  struct Bound {
    Var w_hh, w_hx, b_h;
    Var slope;  // only consulted for PReLU
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const;
  Var step(Tape& t, const Bound& bound, Var h_prev, Var x_t) const;
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

QuaternionTensor qrnn_step_eval(const QRNNCell& cell, const QuaternionTensor& h_prev,
                                const QuaternionTensor& x_t);
QuaternionTensor qrnn_output_eval(const QRNNCell& cell, const QuaternionTensor& h_t,
                                  Act beta = Act::Identity);

// ---------------------------------------------------------------------------
// pooling / dropout / softmax head

// Entity-preserving max pooling along the frequency axis of [B,C,F,T]:
// within each window the quaternion of largest norm is kept whole (first
// index wins ties). A trailing partial window is pooled as-is.
QVar maxpool_freq(Tape& t, const QVar& in, Index window);
Var real_maxpool_freq(Tape& t, Var in, Index window);

// Drops whole quaternions (all four components together) with the given
// probability and rescales survivors by 1/(1-rate); identity when not
// training. Throws InvalidRate outside [0, 1).
QVar quaternion_dropout(Tape& t, const QVar& in, double rate, bool training, Rng& rng);
Var real_dropout(Tape& t, Var in, double rate, bool training, Rng& rng);

struct SoftmaxHead {
  Index in_dim = 0;   // real units
  Index classes = 0;  // output columns (including blank for CTC)
  RealTensor w;       // [classes, in_dim]
  RealTensor b;       // [classes]

  struct Bound {
    Var w, b;
  };

  void init(Rng& rng);
  Bound bind(LeafRegistry& reg) const { return {reg.bind(w), reg.bind(b)}; }
  Var logits_with(Tape& t, const Bound& bound, Var real_in) const;
  Var logits(LeafRegistry& reg, Var real_in) const {  // [rows, classes]
    return logits_with(reg.tape_ref(), bind(reg), real_in);
  }
  void register_params(const std::string& prefix, std::vector<ParamRef>& out);
};

// Row-wise softmax of a [rows, classes] logit matrix.
Eigen::MatrixXd softmax_rows(const RealTensor& logits);

// Flattens quaternion rows to their real view, applies the head's dense
// layer and a row-wise softmax; each output row sums to one.
Eigen::MatrixXd real_softmax_head_eval(const SoftmaxHead& head, const QuaternionTensor& in);

}  // namespace quasar
