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

#include "quasar/layers.hpp"

#include <cmath>

namespace quasar {

Act act_from_string(const std::string& name) {
  if (name == "identity") return Act::Identity;
  if (name == "tanh") return Act::Tanh;
  if (name == "sigmoid") return Act::Sigmoid;
  if (name == "relu") return Act::ReLU;
  if (name == "prelu") return Act::PReLU;
  throw InvalidConfig("unknown activation '" + name + "'");
}

std::string act_to_string(Act a) {
  switch (a) {
    case Act::Identity: return "identity";
    case Act::Tanh: return "tanh";
    case Act::Sigmoid: return "sigmoid";
    case Act::ReLU: return "relu";
    case Act::PReLU: return "prelu";
  }
  return "identity";
}

Var real_activation(Tape& t, Var v, Act act, Var prelu_slope) {
  switch (act) {
    case Act::Identity: return v;
    case Act::Tanh: return t.tanh_act(v);
    case Act::Sigmoid: return t.sigmoid_act(v);
    case Act::ReLU: return t.relu_act(v);
    case Act::PReLU: return t.prelu_act(v, prelu_slope);
  }
  return v;
}

QVar split_activation(Tape& t, const QVar& q, Act act, Var prelu_slope) {
  return {real_activation(t, q.r, act, prelu_slope), real_activation(t, q.x, act, prelu_slope),
          real_activation(t, q.y, act, prelu_slope), real_activation(t, q.z, act, prelu_slope)};
}

namespace {

// Combines the 16 block-wise products of a Hamilton contraction, with the
// weight as the left operand. mm(i, j) is the bilinear product of weight
// block i against input block j (blocks ordered r, x, y, z).
QVar hamilton_combine(Tape& t, const std::function<Var(int, int)>& mm) {
  QVar out;
  out.r = t.sub(t.sub(t.sub(mm(0, 0), mm(1, 1)), mm(2, 2)), mm(3, 3));
  out.x = t.sub(t.add(t.add(mm(0, 1), mm(1, 0)), mm(2, 3)), mm(3, 2));
  out.y = t.add(t.add(t.sub(mm(0, 2), mm(1, 3)), mm(2, 0)), mm(3, 1));
  out.z = t.add(t.sub(t.add(mm(0, 3), mm(1, 2)), mm(2, 1)), mm(3, 0));
  return out;
}

Var block(const QVar& q, int i) {
  switch (i) {
    case 0: return q.r;
    case 1: return q.x;
    case 2: return q.y;
    default: return q.z;
  }
}

QVar add_bias_rows(Tape& t, const QVar& q, const QVar& bias) {
  return {t.add_rowvec(q.r, bias.r), t.add_rowvec(q.x, bias.x), t.add_rowvec(q.y, bias.y),
          t.add_rowvec(q.z, bias.z)};
}

}  // namespace

QVar qlinear(Tape& t, const QVar& rows, const QVar& weight) {
  return hamilton_combine(
      t, [&](int i, int j) { return t.matmul_nt(block(rows, j), block(weight, i)); });
}

// ---------------------------------------------------------------------------
// dense

void QDense::init(Rng& rng) {
  InitSpec spec{in_q, out_q, 0};
  w = quaternion_init(spec, {out_q, in_q}, rng);
  b = QuaternionTensor::zeros({out_q});
}

QVar QDense::forward_with(Tape& t, const Bound& bound, const QVar& in) const {
  const RealTensor& iv = t.val(in.r);
  if (iv.rank() != 2 || iv.dim(1) != in_q)
    throw ShapeMismatch("qdense: expected [batch, " + std::to_string(in_q) + "], got " +
                        shape_str(iv.shape));
  return add_bias_rows(t, qlinear(t, in, bound.w), bound.b);
}

void QDense::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w.r", &w.r, true});
  out.push_back({prefix + ".w.x", &w.x, true});
  out.push_back({prefix + ".w.y", &w.y, true});
  out.push_back({prefix + ".w.z", &w.z, true});
  out.push_back({prefix + ".b.r", &b.r, false});
  out.push_back({prefix + ".b.x", &b.x, false});
  out.push_back({prefix + ".b.y", &b.y, false});
  out.push_back({prefix + ".b.z", &b.z, false});
}

void RealDense::init(Rng& rng) {
  w = glorot_init(in, out, {out, in}, rng);
  b = RealTensor::zeros({out});
}

Var RealDense::forward_with(Tape& t, const Bound& bound, Var in) const {
  const RealTensor& iv = t.val(in);
  if (iv.rank() != 2 || iv.dim(1) != this->in)
    throw ShapeMismatch("dense: expected [batch, " + std::to_string(this->in) + "], got " +
                        shape_str(iv.shape));
  return t.add_rowvec(t.matmul_nt(in, bound.w), bound.b);
}

void RealDense::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, true});
  out.push_back({prefix + ".b", &b, false});
}

QuaternionTensor qdense_eval(const QDense& layer, const QuaternionTensor& in) {
  Tape t;
  LeafRegistry reg(t);
  QVar out = layer.forward(reg, qleaf(t, in));
  return qval(t, out);
}

// ---------------------------------------------------------------------------
// convolution

ConvPlan make_conv_plan(const Shape& input, const Shape& kernel, Index ph, Index pw) {
  if (input.size() != 4) throw ShapeMismatch("conv2d input must be [B,C,H,W]");
  if (kernel.size() != 4) throw ShapeMismatch("conv2d kernel must be [Cout,Cin,Kh,Kw]");
  ConvPlan p;
  p.B = input[0];
  p.Cin = input[1];
  p.H = input[2];
  p.W = input[3];
  p.Cout = kernel[0];
  p.Kh = kernel[2];
  p.Kw = kernel[3];
  p.ph = ph;
  p.pw = pw;
  if (kernel[1] != p.Cin) throw ShapeMismatch("conv2d: input map count mismatch");
  if (p.H + 2 * ph < p.Kh || p.W + 2 * pw < p.Kw)
    throw KernelLargerThanInput("conv2d: padded input smaller than kernel");
  p.Ho = p.H + 2 * ph - p.Kh + 1;
  p.Wo = p.W + 2 * pw - p.Kw + 1;

  auto idx = std::make_shared<std::vector<Index>>();
  idx->resize(static_cast<size_t>(p.B * p.Ho * p.Wo * p.Cin * p.Kh * p.Kw));
  size_t n = 0;
  for (Index b = 0; b < p.B; ++b)
    for (Index i = 0; i < p.Ho; ++i)
      for (Index j = 0; j < p.Wo; ++j)
        for (Index c = 0; c < p.Cin; ++c)
          for (Index u = 0; u < p.Kh; ++u)
            for (Index v = 0; v < p.Kw; ++v) {
              const Index src_i = i + u - ph;
              const Index src_j = j + v - pw;
              (*idx)[n++] =
                  (src_i < 0 || src_i >= p.H || src_j < 0 || src_j >= p.W)
                      ? -1
                      : ((b * p.Cin + c) * p.H + src_i) * p.W + src_j;
            }
  p.im2col = std::move(idx);

  auto perm = std::make_shared<std::vector<Index>>();
  perm->resize(static_cast<size_t>(p.B * p.Cout * p.Ho * p.Wo));
  n = 0;
  for (Index b = 0; b < p.B; ++b)
    for (Index c = 0; c < p.Cout; ++c)
      for (Index i = 0; i < p.Ho; ++i)
        for (Index j = 0; j < p.Wo; ++j)
          (*perm)[n++] = ((b * p.Ho + i) * p.Wo + j) * p.Cout + c;
  p.to_nchw = std::move(perm);
  return p;
}

namespace {

Var conv_cols(Tape& t, Var in_block, const ConvPlan& p) {
  return t.gather(in_block, p.im2col, {p.B * p.Ho * p.Wo, p.Cin * p.Kh * p.Kw});
}

Var conv_to_nchw(Tape& t, Var nc, const ConvPlan& p) {
  return t.gather(nc, p.to_nchw, {p.B, p.Cout, p.Ho, p.Wo});
}

}  // namespace

void QConv2d::init(Rng& rng) {
  InitSpec spec{in_maps_q * kh * kw, out_maps_q * kh * kw, 0};
  w = quaternion_init(spec, {out_maps_q, in_maps_q, kh, kw}, rng);
  b = QuaternionTensor::zeros({out_maps_q});
}

QVar QConv2d::forward_with(Tape& t, const Bound& bound, const QVar& in) const {
  ConvPlan plan = make_conv_plan(t.shape(in.r), {out_maps_q, in_maps_q, kh, kw}, pad_h, pad_w);

  const Shape k2d{out_maps_q, in_maps_q * kh * kw};
  Var cols[4] = {conv_cols(t, in.r, plan), conv_cols(t, in.x, plan), conv_cols(t, in.y, plan),
                 conv_cols(t, in.z, plan)};
  Var kernels[4] = {t.reshape(bound.w.r, k2d), t.reshape(bound.w.x, k2d),
                    t.reshape(bound.w.y, k2d), t.reshape(bound.w.z, k2d)};
  QVar nc = hamilton_combine(t, [&](int i, int j) { return t.matmul_nt(cols[j], kernels[i]); });

  QVar out{conv_to_nchw(t, nc.r, plan), conv_to_nchw(t, nc.x, plan), conv_to_nchw(t, nc.y, plan),
           conv_to_nchw(t, nc.z, plan)};
  return {t.add_channel_bias(out.r, bound.b.r), t.add_channel_bias(out.x, bound.b.x),
          t.add_channel_bias(out.y, bound.b.y), t.add_channel_bias(out.z, bound.b.z)};
}

void QConv2d::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w.r", &w.r, true});
  out.push_back({prefix + ".w.x", &w.x, true});
  out.push_back({prefix + ".w.y", &w.y, true});
  out.push_back({prefix + ".w.z", &w.z, true});
  out.push_back({prefix + ".b.r", &b.r, false});
  out.push_back({prefix + ".b.x", &b.x, false});
  out.push_back({prefix + ".b.y", &b.y, false});
  out.push_back({prefix + ".b.z", &b.z, false});
}

void RealConv2d::init(Rng& rng) {
  w = glorot_init(in_maps * kh * kw, out_maps * kh * kw, {out_maps, in_maps, kh, kw}, rng);
  b = RealTensor::zeros({out_maps});
}

Var RealConv2d::forward_with(Tape& t, const Bound& bound, Var in) const {
  ConvPlan plan = make_conv_plan(t.shape(in), {out_maps, in_maps, kh, kw}, pad_h, pad_w);
  Var cols = conv_cols(t, in, plan);
  Var k2d = t.reshape(bound.w, {out_maps, in_maps * kh * kw});
  Var out = conv_to_nchw(t, t.matmul_nt(cols, k2d), plan);
  return t.add_channel_bias(out, bound.b);
}

void RealConv2d::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, true});
  out.push_back({prefix + ".b", &b, false});
}

QuaternionTensor qconv2d_eval(const QConv2d& layer, const QuaternionTensor& in) {
  Tape t;
  LeafRegistry reg(t);
  QVar out = layer.forward(reg, qleaf(t, in));
  return qval(t, out);
}

// ---------------------------------------------------------------------------
// recurrence

void QRNNCell::init(Rng& rng) {
  w_hh = quaternion_init({hidden_q, hidden_q, 0}, {hidden_q, hidden_q}, rng);
  w_hx = quaternion_init({in_q, hidden_q, 0}, {hidden_q, in_q}, rng);
  b_h = QuaternionTensor::zeros({hidden_q});
  if (out_q > 0) {
    w_out = quaternion_init({hidden_q, out_q, 0}, {out_q, hidden_q}, rng);
    b_out = QuaternionTensor::zeros({out_q});
  }
}

QRNNCell::Bound QRNNCell::bind(LeafRegistry& reg) const {
  Bound b;
  b.w_hh = reg.bind(w_hh);
  b.w_hx = reg.bind(w_hx);
  b.b_h = reg.bind(b_h);
  if (out_q > 0) {
    b.w_out = reg.bind(w_out);
    b.b_out = reg.bind(b_out);
  }
  return b;
}

QVar QRNNCell::step(Tape& t, const Bound& bound, const QVar& h_prev, const QVar& x_t) const {
  const RealTensor& hv = t.val(h_prev.r);
  const RealTensor& xv = t.val(x_t.r);
  if (hv.rank() != 2 || hv.dim(1) != hidden_q || xv.rank() != 2 || xv.dim(1) != in_q)
    throw ShapeMismatch("qrnn step: hidden " + shape_str(hv.shape) + ", input " +
                        shape_str(xv.shape));
  QVar pre = qadd(t, qlinear(t, h_prev, bound.w_hh), qlinear(t, x_t, bound.w_hx));
  pre = add_bias_rows(t, pre, bound.b_h);
  return split_activation(t, pre, act, bound.slope);
}

QVar QRNNCell::output(Tape& t, const Bound& bound, const QVar& h_t, Act beta) const {
  QVar pre = add_bias_rows(t, qlinear(t, h_t, bound.w_out), bound.b_out);
  return split_activation(t, pre, beta);
}

void QRNNCell::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  auto quat = [&](const std::string& name, QuaternionTensor& q, bool decay) {
    out.push_back({prefix + "." + name + ".r", &q.r, decay});
    out.push_back({prefix + "." + name + ".x", &q.x, decay});
    out.push_back({prefix + "." + name + ".y", &q.y, decay});
    out.push_back({prefix + "." + name + ".z", &q.z, decay});
  };
  quat("w_hh", w_hh, true);
  quat("w_hx", w_hx, true);
  quat("b_h", b_h, false);
  if (out_q > 0) {
    quat("w_out", w_out, true);
    quat("b_out", b_out, false);
  }
}

void RealRNNCell::init(Rng& rng) {
  w_hh = glorot_init(hidden, hidden, {hidden, hidden}, rng);
  w_hx = glorot_init(in, hidden, {hidden, in}, rng);
  b_h = RealTensor::zeros({hidden});
}

RealRNNCell::Bound RealRNNCell::bind(LeafRegistry& reg) const {
  return {reg.bind(w_hh), reg.bind(w_hx), reg.bind(b_h)};
}

Var RealRNNCell::step(Tape& t, const Bound& bound, Var h_prev, Var x_t) const {
  Var pre = t.add(t.matmul_nt(h_prev, bound.w_hh), t.matmul_nt(x_t, bound.w_hx));
  pre = t.add_rowvec(pre, bound.b_h);
  return real_activation(t, pre, act, bound.slope);
}

void RealRNNCell::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w_hh", &w_hh, true});
  out.push_back({prefix + ".w_hx", &w_hx, true});
  out.push_back({prefix + ".b_h", &b_h, false});
}

QuaternionTensor qrnn_step_eval(const QRNNCell& cell, const QuaternionTensor& h_prev,
                                const QuaternionTensor& x_t) {
  Tape t;
  LeafRegistry reg(t);
  auto bound = cell.bind(reg);
  QVar h = cell.step(t, bound, qleaf(t, reshaped(h_prev, {1, h_prev.units()})),
                     qleaf(t, reshaped(x_t, {1, x_t.units()})));
  return reshaped(qval(t, h), {cell.hidden_q});
}

QuaternionTensor qrnn_output_eval(const QRNNCell& cell, const QuaternionTensor& h_t, Act beta) {
  Tape t;
  LeafRegistry reg(t);
  auto bound = cell.bind(reg);
  QVar out = cell.output(t, bound, qleaf(t, reshaped(h_t, {1, h_t.units()})), beta);
  return reshaped(qval(t, out), {cell.out_q});
}

// ---------------------------------------------------------------------------
// pooling

namespace {

std::shared_ptr<std::vector<Index>> pool_freq_indices(const Tape& t, const QVar& in, Index window,
                                                      Shape& out_shape) {
  const RealTensor& r = t.val(in.r);
  if (r.rank() != 4) throw ShapeMismatch("maxpool_freq expects [B,C,F,T]");
  const Index B = r.dim(0), C = r.dim(1), F = r.dim(2), T = r.dim(3);
  if (window < 1) throw ShapeMismatch("maxpool_freq: window must be >= 1");
  const Index Fo = (F + window - 1) / window;
  out_shape = {B, C, Fo, T};

  const Eigen::ArrayXd* blocks[4] = {&t.val(in.r).data, &t.val(in.x).data, &t.val(in.y).data,
                                     &t.val(in.z).data};
  auto idx = std::make_shared<std::vector<Index>>(static_cast<size_t>(B * C * Fo * T));
  size_t n = 0;
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c)
      for (Index fo = 0; fo < Fo; ++fo)
        for (Index tt = 0; tt < T; ++tt) {
          const Index f_end = std::min(F, (fo + 1) * window);
          Index best = -1;
          double best_norm = -1.0;
          for (Index f = fo * window; f < f_end; ++f) {
            const Index at = ((b * C + c) * F + f) * T + tt;
            double norm2 = 0.0;
            for (const auto* blk : blocks) {
              const double v = (*blk)[at];
              norm2 += v * v;
            }
            if (norm2 > best_norm) {
              best_norm = norm2;
              best = at;
            }
          }
          (*idx)[n++] = best;
        }
  return idx;
}

}  // namespace

QVar maxpool_freq(Tape& t, const QVar& in, Index window) {
  if (window == 1) return in;
  Shape out_shape;
  auto idx = pool_freq_indices(t, in, window, out_shape);
  return {t.gather(in.r, idx, out_shape), t.gather(in.x, idx, out_shape),
          t.gather(in.y, idx, out_shape), t.gather(in.z, idx, out_shape)};
}

Var real_maxpool_freq(Tape& t, Var in, Index window) {
  if (window == 1) return in;
  const RealTensor& v = t.val(in);
  if (v.rank() != 4) throw ShapeMismatch("maxpool_freq expects [B,C,F,T]");
  const Index B = v.dim(0), C = v.dim(1), F = v.dim(2), T = v.dim(3);
  const Index Fo = (F + window - 1) / window;
  auto idx = std::make_shared<std::vector<Index>>(static_cast<size_t>(B * C * Fo * T));
  size_t n = 0;
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c)
      for (Index fo = 0; fo < Fo; ++fo)
        for (Index tt = 0; tt < T; ++tt) {
          const Index f_end = std::min(F, (fo + 1) * window);
          Index best = ((b * C + c) * F + fo * window) * T + tt;
          for (Index f = fo * window + 1; f < f_end; ++f) {
            const Index at = ((b * C + c) * F + f) * T + tt;
            if (v.data[at] > v.data[best]) best = at;
          }
          (*idx)[n++] = best;
        }
  return t.gather(in, idx, {B, C, Fo, T});
}

// ---------------------------------------------------------------------------
// dropout

QVar quaternion_dropout(Tape& t, const QVar& in, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw InvalidRate();
  if (!training || rate == 0.0) return in;
  const Index n = t.val(in.r).size();
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::ArrayXd mask(n);
  for (Index i = 0; i < n; ++i) mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return {t.cmul(in.r, mask), t.cmul(in.x, mask), t.cmul(in.y, mask), t.cmul(in.z, mask)};
}

Var real_dropout(Tape& t, Var in, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw InvalidRate();
  if (!training || rate == 0.0) return in;
  const Index n = t.val(in).size();
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::ArrayXd mask(n);
  for (Index i = 0; i < n; ++i) mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return t.cmul(in, std::move(mask));
}

// ---------------------------------------------------------------------------
// softmax head

void SoftmaxHead::init(Rng& rng) {
  w = glorot_init(in_dim, classes, {classes, in_dim}, rng);
  b = RealTensor::zeros({classes});
}

Var SoftmaxHead::logits_with(Tape& t, const Bound& bound, Var real_in) const {
  const RealTensor& iv = t.val(real_in);
  if (iv.rank() != 2 || iv.dim(1) != in_dim)
    throw ShapeMismatch("softmax head: expected [rows, " + std::to_string(in_dim) + "], got " +
                        shape_str(iv.shape));
  return t.add_rowvec(t.matmul_nt(real_in, bound.w), bound.b);
}

void SoftmaxHead::register_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w", &w, true});
  out.push_back({prefix + ".b", &b, false});
}

Eigen::MatrixXd softmax_rows(const RealTensor& logits) {
  if (logits.rank() != 2) throw ShapeMismatch("softmax_rows expects [rows, classes]");
  const Index rows = logits.dim(0), cols = logits.dim(1);
  Eigen::MatrixXd out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    auto row = logits.data.segment(i * cols, cols);
    Eigen::ArrayXd p = (row - row.maxCoeff()).exp();
    out.row(i) = (p / p.sum()).matrix().transpose();
  }
  return out;
}

Eigen::MatrixXd real_softmax_head_eval(const SoftmaxHead& head, const QuaternionTensor& in) {
  Tape t;
  LeafRegistry reg(t);
  QVar q = qleaf(t, in);
  Var logits = head.logits(reg, qconcat_real(t, q));
  return softmax_rows(t.val(logits));
}

}  // namespace quasar
