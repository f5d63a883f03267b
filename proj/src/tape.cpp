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

#include "quasar/tape.hpp"

#include <cmath>
#include <utility>

#include "quasar/ctc.hpp"

namespace quasar {

namespace {

using Eigen::ArrayXd;
using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

CMapRM as_matrix(const RealTensor& t, Index rows, Index cols) {
  return CMapRM(t.data.data(), rows, cols);
}

ArrayXd rows_to_flat(const Eigen::MatrixXd& m) {
  ArrayXd out(m.size());
  for (Index i = 0; i < m.rows(); ++i)
    out.segment(i * m.cols(), m.cols()) = m.row(i).transpose().array();
  return out;
}

// Lazily materialized accumulator: slots start empty and are zeroed on first
// touch so fan-out sums contributions instead of overwriting them.
void accum(std::vector<RealTensor>& grads, int id, const RealTensor& like,
           const ArrayXd& contribution) {
  RealTensor& g = grads[static_cast<size_t>(id)];
  if (g.data.size() == 0) {
    g.shape = like.shape;
    g.data = ArrayXd::Zero(like.size());
  }
  g.data += contribution;
}

void require_rank2(const RealTensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeMismatch(std::string(op) + " expects a rank-2 tensor");
}

}  // namespace

const RealTensor& Gradients::operator[](int var_id) const {
  RealTensor& g = g_[static_cast<size_t>(var_id)];
  if (g.data.size() == 0) {
    const RealTensor& v = tape_->node(var_id).value;
    g.shape = v.shape;
    g.data = Eigen::ArrayXd::Zero(v.size());
  }
  return g;
}

bool Gradients::reached(int var_id) const {
  return g_[static_cast<size_t>(var_id)].data.size() != 0;
}

Var Tape::push(const char* op, std::vector<int> parents, RealTensor value, BackwardFn back) {
  nodes_.push_back(Node{op, std::move(parents), std::move(value), std::move(back)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(RealTensor v) { return push("leaf", {}, std::move(v), nullptr); }

const RealTensor& Tape::val(Var v) const { return node(v.id).value; }

Var Tape::binary_ew(const char* op, Var a, Var b,
                    const std::function<ArrayXd(const ArrayXd&, const ArrayXd&)>& f,
                    const BackwardFn& back) {
  const RealTensor& av = val(a);
  const RealTensor& bv = val(b);
  if (!same_shape(av.shape, bv.shape))
    throw ShapeMismatch(std::string(op) + ": shapes " + shape_str(av.shape) + " vs " +
                        shape_str(bv.shape));
  return push(op, {a.id, b.id}, RealTensor(av.shape, f(av.data, bv.data)), back);
}

Var Tape::add(Var a, Var b) {
  return binary_ew(
      "add", a, b, [](const ArrayXd& u, const ArrayXd& v) { return ArrayXd(u + v); },
      [pa = a.id, pb = b.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
        accum(gs, pa, t.node(pa).value, g);
        accum(gs, pb, t.node(pb).value, g);
      });
}

Var Tape::sub(Var a, Var b) {
  return binary_ew(
      "sub", a, b, [](const ArrayXd& u, const ArrayXd& v) { return ArrayXd(u - v); },
      [pa = a.id, pb = b.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
        accum(gs, pa, t.node(pa).value, g);
        accum(gs, pb, t.node(pb).value, -g);
      });
}

Var Tape::neg(Var a) {
  const RealTensor& av = val(a);
  return push("neg", {a.id}, RealTensor(av.shape, -av.data),
              [pa = a.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value, -g);
              });
}

Var Tape::mul(Var a, Var b) {
  return binary_ew(
      "mul", a, b, [](const ArrayXd& u, const ArrayXd& v) { return ArrayXd(u * v); },
      [pa = a.id, pb = b.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
        accum(gs, pa, t.node(pa).value, g * t.node(pb).value.data);
        accum(gs, pb, t.node(pb).value, g * t.node(pa).value.data);
      });
}

Var Tape::cmul(Var a, ArrayXd factor) {
  const RealTensor& av = val(a);
  if (factor.size() != av.size()) throw ShapeMismatch("cmul: factor length mismatch");
  auto shared = std::make_shared<ArrayXd>(std::move(factor));
  return push("cmul", {a.id}, RealTensor(av.shape, av.data * (*shared)),
              [pa = a.id, shared](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value, g * (*shared));
              });
}

Var Tape::scale(Var a, double s) {
  const RealTensor& av = val(a);
  return push("scale", {a.id}, RealTensor(av.shape, av.data * s),
              [pa = a.id, s](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value, g * s);
              });
}

Var Tape::tanh_act(Var a) {
  const RealTensor& av = val(a);
  Var out = push("tanh", {a.id}, RealTensor(av.shape, av.data.tanh()), nullptr);
  nodes_.back().back = [pa = a.id, self = out.id](const ArrayXd& g, const Tape& t,
                                                  std::vector<RealTensor>& gs) {
    const ArrayXd& y = t.node(self).value.data;
    accum(gs, pa, t.node(pa).value, g * (1.0 - y.square()));
  };
  return out;
}

Var Tape::sigmoid_act(Var a) {
  const RealTensor& av = val(a);
  ArrayXd y = 1.0 / (1.0 + (-av.data).exp());
  Var out = push("sigmoid", {a.id}, RealTensor(av.shape, std::move(y)), nullptr);
  nodes_.back().back = [pa = a.id, self = out.id](const ArrayXd& g, const Tape& t,
                                                  std::vector<RealTensor>& gs) {
    const ArrayXd& s = t.node(self).value.data;
    accum(gs, pa, t.node(pa).value, g * s * (1.0 - s));
  };
  return out;
}

Var Tape::relu_act(Var a) {
  const RealTensor& av = val(a);
  return push("relu", {a.id}, RealTensor(av.shape, av.data.max(0.0)),
              [pa = a.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                const ArrayXd& x = t.node(pa).value.data;
                accum(gs, pa, t.node(pa).value, (x > 0.0).select(g, 0.0));
              });
}

Var Tape::prelu_act(Var a, Var slope) {
  const RealTensor& av = val(a);
  const RealTensor& sv = val(slope);
  if (sv.size() != 1) throw ShapeMismatch("prelu: slope must be a single shared scalar");
  const double s = sv.data[0];
  ArrayXd y = (av.data > 0.0).select(av.data, s * av.data);
  return push("prelu", {a.id, slope.id}, RealTensor(av.shape, std::move(y)),
              [pa = a.id, ps = slope.id](const ArrayXd& g, const Tape& t,
                                         std::vector<RealTensor>& gs) {
                const ArrayXd& x = t.node(pa).value.data;
                const double sl = t.node(ps).value.data[0];
                accum(gs, pa, t.node(pa).value, (x > 0.0).select(g, sl * g));
                ArrayXd gslope(1);
                gslope[0] = ((x > 0.0).select(ArrayXd::Zero(x.size()), g * x)).sum();
                accum(gs, ps, t.node(ps).value, gslope);
              });
}

Var Tape::reshape(Var a, Shape s) {
  const RealTensor& av = val(a);
  if (shape_size(s) != av.size())
    throw ShapeMismatch("reshape: element count changes from " + shape_str(av.shape) + " to " +
                        shape_str(s));
  return push("reshape", {a.id}, RealTensor(std::move(s), av.data),
              [pa = a.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value, g);
              });
}

Var Tape::gather(Var a, std::shared_ptr<const std::vector<Index>> idx, Shape out_shape) {
  const RealTensor& av = val(a);
  if (static_cast<Index>(idx->size()) != shape_size(out_shape))
    throw ShapeMismatch("gather: index count does not match output shape");
  ArrayXd out(static_cast<Index>(idx->size()));
  for (size_t i = 0; i < idx->size(); ++i) {
    const Index src = (*idx)[i];
    out[static_cast<Index>(i)] = src < 0 ? 0.0 : av.data[src];
  }
  return push("gather", {a.id}, RealTensor(std::move(out_shape), std::move(out)),
              [pa = a.id, idx](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                RealTensor& ga = gs[static_cast<size_t>(pa)];
                if (ga.data.size() == 0) {
                  ga.shape = t.node(pa).value.shape;
                  ga.data = ArrayXd::Zero(t.node(pa).value.size());
                }
                for (size_t i = 0; i < idx->size(); ++i) {
                  const Index src = (*idx)[i];
                  if (src >= 0) ga.data[src] += g[static_cast<Index>(i)];
                }
              });
}

Var Tape::slice_rows(Var a, Index row0, Index nrows) {
  const RealTensor& av = val(a);
  require_rank2(av, "slice_rows");
  const Index cols = av.dim(1);
  if (row0 < 0 || row0 + nrows > av.dim(0)) throw ShapeMismatch("slice_rows: out of range");
  return push("slice_rows", {a.id},
              RealTensor({nrows, cols}, av.data.segment(row0 * cols, nrows * cols)),
              [pa = a.id, row0, nrows, cols](const ArrayXd& g, const Tape& t,
                                             std::vector<RealTensor>& gs) {
                RealTensor& ga = gs[static_cast<size_t>(pa)];
                if (ga.data.size() == 0) {
                  ga.shape = t.node(pa).value.shape;
                  ga.data = ArrayXd::Zero(t.node(pa).value.size());
                }
                ga.data.segment(row0 * cols, nrows * cols) += g;
              });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
  const Index rows = val(parts[0]).dim(0);
  Index total = 0;
  std::vector<int> parents;
  std::vector<Index> widths;
  for (Var p : parts) {
    const RealTensor& v = val(p);
    require_rank2(v, "concat_cols");
    if (v.dim(0) != rows) throw ShapeMismatch("concat_cols: row count mismatch");
    parents.push_back(p.id);
    widths.push_back(v.dim(1));
    total += v.dim(1);
  }
  ArrayXd out(rows * total);
  Index off = 0;
  for (size_t k = 0; k < parts.size(); ++k) {
    const RealTensor& v = val(parts[k]);
    for (Index i = 0; i < rows; ++i)
      out.segment(i * total + off, widths[k]) = v.data.segment(i * widths[k], widths[k]);
    off += widths[k];
  }
  return push("concat_cols", parents, RealTensor({rows, total}, std::move(out)),
              [ps = parents, widths, rows, total](const ArrayXd& g, const Tape& t,
                                                  std::vector<RealTensor>& gs) {
                Index off = 0;
                for (size_t k = 0; k < ps.size(); ++k) {
                  ArrayXd gk(rows * widths[k]);
                  for (Index i = 0; i < rows; ++i)
                    gk.segment(i * widths[k], widths[k]) = g.segment(i * total + off, widths[k]);
                  accum(gs, ps[k], t.node(ps[k]).value, gk);
                  off += widths[k];
                }
              });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: no inputs");
  const Index cols = val(parts[0]).dim(1);
  Index total_rows = 0;
  std::vector<int> parents;
  std::vector<Index> counts;
  for (Var p : parts) {
    const RealTensor& v = val(p);
    require_rank2(v, "concat_rows");
    if (v.dim(1) != cols) throw ShapeMismatch("concat_rows: column count mismatch");
    parents.push_back(p.id);
    counts.push_back(v.size());
    total_rows += v.dim(0);
  }
  ArrayXd out(total_rows * cols);
  Index off = 0;
  for (Var p : parts) {
    const RealTensor& v = val(p);
    out.segment(off, v.size()) = v.data;
    off += v.size();
  }
  return push("concat_rows", parents, RealTensor({total_rows, cols}, std::move(out)),
              [ps = parents, counts](const ArrayXd& g, const Tape& t,
                                     std::vector<RealTensor>& gs) {
                Index off = 0;
                for (size_t k = 0; k < ps.size(); ++k) {
                  accum(gs, ps[k], t.node(ps[k]).value, g.segment(off, counts[k]));
                  off += counts[k];
                }
              });
}

Var Tape::matmul(Var a, Var b) {
  const RealTensor& av = val(a);
  const RealTensor& bv = val(b);
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const Index m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  if (bv.dim(0) != k)
    throw ShapeMismatch("matmul: inner dimensions " + shape_str(av.shape) + " x " +
                        shape_str(bv.shape));
  ArrayXd out(m * n);
  MapRM(out.data(), m, n).noalias() = as_matrix(av, m, k) * as_matrix(bv, k, n);
  return push("matmul", {a.id, b.id}, RealTensor({m, n}, std::move(out)),
              [pa = a.id, pb = b.id, m, k, n](const ArrayXd& g, const Tape& t,
                                              std::vector<RealTensor>& gs) {
                CMapRM G(g.data(), m, n);
                CMapRM A = as_matrix(t.node(pa).value, m, k);
                CMapRM B = as_matrix(t.node(pb).value, k, n);
                ArrayXd ga(m * k), gb(k * n);
                MapRM(ga.data(), m, k).noalias() = G * B.transpose();
                MapRM(gb.data(), k, n).noalias() = A.transpose() * G;
                accum(gs, pa, t.node(pa).value, ga);
                accum(gs, pb, t.node(pb).value, gb);
              });
}

Var Tape::matmul_nt(Var a, Var b) {
  const RealTensor& av = val(a);
  const RealTensor& bv = val(b);
  require_rank2(av, "matmul_nt");
  require_rank2(bv, "matmul_nt");
  const Index m = av.dim(0), k = av.dim(1), n = bv.dim(0);
  if (bv.dim(1) != k)
    throw ShapeMismatch("matmul_nt: inner dimensions " + shape_str(av.shape) + " x " +
                        shape_str(bv.shape) + "^T");
  ArrayXd out(m * n);
  MapRM(out.data(), m, n).noalias() = as_matrix(av, m, k) * as_matrix(bv, n, k).transpose();
  return push("matmul_nt", {a.id, b.id}, RealTensor({m, n}, std::move(out)),
              [pa = a.id, pb = b.id, m, k, n](const ArrayXd& g, const Tape& t,
                                              std::vector<RealTensor>& gs) {
                CMapRM G(g.data(), m, n);
                CMapRM A = as_matrix(t.node(pa).value, m, k);
                CMapRM B = as_matrix(t.node(pb).value, n, k);
                ArrayXd ga(m * k), gb(n * k);
                MapRM(ga.data(), m, k).noalias() = G * B;
                MapRM(gb.data(), n, k).noalias() = G.transpose() * A;
                accum(gs, pa, t.node(pa).value, ga);
                accum(gs, pb, t.node(pb).value, gb);
              });
}

Var Tape::add_rowvec(Var a, Var bias) {
  const RealTensor& av = val(a);
  const RealTensor& bv = val(bias);
  require_rank2(av, "add_rowvec");
  const Index m = av.dim(0), n = av.dim(1);
  if (bv.size() != n) throw ShapeMismatch("add_rowvec: bias length mismatch");
  ArrayXd out = av.data;
  for (Index i = 0; i < m; ++i) out.segment(i * n, n) += bv.data;
  return push("add_rowvec", {a.id, bias.id}, RealTensor(av.shape, std::move(out)),
              [pa = a.id, pb = bias.id, m, n](const ArrayXd& g, const Tape& t,
                                              std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value, g);
                ArrayXd gb = ArrayXd::Zero(n);
                for (Index i = 0; i < m; ++i) gb += g.segment(i * n, n);
                accum(gs, pb, t.node(pb).value, gb);
              });
}

Var Tape::add_channel_bias(Var a, Var bias) {
  const RealTensor& av = val(a);
  const RealTensor& bv = val(bias);
  if (av.rank() != 4) throw ShapeMismatch("add_channel_bias expects [B,C,H,W]");
  const Index B = av.dim(0), C = av.dim(1), plane = av.dim(2) * av.dim(3);
  if (bv.size() != C) throw ShapeMismatch("add_channel_bias: bias length mismatch");
  ArrayXd out = av.data;
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c) out.segment((b * C + c) * plane, plane) += bv.data[c];
  return push("add_channel_bias", {a.id, bias.id}, RealTensor(av.shape, std::move(out)),
              [pa = a.id, pb = bias.id, B, C, plane](const ArrayXd& g, const Tape& t,
                                                     std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value, g);
                ArrayXd gb = ArrayXd::Zero(C);
                for (Index b = 0; b < B; ++b)
                  for (Index c = 0; c < C; ++c) gb[c] += g.segment((b * C + c) * plane, plane).sum();
                accum(gs, pb, t.node(pb).value, gb);
              });
}

Var Tape::sum(Var a) {
  const RealTensor& av = val(a);
  return push("sum", {a.id}, RealTensor::scalar(av.data.sum()),
              [pa = a.id](const ArrayXd& g, const Tape& t, std::vector<RealTensor>& gs) {
                accum(gs, pa, t.node(pa).value,
                      ArrayXd::Constant(t.node(pa).value.size(), g[0]));
              });
}

Var Tape::cross_entropy(Var logits, std::vector<int> labels) {
  const RealTensor& lv = val(logits);
  require_rank2(lv, "cross_entropy");
  const Index rows = lv.dim(0), cols = lv.dim(1);
  if (static_cast<Index>(labels.size()) != rows)
    throw ShapeMismatch("cross_entropy: one label per row required");

  Index valid = 0;
  double loss = 0.0;
  ArrayXd grad = ArrayXd::Zero(rows * cols);
  for (Index i = 0; i < rows; ++i) {
    const int lab = labels[static_cast<size_t>(i)];
    if (lab < 0) continue;
    if (lab >= cols) throw ShapeMismatch("cross_entropy: label out of range");
    ++valid;
    auto row = lv.data.segment(i * cols, cols);
    const double mx = row.maxCoeff();
    ArrayXd p = (row - mx).exp();
    const double denom = p.sum();
    p /= denom;
    loss -= std::log(p[lab]);
    grad.segment(i * cols, cols) = p;
    grad[i * cols + lab] -= 1.0;
  }
  if (valid == 0) throw ShapeMismatch("cross_entropy: all rows masked");
  loss /= static_cast<double>(valid);
  grad /= static_cast<double>(valid);
  auto shared = std::make_shared<ArrayXd>(std::move(grad));
  return push("cross_entropy", {logits.id}, RealTensor::scalar(loss),
              [pl = logits.id, shared](const ArrayXd& g, const Tape& t,
                                       std::vector<RealTensor>& gs) {
                accum(gs, pl, t.node(pl).value, g[0] * (*shared));
              });
}

Var Tape::ctc(Var logits, std::vector<int> target) {
  const RealTensor& lv = val(logits);
  require_rank2(lv, "ctc");
  const Index frames = lv.dim(0), cols = lv.dim(1);

  FramePosterior post;
  post.p.resize(frames, cols);
  for (Index i = 0; i < frames; ++i) {
    auto row = lv.data.segment(i * cols, cols);
    const double mx = row.maxCoeff();
    ArrayXd p = (row - mx).exp();
    post.p.row(i) = (p / p.sum()).matrix().transpose();
  }
  CtcResult res = ctc_loss(post, target);

  auto shared = std::make_shared<ArrayXd>(rows_to_flat(res.grad_logits));
  return push("ctc", {logits.id}, RealTensor::scalar(res.loss),
              [pl = logits.id, shared](const ArrayXd& g, const Tape& t,
                                       std::vector<RealTensor>& gs) {
                accum(gs, pl, t.node(pl).value, g[0] * (*shared));
              });
}

Gradients Tape::backward(Var loss) const {
  if (!loss.valid() || val(loss).size() != 1) throw NonScalarLoss();
  Gradients out;
  out.tape_ = this;
  out.g_.resize(nodes_.size());
  out.g_[static_cast<size_t>(loss.id)] =
      RealTensor(val(loss).shape, Eigen::ArrayXd::Ones(1));
  for (int id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.back) continue;
    const RealTensor& g = out.g_[static_cast<size_t>(id)];
    if (g.data.size() == 0) continue;  // node does not reach the loss
    n.back(g.data, *this, out.g_);
  }
  return out;
}

QVar qleaf(Tape& t, const QuaternionTensor& q) {
  return {t.leaf(q.r), t.leaf(q.x), t.leaf(q.y), t.leaf(q.z)};
}

QuaternionTensor qval(const Tape& t, const QVar& q) {
  return qt_pack(t.val(q.r), t.val(q.x), t.val(q.y), t.val(q.z));
}

QVar qadd(Tape& t, const QVar& a, const QVar& b) {
  return {t.add(a.r, b.r), t.add(a.x, b.x), t.add(a.y, b.y), t.add(a.z, b.z)};
}

Var qconcat_real(Tape& t, const QVar& q) {
  return t.concat_cols({q.r, q.x, q.y, q.z});
}

}  // namespace quasar
