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
#include <memory>
#include <vector>

#include "quasar/tensor.hpp"

namespace quasar {

class Tape;

// Reverse-mode differentiation record. A tape is rebuilt on every forward
// pass; backward() walks the nodes in reverse creation order (which is a
// reverse topological order by construction) exactly once, summing into
// per-node gradient accumulators. One tape per training worker; tapes are
// never shared between threads.
class Gradients {
 public:
  // Gradient of the loss w.r.t. the given node; zero tensor if the node does
  // not reach the loss.
  const RealTensor& operator[](int var_id) const;
  bool reached(int var_id) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  mutable std::vector<RealTensor> g_;
};

class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(RealTensor v);
  const RealTensor& val(Var v) const;
  const Shape& shape(Var v) const { return val(v).shape; }
  size_t node_count() const { return nodes_.size(); }

  // elementwise
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var neg(Var a);
  Var mul(Var a, Var b);
  Var cmul(Var a, Eigen::ArrayXd factor);  // constant elementwise factor
  Var scale(Var a, double s);
  Var tanh_act(Var a);
  Var sigmoid_act(Var a);
  Var relu_act(Var a);
  Var prelu_act(Var a, Var slope);  // slope: single shared scalar parameter

  // data movement
  Var reshape(Var a, Shape s);
  Var gather(Var a, std::shared_ptr<const std::vector<Index>> idx, Shape out_shape);
  Var slice_rows(Var a, Index row0, Index nrows);  // 2-D input
  Var concat_cols(const std::vector<Var>& parts);  // 2-D, along last axis
  Var concat_rows(const std::vector<Var>& parts);  // 2-D, along first axis

  // linear algebra (2-D)
  Var matmul(Var a, Var b);     // [m,k] x [k,n]
  Var matmul_nt(Var a, Var b);  // [m,k] x [n,k]^T
  Var add_rowvec(Var a, Var bias);
  Var add_channel_bias(Var a, Var bias);  // [B,C,H,W] + [C]

  // reductions / losses
  Var sum(Var a);
  // Mean negative log-softmax over rows with label >= 0; rows with a
  // negative label are padding and contribute nothing.
  Var cross_entropy(Var logits, std::vector<int> labels);
  // CTC marginal negative log-likelihood of the target given per-frame
  // logits [T, classes+1]; softmax is applied internally and the gradient
  // flows to the logits. Blank is the last column.
  Var ctc(Var logits, std::vector<int> target);

  // Throws NonScalarLoss unless the root holds a single value.
  Gradients backward(Var loss) const;

 private:
  friend class Gradients;
  using BackwardFn =
      std::function<void(const Eigen::ArrayXd& g, const Tape&, std::vector<RealTensor>&)>;
  struct Node {
    const char* op;
    std::vector<int> parents;
    RealTensor value;
    BackwardFn back;  // null for leaves
  };

  Var push(const char* op, std::vector<int> parents, RealTensor value, BackwardFn back);
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  Var binary_ew(const char* op, Var a, Var b,
                const std::function<Eigen::ArrayXd(const Eigen::ArrayXd&, const Eigen::ArrayXd&)>& f,
                const BackwardFn& back);

  std::vector<Node> nodes_;
};

using Var = Tape::Var;

// Four tape variables carrying the component blocks of a quaternion value.
struct QVar {
  Var r, x, y, z;
};

QVar qleaf(Tape& t, const QuaternionTensor& q);
QuaternionTensor qval(const Tape& t, const QVar& q);
QVar qadd(Tape& t, const QVar& a, const QVar& b);

// Flattens quaternion blocks [m, n] into the real view [m, 4n] (r|x|y|z).
Var qconcat_real(Tape& t, const QVar& q);

}  // namespace quasar
