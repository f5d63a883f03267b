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

#include <array>
#include <vector>

#include <Eigen/Core>

#include "quasar/errors.hpp"

namespace quasar {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

Index shape_size(const Shape& s);
bool same_shape(const Shape& a, const Shape& b);
std::string shape_str(const Shape& s);

// Dense real tensor: a shape plus a flat row-major Eigen array. All layer
// inputs, outputs and gradients are carried in this form.
struct RealTensor {
  Shape shape;
  Eigen::ArrayXd data;

  RealTensor() = default;
  RealTensor(Shape s, Eigen::ArrayXd d);

  static RealTensor zeros(Shape s);
  static RealTensor constant(Shape s, double v);
  static RealTensor scalar(double v);

  Index size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  Index dim(int i) const { return shape[static_cast<size_t>(i)]; }
  bool all_finite() const { return data.isFinite().all(); }

  double& operator[](Index i) { return data[i]; }
  double operator[](Index i) const { return data[i]; }
};

// A batch of quaternions stored as four aligned component blocks. The shape
// is measured in quaternion units; the real dimensionality is 4x that.
struct QuaternionTensor {
  Shape shape;
  RealTensor r, x, y, z;

  QuaternionTensor() = default;
  QuaternionTensor(Shape s, RealTensor r_, RealTensor x_, RealTensor y_, RealTensor z_);

  static QuaternionTensor zeros(Shape s);

  Index units() const { return r.size(); }
  const RealTensor& block(int c) const;
  RealTensor& block(int c);
  bool all_finite() const {
    return r.all_finite() && x.all_finite() && y.all_finite() && z.all_finite();
  }
};

// Composes four identically shaped component blocks into one quaternion
// tensor; throws ShapeMismatch otherwise.
QuaternionTensor qt_pack(RealTensor r, RealTensor x, RealTensor y, RealTensor z);
std::array<RealTensor, 4> qt_unpack(const QuaternionTensor& q);

// Splits the real view along the last axis: [..., N] quaternions become
// [..., 4N] reals laid out r | x | y | z. real_to_qt is the exact inverse.
RealTensor qt_to_real(const QuaternionTensor& q);
QuaternionTensor real_to_qt(const RealTensor& t);

// Same data under a new shape of equal element count.
RealTensor reshaped(RealTensor t, Shape s);
QuaternionTensor reshaped(QuaternionTensor q, Shape s);

}  // namespace quasar
