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

#include "quasar/tensor.hpp"

#include <sstream>

namespace quasar {

Index shape_size(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

RealTensor::RealTensor(Shape s, Eigen::ArrayXd d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_size(shape))
    throw ShapeMismatch("tensor data length does not match shape " + shape_str(shape));
}

RealTensor RealTensor::zeros(Shape s) {
  Index n = shape_size(s);
  return RealTensor(std::move(s), Eigen::ArrayXd::Zero(n));
}

RealTensor RealTensor::constant(Shape s, double v) {
  Index n = shape_size(s);
  return RealTensor(std::move(s), Eigen::ArrayXd::Constant(n, v));
}

RealTensor RealTensor::scalar(double v) { return constant({1}, v); }

QuaternionTensor::QuaternionTensor(Shape s, RealTensor r_, RealTensor x_, RealTensor y_,
                                   RealTensor z_)
    : shape(std::move(s)), r(std::move(r_)), x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {
  if (!same_shape(r.shape, shape) || !same_shape(x.shape, shape) ||
      !same_shape(y.shape, shape) || !same_shape(z.shape, shape))
    throw ShapeMismatch("quaternion component blocks must share shape " + shape_str(shape));
}

QuaternionTensor QuaternionTensor::zeros(Shape s) {
  QuaternionTensor q;
  q.shape = s;
  q.r = RealTensor::zeros(s);
  q.x = RealTensor::zeros(s);
  q.y = RealTensor::zeros(s);
  q.z = RealTensor::zeros(std::move(s));
  return q;
}

const RealTensor& QuaternionTensor::block(int c) const {
  switch (c) {
    case 0: return r;
    case 1: return x;
    case 2: return y;
    default: return z;
  }
}

RealTensor& QuaternionTensor::block(int c) {
  return const_cast<RealTensor&>(static_cast<const QuaternionTensor&>(*this).block(c));
}

QuaternionTensor qt_pack(RealTensor r, RealTensor x, RealTensor y, RealTensor z) {
  if (!same_shape(r.shape, x.shape) || !same_shape(r.shape, y.shape) ||
      !same_shape(r.shape, z.shape))
    throw ShapeMismatch("qt_pack requires four blocks of identical shape");
  Shape s = r.shape;
  return QuaternionTensor(std::move(s), std::move(r), std::move(x), std::move(y), std::move(z));
}

std::array<RealTensor, 4> qt_unpack(const QuaternionTensor& q) {
  return {q.r, q.x, q.y, q.z};
}

RealTensor qt_to_real(const QuaternionTensor& q) {
  const Index n = q.shape.empty() ? 1 : q.shape.back();
  const Index rows = q.units() / n;
  Shape out_shape = q.shape;
  if (out_shape.empty()) out_shape.push_back(1);
  out_shape.back() = 4 * n;

  Eigen::ArrayXd out(4 * n * rows);
  for (Index i = 0; i < rows; ++i) {
    out.segment(i * 4 * n, n) = q.r.data.segment(i * n, n);
    out.segment(i * 4 * n + n, n) = q.x.data.segment(i * n, n);
    out.segment(i * 4 * n + 2 * n, n) = q.y.data.segment(i * n, n);
    out.segment(i * 4 * n + 3 * n, n) = q.z.data.segment(i * n, n);
  }
  return RealTensor(std::move(out_shape), std::move(out));
}

RealTensor reshaped(RealTensor t, Shape s) {
  if (shape_size(s) != t.size())
    throw ShapeMismatch("reshape from " + shape_str(t.shape) + " to " + shape_str(s));
  t.shape = std::move(s);
  return t;
}

QuaternionTensor reshaped(QuaternionTensor q, Shape s) {
  q.r = reshaped(std::move(q.r), s);
  q.x = reshaped(std::move(q.x), s);
  q.y = reshaped(std::move(q.y), s);
  q.z = reshaped(std::move(q.z), s);
  q.shape = std::move(s);
  return q;
}

QuaternionTensor real_to_qt(const RealTensor& t) {
  if (t.shape.empty() || t.shape.back() % 4 != 0)
    throw ShapeMismatch("real_to_qt requires a last axis divisible by 4, got " +
                        shape_str(t.shape));
  const Index n = t.shape.back() / 4;
  const Index rows = t.size() / (4 * n);
  Shape s = t.shape;
  s.back() = n;

  Eigen::ArrayXd r(n * rows), x(n * rows), y(n * rows), z(n * rows);
  for (Index i = 0; i < rows; ++i) {
    r.segment(i * n, n) = t.data.segment(i * 4 * n, n);
    x.segment(i * n, n) = t.data.segment(i * 4 * n + n, n);
    y.segment(i * n, n) = t.data.segment(i * 4 * n + 2 * n, n);
    z.segment(i * n, n) = t.data.segment(i * 4 * n + 3 * n, n);
  }
  return QuaternionTensor(s, RealTensor(s, std::move(r)), RealTensor(s, std::move(x)),
                          RealTensor(s, std::move(y)), RealTensor(s, std::move(z)));
}

}  // namespace quasar
