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

#include <cmath>

#include <Eigen/Core>

#include "quasar/errors.hpp"

namespace quasar {

// A quaternion q = r + x i + y j + z k with i^2 = j^2 = k^2 = ijk = -1.
// Multiplication is the (non-commutative) Hamilton product.
template <typename Scalar = double>
struct Quaternion {
  Scalar r{0}, x{0}, y{0}, z{0};

  constexpr Quaternion() = default;
  constexpr Quaternion(Scalar r_, Scalar x_, Scalar y_, Scalar z_)
      : r(r_), x(x_), y(y_), z(z_) {}

  static constexpr Quaternion identity() { return {Scalar(1), 0, 0, 0}; }

  constexpr bool operator==(const Quaternion&) const = default;

  Eigen::Matrix<Scalar, 4, 1> vec() const {
    return Eigen::Matrix<Scalar, 4, 1>(r, x, y, z);
  }
};

using Quat = Quaternion<double>;

template <typename S>
constexpr Quaternion<S> hamilton(const Quaternion<S>& a, const Quaternion<S>& b) {
  return {a.r * b.r - a.x * b.x - a.y * b.y - a.z * b.z,
          a.r * b.x + a.x * b.r + a.y * b.z - a.z * b.y,
          a.r * b.y - a.x * b.z + a.y * b.r + a.z * b.x,
          a.r * b.z + a.x * b.y - a.y * b.x + a.z * b.r};
}

template <typename S>
constexpr Quaternion<S> conjugate(const Quaternion<S>& q) {
  return {q.r, -q.x, -q.y, -q.z};
}

template <typename S>
constexpr Quaternion<S> add(const Quaternion<S>& a, const Quaternion<S>& b) {
  return {a.r + b.r, a.x + b.x, a.y + b.y, a.z + b.z};
}

template <typename S>
constexpr Quaternion<S> scale(const Quaternion<S>& q, S s) {
  return {q.r * s, q.x * s, q.y * s, q.z * s};
}

template <typename S>
constexpr S norm_squared(const Quaternion<S>& q) {
  return q.r * q.r + q.x * q.x + q.y * q.y + q.z * q.z;
}

template <typename S>
S norm(const Quaternion<S>& q) {
  return std::sqrt(norm_squared(q));
}

// Unit quaternion q / |q|. The threshold guards against subnormal inputs
// whose norm would underflow or amplify to garbage.
template <typename S>
Quaternion<S> normalize(const Quaternion<S>& q) {
  const S n2 = norm_squared(q);
  if (n2 < S(1e-300)) throw ZeroNormError();
  return scale(q, S(1) / std::sqrt(n2));
}

// The real 4x4 left-multiplication matrix of q: to_matrix(a) * b.vec() is
// the component vector of hamilton(a, b). Its first column is [r,x,y,z]^T
// and M * M^T = |q|^2 * I.
template <typename S>
Eigen::Matrix<S, 4, 4> to_matrix(const Quaternion<S>& q) {
  Eigen::Matrix<S, 4, 4> m;
  m << q.r, -q.x, -q.y, -q.z,
       q.x,  q.r, -q.z,  q.y,
       q.y,  q.z,  q.r, -q.x,
       q.z, -q.y,  q.x,  q.r;
  return m;
}

template <typename S = double>
using QuaternionMatrix4 = Eigen::Matrix<S, 4, 4>;

}  // namespace quasar
