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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quasar/quaternion.hpp"
#include "quasar/rng.hpp"

using namespace quasar;

namespace {
Quat random_quat(Rng& rng, double lo = -10.0, double hi = 10.0) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}
}  // namespace

TEST_CASE("hamilton unit basis rules") {
  const Quat i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1}, minus_one{-1, 0, 0, 0};
  CHECK(hamilton(i, j) == k);
  CHECK(hamilton(j, i) == scale(k, -1.0));
  CHECK(hamilton(i, i) == minus_one);
  CHECK(hamilton(j, j) == minus_one);
  CHECK(hamilton(k, k) == minus_one);
}

TEST_CASE("hamilton identity and worked product") {
  Rng rng(7);
  const Quat q = random_quat(rng);
  CHECK(hamilton(Quat::identity(), q) == q);
  CHECK(hamilton(q, Quat::identity()) == q);

  // Recomputed through the matrix representation before freezing.
  const Quat a{1, 2, 3, 4}, b{5, 6, 7, 8};
  const Eigen::Vector4d oracle = to_matrix(a) * b.vec();
  const Quat p = hamilton(a, b);
  CHECK((oracle - p.vec()).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p == Quat{-60, 12, 30, 24});
}

TEST_CASE("conjugate involution and norm identity") {
  const Quat q{1, 2, 3, 4};
  CHECK(conjugate(q) == Quat{1, -2, -3, -4});
  CHECK(conjugate(conjugate(q)) == q);
  const Quat qq = hamilton(q, conjugate(q));
  CHECK(qq.r == doctest::Approx(norm_squared(q)).epsilon(1e-14));
  CHECK(qq.x == doctest::Approx(0.0));
  CHECK(qq.y == doctest::Approx(0.0));
  CHECK(qq.z == doctest::Approx(0.0));
}

TEST_CASE("norm values and multiplicativity") {
  CHECK(norm(Quat{0, 3, 4, 0}) == doctest::Approx(5.0));
  CHECK(norm(Quat{1, 0, 0, 0}) == doctest::Approx(1.0));
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const Quat a = random_quat(rng), b = random_quat(rng);
    CHECK(norm(hamilton(a, b)) ==
          doctest::Approx(norm(a) * norm(b)).epsilon(1e-10));
  }
}

TEST_CASE("normalize") {
  CHECK(normalize(Quat{2, 0, 0, 0}) == Quat{1, 0, 0, 0});
  const Quat u = normalize(Quat{1, 1, 1, 1});
  CHECK(u.r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(normalize(Quat{0, 0, 0, 0}), ZeroNormError);

  Rng rng(13);
  for (int t = 0; t < 100; ++t)
    CHECK(norm(normalize(random_quat(rng))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matrix representation") {
  const auto id = to_matrix(Quat{1, 0, 0, 0});
  CHECK(id.isApprox(Eigen::Matrix4d::Identity(), 1e-15));

  const auto mi = to_matrix(Quat{0, 1, 0, 0});
  CHECK(mi(0, 0) == 0.0);
  CHECK(mi(0, 1) == -1.0);
  CHECK(mi(1, 0) == 1.0);
  CHECK(mi.col(0) == Eigen::Vector4d(0, 1, 0, 0));

  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    const Quat a = random_quat(rng), b = random_quat(rng);
    const Eigen::Vector4d via = to_matrix(a) * b.vec();
    CHECK((via - hamilton(a, b).vec()).cwiseAbs().maxCoeff() <= 1e-12);
    // M M^T = |q|^2 I
    const Eigen::Matrix4d mm = to_matrix(a) * to_matrix(a).transpose();
    CHECK((mm - norm_squared(a) * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("associativity and conjugate anti-homomorphism") {
  Rng rng(19);
  for (int t = 0; t < 500; ++t) {
    const Quat a = random_quat(rng), b = random_quat(rng), c = random_quat(rng);
    const Quat lhs = hamilton(hamilton(a, b), c);
    const Quat rhs = hamilton(a, hamilton(b, c));
    const double scale = std::max(1.0, lhs.vec().cwiseAbs().maxCoeff());
    CHECK((lhs.vec() - rhs.vec()).cwiseAbs().maxCoeff() / scale <= 1e-10);

    const Quat anti = hamilton(conjugate(b), conjugate(a));
    CHECK((conjugate(hamilton(a, b)).vec() - anti.vec()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("add and scale are componentwise") {
  CHECK(add(Quat{1, 2, 3, 4}, Quat{4, 3, 2, 1}) == Quat{5, 5, 5, 5});
  CHECK(scale(Quat{1, 2, 3, 4}, 0.0) == Quat{0, 0, 0, 0});
  Rng rng(23);
  const Quat q = random_quat(rng);
  const Quat half = scale(add(q, q), 0.5);
  CHECK(half.r == doctest::Approx(q.r));
  CHECK(half.z == doctest::Approx(q.z));
}
