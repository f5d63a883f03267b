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

#include "quasar/gradcheck.hpp"
#include "quasar/rng.hpp"
#include "quasar/tape.hpp"
#include "quasar/tensor.hpp"

using namespace quasar;

namespace {

RealTensor random_tensor(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  RealTensor t = RealTensor::zeros(std::move(s));
  for (Index i = 0; i < t.size(); ++i) t.data[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("qt_pack round trip and shape mismatch") {
  RealTensor a = RealTensor::constant({1}, 1), b = RealTensor::constant({1}, 2);
  RealTensor c = RealTensor::constant({1}, 3), d = RealTensor::constant({1}, 4);
  QuaternionTensor q = qt_pack(a, b, c, d);
  CHECK(q.shape == Shape{1});
  CHECK(q.r.data[0] == 1);
  CHECK(q.z.data[0] == 4);

  auto parts = qt_unpack(q);
  CHECK(parts[0].data[0] == 1);
  CHECK(parts[3].data[0] == 4);

  CHECK_THROWS_AS(qt_pack(RealTensor::zeros({2}), RealTensor::zeros({3}), RealTensor::zeros({2}),
                          RealTensor::zeros({2})),
                  ShapeMismatch);
}

TEST_CASE("qt_to_real splits the last axis in r|x|y|z order") {
  Rng rng(5);
  QuaternionTensor q = qt_pack(random_tensor(rng, {3, 40}), random_tensor(rng, {3, 40}),
                               random_tensor(rng, {3, 40}), random_tensor(rng, {3, 40}));
  RealTensor real = qt_to_real(q);
  CHECK(real.shape == Shape{3, 160});
  // row 1, band 7 of each block
  CHECK(real.data[1 * 160 + 7] == q.r.data[1 * 40 + 7]);
  CHECK(real.data[1 * 160 + 40 + 7] == q.x.data[1 * 40 + 7]);
  CHECK(real.data[1 * 160 + 80 + 7] == q.y.data[1 * 40 + 7]);
  CHECK(real.data[1 * 160 + 120 + 7] == q.z.data[1 * 40 + 7]);

  QuaternionTensor back = real_to_qt(real);
  CHECK((back.r.data == q.r.data).all());
  CHECK((back.x.data == q.x.data).all());
  CHECK((back.y.data == q.y.data).all());
  CHECK((back.z.data == q.z.data).all());

  RealTensor again = qt_to_real(back);
  CHECK((again.data == real.data).all());

  QuaternionTensor zero = QuaternionTensor::zeros({4});
  CHECK((qt_to_real(zero).data == 0.0).all());
  CHECK_THROWS_AS(real_to_qt(RealTensor::zeros({3, 6})), ShapeMismatch);

  // a rank-1 tensor of 40 quaternions flattens to 160 reals
  QuaternionTensor vec = qt_pack(random_tensor(rng, {40}), random_tensor(rng, {40}),
                                 random_tensor(rng, {40}), random_tensor(rng, {40}));
  CHECK(qt_to_real(vec).shape == Shape{160});
}

TEST_CASE("backward on quadratic and unreachable parameters") {
  Tape t;
  Rng rng(9);
  Var w = t.leaf(random_tensor(rng, {4}));
  Var unused = t.leaf(random_tensor(rng, {2}));
  Var loss = t.sum(t.mul(w, w));
  Gradients g = t.backward(loss);
  CHECK((g[w.id].data - 2.0 * t.val(w).data).abs().maxCoeff() <= 1e-15);
  CHECK_FALSE(g.reached(unused.id));
  CHECK((g[unused.id].data == 0.0).all());  // materializes as zero

  CHECK_THROWS_AS(t.backward(w), NonScalarLoss);
}

TEST_CASE("fan-out gradients accumulate") {
  // f(w) = sum(w*w) + sum(w*w) consumes w twice; gradient must be 4w.
  Tape t;
  Rng rng(21);
  Var w = t.leaf(random_tensor(rng, {5}));
  Var loss = t.add(t.sum(t.mul(w, w)), t.sum(t.mul(w, w)));
  Gradients g = t.backward(loss);
  CHECK((g[w.id].data - 4.0 * t.val(w).data).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("grad_check is near machine precision for linear functions") {
  Rng rng(33);
  RealTensor c = random_tensor(rng, {6});
  const double err = grad_check(
      [&c](Tape& t, const std::vector<Var>& v) { return t.sum(t.mul(v[0], t.leaf(c))); },
      {random_tensor(rng, {6})}, 1e-5);
  CHECK(err < 1e-10);
}

TEST_CASE("every primitive op passes grad_check at 10 random points") {
  Rng rng(41);
  constexpr double kEps = 1e-5;
  constexpr double kTol = 1e-4;

  struct OpCase {
    const char* name;
    LossBuilder build;
    std::function<std::vector<RealTensor>(Rng&)> point;
  };

  std::vector<OpCase> cases;
  cases.push_back({"add",
                   [](Tape& t, const std::vector<Var>& v) {
                     return t.sum(t.mul(t.add(v[0], v[1]), t.add(v[0], v[1])));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {3, 2}),
                                                    random_tensor(r, {3, 2})};
                   }});
  cases.push_back({"sub",
                   [](Tape& t, const std::vector<Var>& v) {
                     return t.sum(t.mul(t.sub(v[0], v[1]), t.sub(v[0], v[1])));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {3, 2}),
                                                    random_tensor(r, {3, 2})};
                   }});
  cases.push_back({"neg_scale",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var y = t.scale(t.neg(v[0]), 1.7);
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) { return std::vector<RealTensor>{random_tensor(r, {4})}; }});
  cases.push_back({"mul",
                   [](Tape& t, const std::vector<Var>& v) {
                     return t.sum(t.mul(t.mul(v[0], v[1]), v[0]));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {5}),
                                                    random_tensor(r, {5})};
                   }});
  cases.push_back({"matmul",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var y = t.matmul(v[0], v[1]);
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {3, 4}),
                                                    random_tensor(r, {4, 2})};
                   }});
  cases.push_back({"matmul_nt",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var y = t.matmul_nt(v[0], v[1]);
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {3, 4}),
                                                    random_tensor(r, {2, 4})};
                   }});
  cases.push_back({"add_rowvec",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var y = t.add_rowvec(v[0], v[1]);
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {3, 4}),
                                                    random_tensor(r, {4})};
                   }});
  cases.push_back({"add_channel_bias",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var y = t.add_channel_bias(v[0], v[1]);
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {2, 3, 2, 2}),
                                                    random_tensor(r, {3})};
                   }});
  cases.push_back({"tanh",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var y = t.tanh_act(v[0]);
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) { return std::vector<RealTensor>{random_tensor(r, {3, 3})}; }});
  cases.push_back({"sigmoid",
                   [](Tape& t, const std::vector<Var>& v) { return t.sum(t.sigmoid_act(v[0])); },
                   [](Rng& r) { return std::vector<RealTensor>{random_tensor(r, {3, 3})}; }});
  cases.push_back({"gather_pad",
                   [](Tape& t, const std::vector<Var>& v) {
                     auto idx = std::make_shared<std::vector<Index>>(
                         std::vector<Index>{3, -1, 0, 0, 5, -1});
                     Var y = t.gather(v[0], idx, {2, 3});
                     return t.sum(t.mul(y, y));
                   },
                   [](Rng& r) { return std::vector<RealTensor>{random_tensor(r, {6})}; }});
  cases.push_back({"slice_concat_reshape",
                   [](Tape& t, const std::vector<Var>& v) {
                     Var top = t.slice_rows(v[0], 0, 2);
                     Var bottom = t.slice_rows(v[0], 2, 2);
                     Var wide = t.concat_cols({top, bottom});
                     Var tall = t.concat_rows({wide, wide});
                     Var back = t.reshape(tall, {2, 2, 2, 2});
                     return t.sum(t.mul(back, back));
                   },
                   [](Rng& r) { return std::vector<RealTensor>{random_tensor(r, {4, 2})}; }});
  cases.push_back({"cross_entropy_masked",
                   [](Tape& t, const std::vector<Var>& v) {
                     return t.cross_entropy(v[0], {1, -1, 0, 2});
                   },
                   [](Rng& r) {
                     return std::vector<RealTensor>{random_tensor(r, {4, 3}, -2.0, 2.0)};
                   }});

  for (const OpCase& c : cases) {
    double worst = 0.0;
    for (int p = 0; p < 10; ++p) worst = std::max(worst, grad_check(c.build, c.point(rng), kEps));
    INFO(c.name);
    CHECK(worst < kTol);
  }
}

TEST_CASE("cmul applies a constant mask") {
  Tape t;
  Eigen::ArrayXd mask(4);
  mask << 0.0, 2.0, 0.0, 2.0;
  Var w = t.leaf(RealTensor({4}, Eigen::ArrayXd::Ones(4)));
  Var y = t.cmul(w, mask);
  CHECK(t.val(y).data[0] == 0.0);
  CHECK(t.val(y).data[1] == 2.0);
  Gradients g = t.backward(t.sum(y));
  CHECK(g[w.id].data[0] == 0.0);
  CHECK(g[w.id].data[3] == 2.0);
}

TEST_CASE("shape errors") {
  Tape t;
  Var a = t.leaf(RealTensor::zeros({2, 3}));
  Var b = t.leaf(RealTensor::zeros({3, 2}));
  CHECK_THROWS_AS(t.add(a, b), ShapeMismatch);
  CHECK_THROWS_AS(t.matmul(a, a), ShapeMismatch);
  CHECK_THROWS_AS(t.reshape(a, {4, 2}), ShapeMismatch);
  CHECK_THROWS_AS(t.slice_rows(a, 1, 5), ShapeMismatch);
}
