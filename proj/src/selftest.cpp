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

#include "quasar/selftest.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "quasar/ctc.hpp"
#include "quasar/gradcheck.hpp"
#include "quasar/layers.hpp"
#include "quasar/quaternion.hpp"
#include "quasar/rng.hpp"

namespace quasar {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Quat random_quat(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

double max_abs_diff(const Quat& a, const Quat& b) {
  return std::max({std::abs(a.r - b.r), std::abs(a.x - b.x), std::abs(a.y - b.y),
                   std::abs(a.z - b.z)});
}

RealTensor random_tensor(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  RealTensor t = RealTensor::zeros(std::move(s));
  for (Index i = 0; i < t.size(); ++i) t.data[i] = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero, for kinked activations.
RealTensor random_offzero(Rng& rng, Shape s) {
  RealTensor t = RealTensor::zeros(std::move(s));
  for (Index i = 0; i < t.size(); ++i)
    t.data[i] = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.3, 1.5);
  return t;
}

Var sum_squares(Tape& t, const QVar& q) {
  Var s = t.add(t.sum(t.mul(q.r, q.r)), t.sum(t.mul(q.x, q.x)));
  return t.add(s, t.add(t.sum(t.mul(q.y, q.y)), t.sum(t.mul(q.z, q.z))));
}

QVar qvar_from(const std::vector<Var>& leaves, size_t at) {
  return {leaves[at], leaves[at + 1], leaves[at + 2], leaves[at + 3]};
}

}  // namespace

SuiteResult algebra_suite() {
  const double t0 = now_seconds();
  SuiteResult res;
  res.name = "algebra";
  Rng rng(20260301);

  double worst_hom = 0, worst_assoc = 0, worst_norm = 0, worst_conj = 0;
  for (int i = 0; i < 1000; ++i) {
    const Quat a = random_quat(rng, -10, 10);
    const Quat b = random_quat(rng, -10, 10);
    const Quat c = random_quat(rng, -10, 10);

    const Quat ab = hamilton(a, b);
    Eigen::Vector4d via_matrix = to_matrix(a) * b.vec();
    worst_hom = std::max(worst_hom, (via_matrix - ab.vec()).cwiseAbs().maxCoeff());

    const Quat lhs = hamilton(ab, c);
    const Quat rhs = hamilton(a, hamilton(b, c));
    const double scale = std::max(1.0, lhs.vec().cwiseAbs().maxCoeff());
    worst_assoc = std::max(worst_assoc, max_abs_diff(lhs, rhs) / scale);

    const double nn = std::abs(norm(ab) - norm(a) * norm(b)) / std::max(1.0, norm(a) * norm(b));
    worst_norm = std::max(worst_norm, nn);

    worst_conj = std::max(
        worst_conj, max_abs_diff(conjugate(ab), hamilton(conjugate(b), conjugate(a))));
  }

  const Quat qi{0, 1, 0, 0}, qj{0, 0, 1, 0}, qk{0, 0, 0, 1}, minus_one{-1, 0, 0, 0};
  const bool units_ok = hamilton(qi, qj) == qk && hamilton(qj, qi) == scale(qk, -1.0) &&
                        hamilton(qi, qi) == minus_one && hamilton(qj, qj) == minus_one &&
                        hamilton(qk, qk) == minus_one &&
                        hamilton(Quat::identity(), qi) == qi;

  std::ostringstream os;
  os << "homomorphism " << worst_hom << ", associativity " << worst_assoc << ", norm "
     << worst_norm << ", conjugate " << worst_conj << ", unit basis "
     << (units_ok ? "exact" : "BROKEN");
  res.detail = os.str();
  res.passed = worst_hom <= 1e-12 && worst_assoc <= 1e-10 && worst_norm <= 1e-10 &&
               worst_conj <= 1e-12 && units_ok;
  res.seconds = now_seconds() - t0;
  return res;
}

SuiteResult gradient_suite() {
  const double t0 = now_seconds();
  SuiteResult res;
  res.name = "gradients";
  constexpr double kEps = 1e-5;
  constexpr double kTol = 1e-4;
  constexpr int kPoints = 10;
  Rng rng(20260302);

  std::ostringstream os;
  double suite_worst = 0.0;
  auto run = [&](const char* what, const LossBuilder& f,
                 const std::function<std::vector<RealTensor>(Rng&)>& make_point) {
    double worst = 0.0;
    for (int p = 0; p < kPoints; ++p) worst = std::max(worst, grad_check(f, make_point(rng), kEps));
    os << what << " " << worst << "; ";
    suite_worst = std::max(suite_worst, worst);
  };

  // quaternion dense: leaves = w(4) b(4) in(4)
  {
    QDense layer{3, 2};
    run(
        "qdense",
        [&layer](Tape& t, const std::vector<Var>& v) {
          QDense::Bound bound{qvar_from(v, 0), qvar_from(v, 4)};
          return sum_squares(t, layer.forward_with(t, bound, qvar_from(v, 8)));
        },
        [](Rng& r) {
          std::vector<RealTensor> pt;
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {2, 3}));
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {2}));
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {2, 3}));
          return pt;
        });
  }

  // quaternion 3x5 convolution
  {
    QConv2d layer{1, 2, 3, 5, 1, 2};
    run(
        "qconv3x5",
        [&layer](Tape& t, const std::vector<Var>& v) {
          QConv2d::Bound bound{qvar_from(v, 0), qvar_from(v, 4)};
          return sum_squares(t, layer.forward_with(t, bound, qvar_from(v, 8)));
        },
        [](Rng& r) {
          std::vector<RealTensor> pt;
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {2, 1, 3, 5}));
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {2}));
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {1, 1, 5, 6}));
          return pt;
        });
  }

  // recurrent step unrolled 3 steps: w_hh(4) w_hx(4) b(4) h0(4) x1..x3(12)
  {
    QRNNCell cell;
    cell.in_q = 2;
    cell.hidden_q = 2;
    cell.act = Act::Tanh;
    run(
        "qrnn3",
        [&cell](Tape& t, const std::vector<Var>& v) {
          QRNNCell::Bound bound;
          bound.w_hh = qvar_from(v, 0);
          bound.w_hx = qvar_from(v, 4);
          bound.b_h = qvar_from(v, 8);
          QVar h = qvar_from(v, 12);
          for (int step = 0; step < 3; ++step)
            h = cell.step(t, bound, h, qvar_from(v, 16 + 4 * static_cast<size_t>(step)));
          return sum_squares(t, h);
        },
        [](Rng& r) {
          std::vector<RealTensor> pt;
          for (int i = 0; i < 8; ++i) pt.push_back(random_tensor(r, {2, 2}));
          for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {2}));
          for (int i = 0; i < 16; ++i) pt.push_back(random_tensor(r, {2, 2}));
          return pt;
        });
  }

  // split activations
  run(
      "split_tanh",
      [](Tape& t, const std::vector<Var>& v) {
        QVar q = qvar_from(v, 0);
        return sum_squares(t, split_activation(t, q, Act::Tanh));
      },
      [](Rng& r) {
        std::vector<RealTensor> pt;
        for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {3, 4}));
        return pt;
      });
  run(
      "split_sigmoid",
      [](Tape& t, const std::vector<Var>& v) {
        return sum_squares(t, split_activation(t, qvar_from(v, 0), Act::Sigmoid));
      },
      [](Rng& r) {
        std::vector<RealTensor> pt;
        for (int i = 0; i < 4; ++i) pt.push_back(random_tensor(r, {3, 4}));
        return pt;
      });
  run(
      "split_relu",
      [](Tape& t, const std::vector<Var>& v) {
        return sum_squares(t, split_activation(t, qvar_from(v, 0), Act::ReLU));
      },
      [](Rng& r) {
        std::vector<RealTensor> pt;
        for (int i = 0; i < 4; ++i) pt.push_back(random_offzero(r, {3, 4}));
        return pt;
      });
  run(
      "split_prelu",
      [](Tape& t, const std::vector<Var>& v) {
        return sum_squares(t, split_activation(t, qvar_from(v, 0), Act::PReLU, v[4]));
      },
      [](Rng& r) {
        std::vector<RealTensor> pt;
        for (int i = 0; i < 4; ++i) pt.push_back(random_offzero(r, {3, 4}));
        pt.push_back(random_tensor(r, {1}, 0.1, 0.5));
        return pt;
      });

  // softmax head + cross entropy
  {
    SoftmaxHead head{8, 3};
    const std::vector<int> labels{0, 2, 1};
    run(
        "softmax_head",
        [&head, &labels](Tape& t, const std::vector<Var>& v) {
          SoftmaxHead::Bound bound{v[0], v[1]};
          return t.cross_entropy(head.logits_with(t, bound, v[2]), labels);
        },
        [](Rng& r) {
          return std::vector<RealTensor>{random_tensor(r, {3, 8}), random_tensor(r, {3}),
                                         random_tensor(r, {3, 8})};
        });
  }

  // CTC loss on raw logits
  {
    const std::vector<int> target{0, 1};
    run(
        "ctc_loss",
        [&target](Tape& t, const std::vector<Var>& v) { return t.ctc(v[0], target); },
        [](Rng& r) { return std::vector<RealTensor>{random_tensor(r, {5, 3}, -2.0, 2.0)}; });
  }

  res.detail = os.str() + "tolerance " + std::to_string(kTol);
  res.passed = suite_worst < kTol;
  res.seconds = now_seconds() - t0;
  return res;
}

SuiteResult ctc_suite() {
  const double t0 = now_seconds();
  SuiteResult res;
  res.name = "ctc-oracle";
  Rng rng(20260303);

  double worst = 0.0;
  bool ok = true;
  for (int inst = 0; inst < 200 && ok; ++inst) {
    const int classes = 1 + static_cast<int>(rng.uniform() * 3.0);  // 1..3
    const Index T = 1 + static_cast<Index>(rng.uniform() * 6.0);    // 1..6
    FramePosterior post;
    post.p.resize(T, classes + 1);
    for (Index t = 0; t < T; ++t) {
      Eigen::ArrayXd row(classes + 1);
      for (Index k = 0; k <= classes; ++k) row[k] = rng.uniform(0.05, 1.0);
      post.p.row(t) = (row / row.sum()).matrix().transpose();
    }
    LabelSequence target;
    for (int tries = 0; tries < 100; ++tries) {
      target.clear();
      const int len = 1 + static_cast<int>(rng.uniform() * 3.0);  // 1..3
      for (int i = 0; i < len; ++i)
        target.push_back(static_cast<int>(rng.uniform() * classes));
      if (ctc_min_frames(target) <= T) break;
    }
    if (ctc_min_frames(target) > T) continue;

    const double fast = ctc_loss(post, target).loss;
    const double exact = ctc_loss_bruteforce(post, target);
    const double diff = std::abs(fast - exact);
    worst = std::max(worst, diff);
    if (diff > 1e-10) ok = false;
  }

  // Worked collapse examples: (z1,z2,z3) = (0,1,2), '-' = 3.
  const LabelSequence expect{0, 1, 2};
  const bool collapse_ok = collapse({0, 1, 3, 2, 3}, 3) == expect &&
                           collapse({0, 1, 2, 2, 3}, 3) == expect &&
                           collapse({0, 3, 1, 2, 2}, 3) == expect;

  std::ostringstream os;
  os << "max |loss - enumeration| = " << worst << ", collapse examples "
     << (collapse_ok ? "exact" : "BROKEN");
  res.detail = os.str();
  res.passed = ok && worst <= 1e-10 && collapse_ok;
  res.seconds = now_seconds() - t0;
  return res;
}

std::vector<SuiteResult> run_selftests() {
  return {algebra_suite(), gradient_suite(), ctc_suite()};
}

}  // namespace quasar
