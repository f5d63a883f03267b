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

#include <cmath>

#include "quasar/ctc.hpp"
#include "quasar/gradcheck.hpp"
#include "quasar/rng.hpp"
#include "quasar/tape.hpp"

using namespace quasar;

namespace {

FramePosterior uniform_posterior(Index T, Index cols) {
  FramePosterior post;
  post.p = Eigen::MatrixXd::Constant(T, cols, 1.0 / static_cast<double>(cols));
  return post;
}

FramePosterior random_posterior(Rng& rng, Index T, Index cols) {
  FramePosterior post;
  post.p.resize(T, cols);
  for (Index t = 0; t < T; ++t) {
    Eigen::ArrayXd row(cols);
    for (Index k = 0; k < cols; ++k) row[k] = rng.uniform(0.05, 1.0);
    post.p.row(t) = (row / row.sum()).matrix().transpose();
  }
  return post;
}

}  // namespace

TEST_CASE("collapse merges repeats then removes blanks") {
  const int blank = 3;
  CHECK(collapse({0, 1, blank, 2, blank}, blank) == LabelSequence{0, 1, 2});
  CHECK(collapse({0, 1, 2, 2, blank}, blank) == LabelSequence{0, 1, 2});
  CHECK(collapse({0, blank, 1, 2, 2}, blank) == LabelSequence{0, 1, 2});
  CHECK(collapse({blank, blank, blank}, blank).empty());
  CHECK(collapse({0, 0, blank, 0}, blank) == LabelSequence{0, 0});

  // idempotent on blank-free sequences without adjacent repeats
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    LabelSequence seq;
    int prev = -1;
    for (int i = 0; i < 6; ++i) {
      int s = static_cast<int>(rng.uniform() * 3.0);
      if (s == prev) s = (s + 1) % 3;
      seq.push_back(s);
      prev = s;
    }
    CHECK(collapse(seq, blank) == seq);
  }
}

TEST_CASE("single-frame single-path loss") {
  FramePosterior post;
  post.p.resize(1, 2);
  post.p << 0.7, 0.3;  // P(a)=0.7, P(blank)=0.3
  CHECK(ctc_loss(post, {0}).loss == doctest::Approx(-std::log(0.7)).epsilon(1e-12));
}

TEST_CASE("uniform two-frame example enumerates three paths") {
  // classes {a}, blank; T=2; target (a): paths (a,a), (a,-), (-,a)
  FramePosterior post = uniform_posterior(2, 2);
  const double expected = -std::log(3.0 * 0.25);
  CHECK(ctc_loss_bruteforce(post, {0}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ctc_loss(post, {0}).loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("impossible targets") {
  FramePosterior post = uniform_posterior(2, 3);
  CHECK_THROWS_AS(ctc_loss(post, {0, 1, 0}), ImpossibleTarget);
  CHECK_THROWS_AS(ctc_loss_bruteforce(post, {0, 1, 0}), ImpossibleTarget);
  // repeats force a blank: (a,a) needs 3 frames
  CHECK_THROWS_AS(ctc_loss(post, {0, 0}), ImpossibleTarget);
  CHECK(ctc_min_frames({0, 0}) == 3);
  CHECK(ctc_min_frames({0, 1}) == 2);
}

TEST_CASE("bruteforce guard") {
  FramePosterior post = uniform_posterior(30, 4);
  CHECK_THROWS_AS(ctc_loss_bruteforce(post, {0}), TooLarge);
}

TEST_CASE("oracle equivalence on 200 random small instances") {
  Rng rng(20260303);
  int done = 0;
  while (done < 200) {
    const int classes = 1 + static_cast<int>(rng.uniform() * 3.0);
    const Index T = 1 + static_cast<Index>(rng.uniform() * 6.0);
    FramePosterior post = random_posterior(rng, T, classes + 1);
    LabelSequence target;
    const int len = 1 + static_cast<int>(rng.uniform() * 3.0);
    for (int i = 0; i < len; ++i) target.push_back(static_cast<int>(rng.uniform() * classes));
    if (ctc_min_frames(target) > T) continue;
    ++done;
    CHECK(std::abs(ctc_loss(post, target).loss - ctc_loss_bruteforce(post, target)) <= 1e-10);
  }
}

TEST_CASE("completeness: probabilities of all collapses sum to one") {
  // Sum of exp(-loss) over every possible target (including empty) must be 1.
  Rng rng(11);
  const int classes = 2;
  const Index T = 3;
  FramePosterior post = random_posterior(rng, T, classes + 1);

  double total = 0.0;
  // all targets of length 0..T over {0,1} that fit in T frames
  std::vector<LabelSequence> targets{{}};
  for (int len = 1; len <= T; ++len) {
    std::vector<LabelSequence> next;
    for (int a = 0; a < classes; ++a)
      for (const LabelSequence& t : targets)
        if (static_cast<int>(t.size()) == len - 1) {
          LabelSequence ext = t;
          ext.push_back(a);
          next.push_back(ext);
        }
    targets.insert(targets.end(), next.begin(), next.end());
  }
  for (const LabelSequence& t : targets) {
    if (ctc_min_frames(t) > T) continue;
    total += std::exp(-ctc_loss_bruteforce(post, t));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("monotonicity: boosting target symbols never increases the loss") {
  Rng rng(13);
  for (int inst = 0; inst < 20; ++inst) {
    FramePosterior post = random_posterior(rng, 4, 3);
    const LabelSequence target{0};
    const double base = ctc_loss(post, target).loss;

    FramePosterior boosted = post;
    for (Index t = 0; t < 4; ++t) {
      boosted.p(t, 0) += 0.2;
      boosted.p.row(t) /= boosted.p.row(t).sum();
    }
    CHECK(ctc_loss(boosted, target).loss <= base + 1e-12);
  }
}

TEST_CASE("log-space stability at 1e-30 posteriors over 50 frames") {
  // One symbol with probability 1e-30 per frame; target (a). Closed form:
  // P = sum_{m=1..T} (T-m+1) q^(T-m) p^m, dominated by the m=1 term.
  const Index T = 50;
  const double p = 1e-30, q = 1.0 - p;
  FramePosterior post;
  post.p.resize(T, 2);
  for (Index t = 0; t < T; ++t) {
    post.p(t, 0) = p;
    post.p(t, 1) = q;
  }
  long double exact = 0.0L;
  for (Index m = 1; m <= T; ++m)
    exact += static_cast<long double>(T - m + 1) * std::pow(static_cast<long double>(q), T - m) *
             std::pow(static_cast<long double>(p), m);
  const double expected = -static_cast<double>(std::log(exact));
  const double got = ctc_loss(post, {0}).loss;
  CHECK(std::isfinite(got));
  CHECK(std::abs(got - expected) / std::abs(expected) <= 1e-6);
}

TEST_CASE("ctc gradient passes finite differences through the tape") {
  Rng rng(17);
  const LabelSequence target{0, 1, 0};
  double worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    RealTensor logits = RealTensor::zeros({6, 3});
    for (Index i = 0; i < logits.size(); ++i) logits.data[i] = rng.uniform(-2.0, 2.0);
    worst = std::max(
        worst,
        grad_check([&target](Tape& t, const std::vector<Var>& v) { return t.ctc(v[0], target); },
                   {logits}, 1e-5));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("best path decoding") {
  FramePosterior post;
  post.p.resize(4, 3);  // classes a,b + blank
  post.p << 0.8, 0.1, 0.1,  // a
      0.8, 0.1, 0.1,        // a
      0.1, 0.1, 0.8,        // blank
      0.1, 0.8, 0.1;        // b
  CHECK(best_path_decode(post) == LabelSequence{0, 1});

  FramePosterior blanks = uniform_posterior(3, 3);
  blanks.p.col(2).setConstant(0.9);
  blanks.p.col(0).setConstant(0.05);
  blanks.p.col(1).setConstant(0.05);
  CHECK(best_path_decode(blanks).empty());

  // ties break to the lowest class id
  FramePosterior tie;
  tie.p.resize(1, 3);
  tie.p << 0.4, 0.4, 0.2;
  CHECK(best_path_decode(tie) == LabelSequence{0});

  // random posteriors match an independent recomputation
  Rng rng(19);
  for (int inst = 0; inst < 30; ++inst) {
    FramePosterior post2 = random_posterior(rng, 5, 4);
    std::vector<int> arg;
    for (Index t = 0; t < 5; ++t) {
      int best = 0;
      for (Index k = 1; k < 4; ++k)
        if (post2.p(t, k) > post2.p(t, best)) best = static_cast<int>(k);
      arg.push_back(best);
    }
    CHECK(best_path_decode(post2) == collapse(arg, 3));
  }
}
