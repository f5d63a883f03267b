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

#include "quasar/ctc.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace quasar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_target(const LabelSequence& target, int classes) {
  for (int s : target)
    if (s < 0 || s >= classes)
      throw ShapeMismatch("ctc target symbol " + std::to_string(s) + " out of range [0, " +
                          std::to_string(classes) + ")");
}

}  // namespace

LabelSequence collapse(const std::vector<int>& path, int blank) {
  LabelSequence out;
  bool have_prev = false;
  int prev = 0;
  for (int s : path) {
    if (!have_prev || s != prev) {
      if (s != blank) out.push_back(s);
      prev = s;
      have_prev = true;
    }
  }
  return out;
}

Index ctc_min_frames(const LabelSequence& target) {
  Index frames = static_cast<Index>(target.size());
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++frames;
  return frames;
}

CtcResult ctc_loss(const FramePosterior& post, const LabelSequence& target) {
  const Index T = post.frames();
  const Index cols = post.columns();
  const int blank = post.blank();
  check_target(target, blank);
  if (ctc_min_frames(target) > T)
    throw ImpossibleTarget("target of length " + std::to_string(target.size()) +
                           " cannot fit in " + std::to_string(T) + " frames");

  // Blank-augmented label sequence: blank between and around every symbol.
  const Index S = 2 * static_cast<Index>(target.size()) + 1;
  auto aug = [&](Index s) -> int {
    return (s % 2 == 0) ? blank : target[static_cast<size_t>(s / 2)];
  };

  Eigen::MatrixXd logy(T, cols);
  for (Index t = 0; t < T; ++t)
    for (Index k = 0; k < cols; ++k) logy(t, k) = std::log(post.p(t, k));

  // Forward variables include the emission at their own frame.
  Eigen::MatrixXd la = Eigen::MatrixXd::Constant(T, S, kNegInf);
  la(0, 0) = logy(0, blank);
  if (S > 1) la(0, 1) = logy(0, aug(1));
  for (Index t = 1; t < T; ++t) {
    for (Index s = 0; s < S; ++s) {
      double acc = la(t - 1, s);
      if (s >= 1) acc = logsumexp2(acc, la(t - 1, s - 1));
      if (s >= 2 && aug(s) != blank && aug(s) != aug(s - 2))
        acc = logsumexp2(acc, la(t - 1, s - 2));
      la(t, s) = acc + logy(t, aug(s));
    }
  }
  double logp = la(T - 1, S - 1);
  if (S > 1) logp = logsumexp2(logp, la(T - 1, S - 2));
  if (!std::isfinite(logp))
    throw ImpossibleTarget("target has zero probability under the given posteriors");

  // Backward variables cover emissions strictly after their frame.
  Eigen::MatrixXd lb = Eigen::MatrixXd::Constant(T, S, kNegInf);
  lb(T - 1, S - 1) = 0.0;
  if (S > 1) lb(T - 1, S - 2) = 0.0;
  for (Index t = T - 2; t >= 0; --t) {
    for (Index s = 0; s < S; ++s) {
      double acc = lb(t + 1, s) + logy(t + 1, aug(s));
      if (s + 1 < S) acc = logsumexp2(acc, lb(t + 1, s + 1) + logy(t + 1, aug(s + 1)));
      if (s + 2 < S && aug(s + 2) != blank && aug(s + 2) != aug(s))
        acc = logsumexp2(acc, lb(t + 1, s + 2) + logy(t + 1, aug(s + 2)));
      lb(t, s) = acc;
    }
  }

  // d(-logp)/d(logit[t,k]) = y[t,k] - exp(log sum_{s: aug(s)=k} alpha beta - logp).
  CtcResult res;
  res.loss = -logp;
  res.grad_logits.resize(T, cols);
  for (Index t = 0; t < T; ++t) {
    Eigen::VectorXd occ = Eigen::VectorXd::Constant(cols, kNegInf);
    for (Index s = 0; s < S; ++s) {
      const int k = aug(s);
      occ[k] = logsumexp2(occ[k], la(t, s) + lb(t, s));
    }
    for (Index k = 0; k < cols; ++k) {
      const double soft = occ[k] == kNegInf ? 0.0 : std::exp(occ[k] - logp);
      res.grad_logits(t, k) = post.p(t, k) - soft;
    }
  }
  return res;
}

double ctc_loss_bruteforce(const FramePosterior& post, const LabelSequence& target) {
  const Index T = post.frames();
  const Index cols = post.columns();
  check_target(target, post.blank());
  if (ctc_min_frames(target) > T)
    throw ImpossibleTarget("target of length " + std::to_string(target.size()) +
                           " cannot fit in " + std::to_string(T) + " frames");

  double paths = std::pow(static_cast<double>(cols), static_cast<double>(T));
  if (paths > 1e7) throw TooLarge("path enumeration bound exceeded");

  std::vector<int> path(static_cast<size_t>(T), 0);
  double total = 0.0;
  for (;;) {
    if (collapse(path, post.blank()) == target) {
      double prob = 1.0;
      for (Index t = 0; t < T; ++t) prob *= post.p(t, path[static_cast<size_t>(t)]);
      total += prob;
    }
    // next path in base-`cols` counting order
    Index pos = T - 1;
    while (pos >= 0) {
      if (++path[static_cast<size_t>(pos)] < cols) break;
      path[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return -std::log(total);
}

LabelSequence best_path_decode(const FramePosterior& post) {
  std::vector<int> arg(static_cast<size_t>(post.frames()));
  for (Index t = 0; t < post.frames(); ++t) {
    int best = 0;
    for (Index k = 1; k < post.columns(); ++k)
      if (post.p(t, k) > post.p(t, best)) best = static_cast<int>(k);
    arg[static_cast<size_t>(t)] = best;
  }
  return collapse(arg, post.blank());
}

}  // namespace quasar
