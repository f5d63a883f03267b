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

#include "quasar/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "quasar/ctc.hpp"
#include "quasar/optim.hpp"

namespace quasar {

namespace fs = std::filesystem;

namespace {

std::string format_line(Index epoch, double train_loss, double dev_loss, double dev_per,
                        double lr) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "epoch=%lld train_loss=%.17g dev_loss=%.17g dev_per=%.17g lr=%.17g",
                static_cast<long long>(epoch), train_loss, dev_loss, dev_per, lr);
  return buf;
}

// Loss over one forwarded batch. For CTC each utterance's valid frame rows
// feed one ctc node; for framewise heads padded rows carry label -1.
Var batch_loss(Tape& t, const ModelConfig& cfg, const ModelLogits& ml, const BatchInput& batch,
               const std::vector<const std::vector<int>*>& labels) {
  const Index B = ml.batch, T = ml.frames;
  const Index cols = head_columns(cfg);
  if (cfg.head == HeadKind::CTC) {
    Var total;
    for (Index b = 0; b < B; ++b) {
      const Index len = batch.lengths[static_cast<size_t>(b)];
      Var rows;
      if (!ml.step_major) {
        rows = t.slice_rows(ml.logits, b * T, len);
      } else {
        auto idx = std::make_shared<std::vector<Index>>(static_cast<size_t>(len * cols));
        size_t n = 0;
        for (Index tt = 0; tt < len; ++tt)
          for (Index c = 0; c < cols; ++c) (*idx)[n++] = (tt * B + b) * cols + c;
        rows = t.gather(ml.logits, idx, {len, cols});
      }
      Var utt = t.ctc(rows, *labels[static_cast<size_t>(b)]);
      total = total.valid() ? t.add(total, utt) : utt;
    }
    return t.scale(total, 1.0 / static_cast<double>(B));
  }
  std::vector<int> frame_labels(static_cast<size_t>(B * T), -1);
  for (Index b = 0; b < B; ++b) {
    const auto& lab = *labels[static_cast<size_t>(b)];
    for (Index tt = 0; tt < batch.lengths[static_cast<size_t>(b)]; ++tt)
      frame_labels[static_cast<size_t>(ml.row_of(b, tt))] = lab[static_cast<size_t>(tt)];
  }
  return t.cross_entropy(ml.logits, std::move(frame_labels));
}

struct UttScore {
  double loss = 0.0;
  LabelSequence decoded;
  EditStats edits;
  long long frame_errors = 0;
  long long frames = 0;
};

// Forward one utterance without dropout and score it against its labels.
UttScore score_utterance(const Model& model, const ModelConfig& cfg, const Utterance& u) {
  Tape t;
  LeafRegistry reg(t);
  Rng no_dropout(0);
  BatchInput batch = make_batch({&u.feats});
  ModelLogits ml = model.forward(reg, batch, false, no_dropout);

  UttScore s;
  s.frames = u.frames();
  const RealTensor& logits = t.val(ml.logits);
  if (cfg.head == HeadKind::CTC) {
    FramePosterior post;
    post.p = softmax_rows(logits);
    CtcResult res = ctc_loss(post, u.labels);
    s.loss = res.loss;
    s.decoded = best_path_decode(post);
    s.edits = edit_distance(u.labels, s.decoded);
  } else {
    const Index cols = logits.dim(1);
    double loss = 0.0;
    for (Index tt = 0; tt < u.frames(); ++tt) {
      auto row = logits.data.segment(tt * cols, cols);
      const double mx = row.maxCoeff();
      const double denom = std::log((row - mx).exp().sum()) + mx;
      loss += denom - row[u.labels[static_cast<size_t>(tt)]];
      int best = 0;
      for (Index c = 1; c < cols; ++c)
        if (row[c] > row[best]) best = static_cast<int>(c);
      s.decoded.push_back(best);
      if (best != u.labels[static_cast<size_t>(tt)]) ++s.frame_errors;
    }
    s.loss = loss / static_cast<double>(u.frames());
    s.edits = edit_distance(u.labels, s.decoded);
  }
  return s;
}

std::vector<UttScore> score_dataset(const Model& model, const ModelConfig& cfg, const Dataset& ds,
                                    int threads) {
  std::vector<UttScore> scores(ds.utts.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(ds.utts.size())));
  if (workers == 1) {
    for (size_t i = 0; i < ds.utts.size(); ++i)
      scores[i] = score_utterance(model, cfg, ds.utts[i]);
    return scores;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < ds.utts.size(); i = next.fetch_add(1))
        scores[i] = score_utterance(model, cfg, ds.utts[i]);
    });
  for (auto& th : pool) th.join();
  return scores;
}

void check_labels(const ModelConfig& cfg, const Utterance& u, const std::string& which) {
  if (cfg.head == HeadKind::CTC) {
    if (u.labels.empty())
      throw DataError(which + ": utterance " + u.id + " has an empty target");
    for (int v : u.labels)
      if (v < 0 || v >= cfg.classes)
        throw DataError(which + ": utterance " + u.id + " target symbol out of range");
    if (ctc_min_frames(u.labels) > u.frames())
      throw ImpossibleTarget(which + ": utterance " + u.id + " target cannot fit in " +
                             std::to_string(u.frames()) + " frames");
  } else {
    if (static_cast<Index>(u.labels.size()) != u.frames())
      throw DimensionMismatch(which + ": utterance " + u.id + " needs one label per frame");
    for (int v : u.labels)
      if (v < 0 || v >= cfg.classes)
        throw DataError(which + ": utterance " + u.id + " frame label out of range");
  }
}

}  // namespace

void validate_dataset(const ModelConfig& cfg, const Dataset& ds, const std::string& which) {
  if (ds.utts.empty()) throw EmptyDataset();
  if (ds.bands != cfg.input_bands)
    throw DimensionMismatch(which + ": dataset has " + std::to_string(ds.bands) +
                            " bands, config expects " + std::to_string(cfg.input_bands));
  for (const Utterance& u : ds.utts) check_labels(cfg, u, which);
}

TrainResult train(const ModelConfig& cfg_in, const Dataset& train_set, const Dataset& dev_set,
                  const TrainOptions& opts) {
  ModelConfig cfg = cfg_in;
  if (opts.seed_override) cfg.seed = *opts.seed_override;
  validate(cfg);
  validate_dataset(cfg, train_set, "train");
  validate_dataset(cfg, dev_set, "dev");

  Model model = Model::build(cfg);
  if (!opts.resume.empty()) load_checkpoint_into(opts.resume, model);
  std::vector<ParamRef> params = model.params();

  RmsProp optimizer(cfg.train.lr, cfg.train.rho, cfg.train.eps, cfg.l2);
  TrainSchedule schedule{cfg.train.lr, cfg.train.halving, cfg.train.patience};

  if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);
  const std::string best_path =
      opts.out_dir.empty() ? "" : (fs::path(opts.out_dir) / "best.ckpt").string();
  const std::string last_path =
      opts.out_dir.empty() ? "" : (fs::path(opts.out_dir) / "last.ckpt").string();

  // Length-bucketed batches: sorting keeps padding small, the per-epoch
  // shuffle only permutes whole batches so runs stay reproducible.
  std::vector<size_t> order(train_set.utts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return train_set.utts[a].frames() < train_set.utts[b].frames();
  });
  std::vector<std::vector<size_t>> batches;
  for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.train.batch)) {
    std::vector<size_t> ids(order.begin() + static_cast<long>(at),
                            order.begin() +
                                static_cast<long>(std::min(order.size(),
                                                           at + static_cast<size_t>(cfg.train.batch))));
    batches.push_back(std::move(ids));
  }

  TrainResult result;
  double best_dev = std::numeric_limits<double>::infinity();
  const long long total_utts = static_cast<long long>(train_set.utts.size());

  for (Index epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    // Fisher-Yates over batch order, seeded per epoch.
    std::vector<size_t> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    Rng shuffle_rng = Rng(cfg.seed).fork(0x5u * 1000003ull + static_cast<uint64_t>(epoch));
    for (size_t i = batch_order.size(); i > 1; --i)
      std::swap(batch_order[i - 1],
                batch_order[static_cast<size_t>(shuffle_rng.uniform() * static_cast<double>(i))]);

    const double lr_used = schedule.lr;
    optimizer.set_lr(lr_used);
    double loss_sum = 0.0;

    for (size_t bo = 0; bo < batch_order.size(); ++bo) {
      const std::vector<size_t>& ids = batches[batch_order[bo]];
      std::vector<const QuaternionTensor*> feats;
      std::vector<const std::vector<int>*> labels;
      for (size_t id : ids) {
        feats.push_back(&train_set.utts[id].feats);
        labels.push_back(&train_set.utts[id].labels);
      }
      BatchInput batch = make_batch(feats);

      Tape t;
      LeafRegistry reg(t);
      Rng dropout_rng =
          Rng(cfg.seed).fork((static_cast<uint64_t>(epoch) << 24) ^ (bo + 17));
      ModelLogits ml = model.forward(reg, batch, true, dropout_rng);
      Var loss = batch_loss(t, cfg, ml, batch, labels);
      const double loss_value = t.val(loss).data[0];
      if (!std::isfinite(loss_value))
        throw NonFiniteLoss("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(bo));
      loss_sum += loss_value * static_cast<double>(ids.size());

      Gradients grads = t.backward(loss);
      // Route tape gradients back to parameter storage; a parameter bound
      // more than once gets the sum of its slots.
      std::unordered_map<const RealTensor*, RealTensor> by_param;
      for (const auto& [ptr, var] : reg.bound) {
        if (!grads.reached(var.id)) continue;
        auto it = by_param.find(ptr);
        if (it == by_param.end())
          by_param.emplace(ptr, grads[var.id]);
        else
          it->second.data += grads[var.id].data;
      }
      std::vector<const RealTensor*> grad_ptrs(params.size(), nullptr);
      for (size_t i = 0; i < params.size(); ++i) {
        auto it = by_param.find(params[i].tensor);
        if (it != by_param.end()) grad_ptrs[i] = &it->second;
      }
      optimizer.step(params, grad_ptrs);
    }
    const double train_loss = loss_sum / static_cast<double>(total_utts);

    // Dev pass: per-utterance loss and decoding share one forward each.
    std::vector<UttScore> dev_scores = score_dataset(model, cfg, dev_set, 1);
    double dev_loss = 0.0;
    EditStats dev_edits;
    long long frame_errors = 0, frames = 0;
    for (const UttScore& s : dev_scores) {
      dev_loss += s.loss;
      dev_edits += s.edits;
      frame_errors += s.frame_errors;
      frames += s.frames;
    }
    dev_loss /= static_cast<double>(dev_scores.size());
    const double dev_per = cfg.head == HeadKind::CTC
                               ? dev_edits.per()
                               : 100.0 * static_cast<double>(frame_errors) /
                                     static_cast<double>(frames > 0 ? frames : 1);

    result.metric_lines.push_back(format_line(epoch, train_loss, dev_loss, dev_per, lr_used));
    if (!opts.quiet) std::cerr << result.metric_lines.back() << "\n";
    if (epoch == 1) result.first_train_loss = train_loss;
    result.final_train_loss = train_loss;

    if (dev_loss < best_dev) {
      best_dev = dev_loss;
      if (!best_path.empty()) {
        CheckpointMeta meta{static_cast<int>(epoch), result.metric_lines};
        save_checkpoint(best_path, model, meta);
      }
    }
    schedule.observe(dev_loss);
  }

  result.best_dev_loss = best_dev;
  result.best_checkpoint = best_path;
  result.last_checkpoint = last_path;
  if (!last_path.empty()) {
    CheckpointMeta meta{static_cast<int>(cfg.train.epochs), result.metric_lines};
    save_checkpoint(last_path, model, meta);
  }
  if (!opts.out_dir.empty()) {
    std::ofstream log(fs::path(opts.out_dir) / "metrics.log");
    for (const std::string& line : result.metric_lines) log << line << "\n";
  }
  return result;
}

EvalReport evaluate(Model& model, const Dataset& data, int threads) {
  const ModelConfig& cfg = model.config();
  validate_dataset(cfg, data, "eval");
  std::vector<UttScore> scores = score_dataset(model, cfg, data, threads);

  EvalReport report;
  long long frame_errors = 0, frames = 0;
  for (size_t i = 0; i < data.utts.size(); ++i) {
    report.utt_ids.push_back(data.utts[i].id);
    report.decoded.push_back(scores[i].decoded);
    report.edits += scores[i].edits;
    frame_errors += scores[i].frame_errors;
    frames += scores[i].frames;
  }
  report.per = report.edits.per();
  if (cfg.head == HeadKind::Framewise)
    report.frame_accuracy =
        1.0 - static_cast<double>(frame_errors) / static_cast<double>(frames > 0 ? frames : 1);
  report.param_count = model.param_count_actual();
  return report;
}

EvalReport evaluate_checkpoint(const std::string& path, const Dataset& data, int threads) {
  CheckpointMeta meta;
  Model model = load_checkpoint(path, &meta);
  EvalReport report = evaluate(model, data, threads);
  report.history = meta.history;
  return report;
}

}  // namespace quasar
