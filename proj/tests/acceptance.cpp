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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "quasar/checkpoint.hpp"
#include "quasar/features.hpp"
#include "quasar/rng.hpp"
#include "quasar/selftest.hpp"
#include "quasar/toyset.hpp"
#include "quasar/trainer.hpp"

using namespace quasar;

namespace {

namespace fs = std::filesystem;

int g_failures = 0;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] criterion %d: %-14s %s (%.2f s)\n", pass ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<bool(std::string&)>& body) {
  const double t0 = now_seconds();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed = now_seconds() - t0;
  if (elapsed > budget_seconds) {
    pass = false;
    detail += " [over the " + std::to_string(budget_seconds) + " s budget]";
  }
  report(number, name, pass, detail, elapsed);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string configs_dir() { return std::string(QUASAR_SOURCE_DIR) + "/configs"; }

long long row_weights(const std::vector<LayerCount>& table, const std::string& name) {
  for (const LayerCount& row : table)
    if (row.name == name) return row.weights;
  return -1;
}

struct ToyRuns {
  TrainResult ctc_first, fw_first;
  fs::path root, ctc_dir, fw_dir;
  ModelConfig ctc_cfg, fw_cfg;
  Dataset ctc_train, fw_train;
};

}  // namespace

int main() {
  const fs::path tmp = fs::temp_directory_path() / "quasar_acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  // 1. algebra
  run_criterion(1, "algebra", 1.0, [](std::string& detail) {
    SuiteResult r = algebra_suite();
    detail = r.detail;
    return r.passed;
  });

  // 2. gradients
  run_criterion(2, "gradients", 120.0, [](std::string& detail) {
    SuiteResult r = gradient_suite();
    detail = r.detail;
    return r.passed;
  });

  // 3. CTC oracle
  run_criterion(3, "ctc-oracle", 30.0, [](std::string& detail) {
    SuiteResult r = ctc_suite();
    detail = r.detail;
    return r.passed;
  });

  // 4. parameter claims
  run_criterion(4, "parameters", 1.0, [](std::string& detail) {
    const ModelConfig qcnn = load_config(configs_dir() + "/qcnn_timit.json");
    const ModelConfig cnn = load_config(configs_dir() + "/cnn_timit.json");
    const ModelConfig qrnn = load_config(configs_dir() + "/qrnn_timit.json");
    const ModelConfig rnn = load_config(configs_dir() + "/rnn_timit.json");

    // dense1 runs 256q x 256q against 1024 x 1024 at equal real width
    const long long qw = row_weights(param_table(qcnn), "dense1");
    const long long rw = row_weights(param_table(cnn), "dense1");
    const bool dense_ok = qw == 262144 && rw == 1048576 &&
                          static_cast<double>(rw) / static_cast<double>(qw) == 4.0;

    const double conv_ratio =
        static_cast<double>(param_total(cnn)) / static_cast<double>(param_total(qcnn));
    const double rnn_ratio =
        static_cast<double>(param_total(rnn)) / static_cast<double>(param_total(qrnn));
    const bool conv_ok = std::abs(conv_ratio - 3.96) / 3.96 <= 0.10;
    const bool rnn_ok = std::abs(rnn_ratio - 2.47) / 2.47 <= 0.10;

    std::ostringstream os;
    os << "dense 262144 vs 1048576 " << (dense_ok ? "exact" : "BROKEN") << ", conv ratio "
       << conv_ratio << " (3.96 +-10%), recurrent ratio " << rnn_ratio << " (2.47 +-10%)";
    detail = os.str();
    return dense_ok && conv_ok && rnn_ok;
  });

  // 5. feature pipeline
  run_criterion(5, "features", 10.0, [](std::string& detail) {
    Rng rng(20260501);
    EnergyMatrix m;
    m.e.resize(40, 60);
    for (Index f = 0; f < 40; ++f)
      for (Index t = 0; t < 60; ++t) m.e(f, t) = rng.uniform(-2.0, 2.0);

    QuaternionTensor q = build_acoustic_quaternions(m);
    const bool dim_ok = q.shape == Shape{60, 40} && qt_to_real(q).shape == Shape{60, 160};

    const EnergyMatrix d1 = compute_deltas(m, 1);
    const EnergyMatrix d2 = compute_deltas(m, 2);
    const EnergyMatrix d3 = compute_deltas(m, 3);
    bool pack_ok = true;
    for (Index t = 0; t < 60 && pack_ok; ++t)
      for (Index f = 0; f < 40; ++f) {
        const Index at = t * 40 + f;
        pack_ok = pack_ok && q.r.data[at] == m.e(f, t) && q.x.data[at] == d1.e(f, t) &&
                  q.y.data[at] == d2.e(f, t) && q.z.data[at] == d3.e(f, t);
      }

    // direct-convolution oracle for the regression filter
    double worst = 0.0;
    for (Index f = 0; f < 40; ++f)
      for (Index t = 0; t < 60; ++t) {
        auto clamp = [](Index i) { return std::max<Index>(0, std::min<Index>(59, i)); };
        const double want = (1.0 * (m.e(f, clamp(t + 1)) - m.e(f, clamp(t - 1))) +
                             2.0 * (m.e(f, clamp(t + 2)) - m.e(f, clamp(t - 2)))) /
                            10.0;
        worst = std::max(worst, std::abs(d1.e(f, t) - want));
      }

    EnergyMatrix flat;
    flat.e = Eigen::MatrixXd::Constant(40, 20, 3.25);
    bool const_ok = true;
    for (int order = 1; order <= 3; ++order)
      const_ok = const_ok && compute_deltas(flat, order).e.cwiseAbs().maxCoeff() == 0.0;

    std::ostringstream os;
    os << "packing " << (pack_ok ? "bit-exact" : "BROKEN") << ", real dim 160 "
       << (dim_ok ? "ok" : "BROKEN") << ", delta oracle " << worst << ", constant deltas "
       << (const_ok ? "zero" : "BROKEN");
    detail = os.str();
    return dim_ok && pack_ok && worst <= 1e-12 && const_ok;
  });

  // 6 + 7 + 8 share the toy runs.
  ToyRuns toys;
  toys.root = tmp;
  toys.ctc_dir = tmp / "ctc";
  toys.fw_dir = tmp / "framewise";

  // 6. toy end-to-end
  run_criterion(6, "toy-end-to-end", 600.0, [&toys](std::string& detail) {
    toys.ctc_cfg = load_config(configs_dir() + "/toy_qcnn_ctc.json");
    toys.fw_cfg = load_config(configs_dir() + "/toy_qrnn_framewise.json");

    // The bundled sets pass through the on-disk format on their way in.
    write_dataset((toys.root / "ctc_data").string(), make_ctc_toy(5, 120));
    write_dataset((toys.root / "fw_data").string(), make_framewise_toy(5, 100));
    toys.ctc_train = load_dataset((toys.root / "ctc_data").string());
    toys.fw_train = load_dataset((toys.root / "fw_data").string());
    const Dataset ctc_dev = make_ctc_toy(6, 40);
    const Dataset fw_dev = make_framewise_toy(6, 30);

    const double t_ctc = now_seconds();
    TrainOptions ctc_opts;
    ctc_opts.out_dir = (toys.ctc_dir / "run1").string();
    toys.ctc_first = train(toys.ctc_cfg, toys.ctc_train, ctc_dev, ctc_opts);
    Model ctc_model = load_checkpoint(toys.ctc_first.best_checkpoint);
    EvalReport ctc_eval = evaluate(ctc_model, toys.ctc_train, 1);
    const double ctc_seconds = now_seconds() - t_ctc;

    const double t_fw = now_seconds();
    TrainOptions fw_opts;
    fw_opts.out_dir = (toys.fw_dir / "run1").string();
    toys.fw_first = train(toys.fw_cfg, toys.fw_train, fw_dev, fw_opts);
    Model fw_model = load_checkpoint(toys.fw_first.best_checkpoint);
    EvalReport fw_eval = evaluate(fw_model, toys.fw_train, 1);
    const double fw_seconds = now_seconds() - t_fw;

    std::ostringstream os;
    os << "qcnn-ctc train PER " << ctc_eval.per << "% in " << toys.ctc_cfg.train.epochs
       << " epochs/" << ctc_seconds << " s; qrnn frame accuracy " << fw_eval.frame_accuracy * 100
       << "% in " << toys.fw_cfg.train.epochs << " epochs/" << fw_seconds << " s";
    detail = os.str();
    return ctc_eval.per < 5.0 && ctc_seconds < 300.0 && fw_eval.frame_accuracy > 0.95 &&
           fw_seconds < 300.0;
  });

  // 7. determinism
  run_criterion(7, "determinism", 600.0, [&toys](std::string& detail) {
    const Dataset ctc_dev = make_ctc_toy(6, 40);
    const Dataset fw_dev = make_framewise_toy(6, 30);

    TrainOptions ctc_opts;
    ctc_opts.out_dir = (toys.ctc_dir / "run2").string();
    train(toys.ctc_cfg, toys.ctc_train, ctc_dev, ctc_opts);
    TrainOptions fw_opts;
    fw_opts.out_dir = (toys.fw_dir / "run2").string();
    train(toys.fw_cfg, toys.fw_train, fw_dev, fw_opts);

    const bool logs_ok =
        slurp(toys.ctc_dir / "run1/metrics.log") == slurp(toys.ctc_dir / "run2/metrics.log") &&
        slurp(toys.fw_dir / "run1/metrics.log") == slurp(toys.fw_dir / "run2/metrics.log");
    const bool ckpts_ok =
        slurp(toys.ctc_dir / "run1/last.ckpt") == slurp(toys.ctc_dir / "run2/last.ckpt");

    Model model = load_checkpoint(toys.ctc_first.best_checkpoint);
    EvalReport one = evaluate(model, toys.ctc_train, 1);
    EvalReport four = evaluate(model, toys.ctc_train, 4);
    const bool threads_ok = one.to_json() == four.to_json();

    std::ostringstream os;
    os << "metrics logs " << (logs_ok ? "bit-identical" : "DIFFER") << ", checkpoints "
       << (ckpts_ok ? "bit-identical" : "DIFFER") << ", eval threads 1 vs 4 "
       << (threads_ok ? "identical" : "DIFFER");
    detail = os.str();
    return logs_ok && ckpts_ok && threads_ok;
  });

  // 8. format round trips
  run_criterion(8, "round-trips", 120.0, [&toys, &tmp](std::string& detail) {
    Rng rng(20260801);
    EnergyMatrix m;
    m.e.resize(40, 100);
    for (Index f = 0; f < 40; ++f)
      for (Index t = 0; t < 100; ++t) m.e(f, t) = rng.uniform(-8.0, 8.0);
    const fs::path feat = tmp / "roundtrip.qacf";
    save_features(m, feat.string());
    EnergyMatrix back = load_features(feat.string());
    const bool feat_ok = (back.e.array() == m.e.array()).all();
    save_features(back, (tmp / "roundtrip2.qacf").string());
    const bool feat_bytes_ok = slurp(feat) == slurp(tmp / "roundtrip2.qacf");

    // checkpoint: load, re-save, compare bytes
    CheckpointMeta meta;
    Model model = load_checkpoint(toys.ctc_first.best_checkpoint, &meta);
    const fs::path resaved = tmp / "resaved.ckpt";
    save_checkpoint(resaved.string(), model, meta);
    const bool ckpt_ok = slurp(toys.ctc_first.best_checkpoint) == slurp(resaved);

    // resume training from the checkpoint, then round-trip the new one
    ModelConfig short_cfg = toys.ctc_cfg;
    short_cfg.train.epochs = 2;
    TrainOptions resume_opts;
    resume_opts.out_dir = (tmp / "resumed").string();
    resume_opts.resume = toys.ctc_first.best_checkpoint;
    TrainResult resumed = train(short_cfg, toys.ctc_train, make_ctc_toy(6, 40), resume_opts);
    CheckpointMeta meta2;
    Model model2 = load_checkpoint(resumed.last_checkpoint, &meta2);
    const fs::path resaved2 = tmp / "resaved2.ckpt";
    save_checkpoint(resaved2.string(), model2, meta2);
    const bool resume_ok = slurp(resumed.last_checkpoint) == slurp(resaved2);

    std::ostringstream os;
    os << "QACF1 " << ((feat_ok && feat_bytes_ok) ? "bit-exact" : "BROKEN") << ", checkpoint "
       << (ckpt_ok ? "bit-exact" : "BROKEN") << ", after resume "
       << (resume_ok ? "bit-exact" : "BROKEN");
    detail = os.str();
    return feat_ok && feat_bytes_ok && ckpt_ok && resume_ok;
  });

  fs::remove_all(tmp);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 8 acceptance criteria passed\n");
  return 0;
}
