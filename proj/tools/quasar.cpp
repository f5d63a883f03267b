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

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "quasar/config.hpp"
#include "quasar/features.hpp"
#include "quasar/selftest.hpp"
#include "quasar/toyset.hpp"
#include "quasar/trainer.hpp"

namespace {

using namespace quasar;

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int run_features(const std::string& in, const std::string& out, Index bands, bool do_std) {
  EnergyMatrix m;
  if (has_suffix(in, ".wav")) {
    double rate = 0.0;
    std::vector<double> audio = read_wav_mono(in, &rate);
    m = logmel_extract(audio, rate, bands);
  } else {
    m = load_features(in);
  }
  if (do_std) m = standardize(m);
  save_features(m, out);
  std::cout << "wrote " << out << " (" << m.bands() << " bands x " << m.frames()
            << " frames)\n";
  return 0;
}

int run_train(const std::string& config_path, const std::string& train_dir,
              const std::string& dev_dir, const std::string& out_dir, const std::string& resume,
              int threads, std::optional<uint64_t> seed) {
  ModelConfig cfg = load_config(config_path);
  Dataset train_set = load_dataset(train_dir);
  Dataset dev_set = load_dataset(dev_dir.empty() ? train_dir : dev_dir);

  TrainOptions opts;
  opts.out_dir = out_dir;
  opts.resume = resume;
  opts.threads = threads;
  opts.quiet = false;
  opts.seed_override = seed;
  TrainResult result = train(cfg, train_set, dev_set, opts);
  std::cout << "best checkpoint: " << result.best_checkpoint << "\n"
            << "last checkpoint: " << result.last_checkpoint << "\n"
            << "metrics log:     " << out_dir << "/metrics.log\n";
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& data_dir, int threads) {
  Dataset data = load_dataset(data_dir);
  EvalReport report = evaluate_checkpoint(ckpt, data, threads);
  std::cout << report.to_json();
  return 0;
}

int run_params(const std::string& config_path) {
  ModelConfig cfg = load_config(config_path);
  std::vector<LayerCount> table = param_table(cfg);
  long long weights = 0, other = 0;
  std::printf("%-14s %14s %10s %14s\n", "layer", "weights", "other", "total");
  for (const LayerCount& row : table) {
    std::printf("%-14s %14lld %10lld %14lld\n", row.name.c_str(), row.weights, row.other,
                row.total());
    weights += row.weights;
    other += row.other;
  }
  std::printf("%-14s %14lld %10lld %14lld\n", "total", weights, other, weights + other);
  return 0;
}

int run_selftest() {
  bool all = true;
  for (const SuiteResult& r : run_selftests()) {
    std::printf("[%s] %-10s %s (%.2f s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str(), r.seconds);
    all = all && r.passed;
  }
  if (!all) throw NumericError("selftest failed");
  return 0;
}

int run_make_toy(const std::string& task, const std::string& out_dir, uint64_t seed,
                 Index count) {
  Dataset ds;
  if (task == "ctc")
    ds = make_ctc_toy(seed, count);
  else if (task == "framewise")
    ds = make_framewise_toy(seed, count);
  else
    throw DataError("unknown toy task '" + task + "' (expected ctc|framewise)");
  write_dataset(out_dir, ds);
  std::cout << "wrote " << ds.utts.size() << " utterances to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasar - quaternion neural networks for speech"};
  app.require_subcommand(1);
  app.fallthrough(true);  // global flags may follow the subcommand

  uint64_t seed = 0;
  int threads = 1;
  std::string global_config;
  auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--threads", threads, "evaluation worker count")->check(CLI::PositiveNumber);
  app.add_option("--config", global_config, "model configuration (for train/params)");

  auto* feat = app.add_subcommand("features", "convert WAV audio or CSV matrices to QACF1");
  std::string feat_in, feat_out;
  Index bands = 40;
  bool do_std = false;
  feat->add_option("--in", feat_in, "input .wav/.csv/.qacf file")->required();
  feat->add_option("--out", feat_out, "output feature file")->required();
  feat->add_option("--bands", bands, "mel bands for audio input");
  feat->add_flag("--standardize", do_std, "per-utterance band standardization");

  auto* tr = app.add_subcommand("train", "train a model on a dataset directory");
  std::string config_path, train_dir, dev_dir, out_dir, resume;
  tr->add_option("--config", config_path, "model configuration");
  tr->add_option("--train", train_dir, "training dataset directory")->required();
  tr->add_option("--dev", dev_dir, "validation dataset directory (defaults to --train)");
  tr->add_option("--out", out_dir, "output directory for checkpoints and metrics")->required();
  tr->add_option("--resume", resume, "checkpoint to continue from");

  auto* ev = app.add_subcommand("eval", "decode a dataset and report error rates");
  std::string ckpt, data_dir;
  ev->add_option("--ckpt", ckpt, "checkpoint file")->required();
  ev->add_option("--data", data_dir, "dataset directory")->required();

  auto* pr = app.add_subcommand("params", "print the per-layer parameter table");
  std::string params_config;
  pr->add_option("--config", params_config, "model configuration");

  app.add_subcommand("selftest", "run the algebra, gradient and CTC oracle suites");

  auto* toy = app.add_subcommand("make-toy", "write a bundled synthetic dataset");
  std::string toy_task = "ctc", toy_out;
  uint64_t toy_seed = 1;
  Index toy_count = 120;
  toy->add_option("--task", toy_task, "ctc|framewise");
  toy->add_option("--out", toy_out, "output directory")->required();
  toy->add_option("--toy-seed", toy_seed, "generator seed");
  toy->add_option("--count", toy_count, "number of utterances");

  try {
    app.parse(argc, argv);
    std::optional<uint64_t> seed_override;
    if (seed_opt->count() > 0) seed_override = seed;
    auto need_config = [&](const std::string& own, const CLI::App* sub) {
      if (!own.empty()) return own;
      if (!global_config.empty()) return global_config;
      std::cerr << "error: a --config path is required\n" << sub->help();
      std::exit(1);
    };

    if (app.got_subcommand(feat)) return run_features(feat_in, feat_out, bands, do_std);
    if (app.got_subcommand(tr))
      return run_train(need_config(config_path, tr), train_dir, dev_dir, out_dir, resume,
                       threads, seed_override);
    if (app.got_subcommand(ev)) return run_eval(ckpt, data_dir, threads);
    if (app.got_subcommand(pr)) return run_params(need_config(params_config, pr));
    if (app.got_subcommand("selftest")) return run_selftest();
    if (app.got_subcommand(toy)) return run_make_toy(toy_task, toy_out, toy_seed, toy_count);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const quasar::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const quasar::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
