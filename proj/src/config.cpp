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

#include "quasar/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "quasar/layers.hpp"

namespace quasar {

using nlohmann::json;

ArchKind arch_from_string(const std::string& s) {
  if (s == "cnn") return ArchKind::CNN;
  if (s == "qcnn") return ArchKind::QCNN;
  if (s == "rnn") return ArchKind::RNN;
  if (s == "qrnn") return ArchKind::QRNN;
  throw InvalidConfig("unknown architecture '" + s + "' (expected cnn|qcnn|rnn|qrnn)");
}

std::string arch_to_string(ArchKind a) {
  switch (a) {
    case ArchKind::CNN: return "cnn";
    case ArchKind::QCNN: return "qcnn";
    case ArchKind::RNN: return "rnn";
    case ArchKind::QRNN: return "qrnn";
  }
  return "qcnn";
}

bool arch_is_quaternion(ArchKind a) { return a == ArchKind::QCNN || a == ArchKind::QRNN; }
bool arch_is_conv(ArchKind a) { return a == ArchKind::CNN || a == ArchKind::QCNN; }

HeadKind head_from_string(const std::string& s) {
  if (s == "ctc") return HeadKind::CTC;
  if (s == "framewise") return HeadKind::Framewise;
  throw InvalidConfig("unknown head '" + s + "' (expected ctc|framewise)");
}

std::string head_to_string(HeadKind h) {
  return h == HeadKind::CTC ? "ctc" : "framewise";
}

namespace {

void check_known_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw InvalidConfig("unknown key '" + it.key() + "' in " + where);
}

Index get_index(const json& j, const char* key, Index fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<Index>();
}

}  // namespace

void validate(const ModelConfig& cfg) {
  act_from_string(cfg.activation);  // throws on unknown names
  if (cfg.classes < 1) throw InvalidConfig("classes must be >= 1");
  if (cfg.head == HeadKind::Framewise && cfg.classes < 2)
    throw InvalidConfig("framewise head requires classes >= 2");
  if (cfg.input_bands < 1) throw InvalidConfig("input_bands must be >= 1");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw InvalidConfig("dropout must lie in [0, 1)");
  if (cfg.l2 < 0.0) throw InvalidConfig("l2 must be >= 0");
  if (cfg.train.epochs < 1) throw InvalidConfig("train.epochs must be >= 1");
  if (cfg.train.lr <= 0.0) throw InvalidConfig("train.lr must be > 0");
  if (cfg.train.batch < 1) throw InvalidConfig("train.batch must be >= 1");
  if (cfg.train.patience < 1) throw InvalidConfig("train.patience must be >= 1");
  if (cfg.train.halving <= 0.0 || cfg.train.halving >= 1.0)
    throw InvalidConfig("train.halving must lie in (0, 1)");

  const bool quat = arch_is_quaternion(cfg.arch);
  auto check_width = [&](Index w, const std::string& what) {
    if (w < 1) throw InvalidConfig(what + " must be >= 1");
    if (quat && w % 4 != 0)
      throw InvalidConfig(what + " = " + std::to_string(w) +
                          " is not divisible by 4 (required for quaternion architectures)");
  };

  if (arch_is_conv(cfg.arch)) {
    check_width(cfg.conv.first_maps, "conv.first_maps");
    if (cfg.conv.maps.empty()) throw InvalidConfig("conv.maps must name at least one layer");
    for (Index m : cfg.conv.maps) check_width(m, "conv.maps entry");
    if (cfg.conv.kernel_h < 1 || cfg.conv.kernel_w < 1)
      throw InvalidConfig("conv.kernel extents must be >= 1");
    if (cfg.conv.pool < 1) throw InvalidConfig("conv.pool must be >= 1");
    if (cfg.dense.empty()) throw InvalidConfig("dense widths required for conv architectures");
    for (Index d : cfg.dense) check_width(d, "dense width");
  } else {
    if (cfg.recurrent.layers < 1) throw InvalidConfig("recurrent.layers must be >= 1");
    check_width(cfg.recurrent.hidden, "recurrent.hidden");
  }
}

ModelConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_known_keys(j, {"arch", "head", "classes", "input_bands", "activation", "dropout", "l2",
                         "seed", "dense", "conv", "recurrent", "train"},
                     "config");
    ModelConfig cfg;
    cfg.arch = arch_from_string(j.at("arch").get<std::string>());
    cfg.head = head_from_string(j.value("head", std::string("ctc")));
    cfg.classes = j.at("classes").get<Index>();
    cfg.input_bands = get_index(j, "input_bands", cfg.input_bands);
    cfg.activation = j.value("activation", cfg.activation);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.l2 = j.value("l2", cfg.l2);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("dense")) cfg.dense = j.at("dense").get<std::vector<Index>>();
    if (j.contains("conv")) {
      const json& c = j.at("conv");
      check_known_keys(c, {"first_maps", "maps", "kernel", "pool"}, "conv");
      cfg.conv.first_maps = get_index(c, "first_maps", cfg.conv.first_maps);
      if (c.contains("maps")) cfg.conv.maps = c.at("maps").get<std::vector<Index>>();
      if (c.contains("kernel")) {
        auto k = c.at("kernel").get<std::vector<Index>>();
        if (k.size() != 2) throw InvalidConfig("conv.kernel must be [height, width]");
        cfg.conv.kernel_h = k[0];
        cfg.conv.kernel_w = k[1];
      }
      cfg.conv.pool = get_index(c, "pool", cfg.conv.pool);
    }
    if (j.contains("recurrent")) {
      const json& r = j.at("recurrent");
      check_known_keys(r, {"layers", "hidden"}, "recurrent");
      cfg.recurrent.layers = get_index(r, "layers", cfg.recurrent.layers);
      cfg.recurrent.hidden = get_index(r, "hidden", cfg.recurrent.hidden);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      check_known_keys(t, {"epochs", "lr", "halving", "patience", "batch", "rho", "eps"}, "train");
      cfg.train.epochs = get_index(t, "epochs", cfg.train.epochs);
      cfg.train.lr = t.value("lr", cfg.train.lr);
      cfg.train.halving = t.value("halving", cfg.train.halving);
      cfg.train.patience = t.value("patience", cfg.train.patience);
      cfg.train.batch = get_index(t, "batch", cfg.train.batch);
      cfg.train.rho = t.value("rho", cfg.train.rho);
      cfg.train.eps = t.value("eps", cfg.train.eps);
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("malformed config: ") + e.what());
  }
}

std::string canonical_config_text(const ModelConfig& cfg) {
  json j;
  j["arch"] = arch_to_string(cfg.arch);
  j["head"] = head_to_string(cfg.head);
  j["classes"] = cfg.classes;
  j["input_bands"] = cfg.input_bands;
  j["activation"] = cfg.activation;
  j["dropout"] = cfg.dropout;
  j["l2"] = cfg.l2;
  j["seed"] = cfg.seed;
  if (arch_is_conv(cfg.arch)) {
    j["dense"] = cfg.dense;
    j["conv"]["first_maps"] = cfg.conv.first_maps;
    j["conv"]["maps"] = cfg.conv.maps;
    j["conv"]["kernel"] = std::vector<Index>{cfg.conv.kernel_h, cfg.conv.kernel_w};
    j["conv"]["pool"] = cfg.conv.pool;
  } else {
    j["recurrent"]["layers"] = cfg.recurrent.layers;
    j["recurrent"]["hidden"] = cfg.recurrent.hidden;
  }
  j["train"]["epochs"] = cfg.train.epochs;
  j["train"]["lr"] = cfg.train.lr;
  j["train"]["halving"] = cfg.train.halving;
  j["train"]["patience"] = cfg.train.patience;
  j["train"]["batch"] = cfg.train.batch;
  j["train"]["rho"] = cfg.train.rho;
  j["train"]["eps"] = cfg.train.eps;
  return j.dump(2) + "\n";
}

ModelConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidConfig("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void save_config(const ModelConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidConfig("cannot open " + path + " for writing");
  os << canonical_config_text(cfg);
}

}  // namespace quasar
