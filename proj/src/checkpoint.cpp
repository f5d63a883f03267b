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

#include "quasar/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace quasar {

namespace {

constexpr char kMagic[8] = {'Q', 'N', 'N', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw BadCheckpoint("truncated checkpoint");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_block(std::ostream& os, const RealTensor& t) {
  for (Index i = 0; i < t.size(); ++i) {
    uint64_t bits;
    std::memcpy(&bits, &t.data[i], 8);
    write_u64(os, bits);
  }
}

void read_block(std::istream& is, RealTensor& t) {
  for (Index i = 0; i < t.size(); ++i) {
    const uint64_t bits = read_u64(is);
    std::memcpy(&t.data[i], &bits, 8);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model, const CheckpointMeta& meta) {
  std::vector<ParamRef> params = model.params();

  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["config"] = nlohmann::json::parse(canonical_config_text(model.config()));
  manifest["epoch"] = meta.epoch;
  manifest["history"] = meta.history;
  nlohmann::json tensors = nlohmann::json::array();
  for (const ParamRef& p : params) {
    nlohmann::json t;
    t["name"] = p.name;
    t["shape"] = p.tensor->shape;
    tensors.push_back(std::move(t));
  }
  manifest["tensors"] = std::move(tensors);
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw BadCheckpoint("cannot open " + path + " for writing");
  os.write(kMagic, 8);
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const ParamRef& p : params) write_block(os, *p.tensor);
  if (!os) throw BadCheckpoint("failed writing " + path);
}

namespace {

nlohmann::json read_manifest(std::istream& is, const std::string& path) {
  char magic[8];
  if (!is.read(magic, 8)) throw BadCheckpoint("truncated checkpoint " + path);
  if (std::memcmp(magic, kMagic, 8) != 0) throw BadCheckpoint("not a QNNCKPT1 file: " + path);
  const uint64_t len = read_u64(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len)))
    throw BadCheckpoint("truncated manifest in " + path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw BadCheckpoint("malformed manifest in " + path + ": " + e.what());
  }
}

void read_params(std::istream& is, const nlohmann::json& manifest, Model& model,
                 const std::string& path) {
  std::vector<ParamRef> params = model.params();
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != params.size())
    throw BadCheckpoint("tensor count mismatch in " + path);
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& entry = tensors.at(i);
    if (entry.at("name").get<std::string>() != params[i].name)
      throw BadCheckpoint("tensor name mismatch at index " + std::to_string(i) + " in " + path);
    const Shape shape = entry.at("shape").get<Shape>();
    if (!same_shape(shape, params[i].tensor->shape))
      throw BadCheckpoint("tensor shape mismatch for " + params[i].name + " in " + path);
    read_block(is, *params[i].tensor);
  }
}

}  // namespace

Model load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw BadCheckpoint("cannot open " + path);
  nlohmann::json manifest = read_manifest(is, path);
  ModelConfig cfg;
  try {
    cfg = parse_config(manifest.at("config").dump());
  } catch (const InvalidConfig& e) {
    throw BadCheckpoint("bad embedded config in " + path + ": " + e.what());
  }
  Model model = Model::build(cfg);
  read_params(is, manifest, model, path);
  if (meta) {
    meta->epoch = manifest.value("epoch", 0);
    meta->history = manifest.value("history", std::vector<std::string>{});
  }
  return model;
}

void load_checkpoint_into(const std::string& path, Model& model, CheckpointMeta* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw BadCheckpoint("cannot open " + path);
  nlohmann::json manifest = read_manifest(is, path);
  read_params(is, manifest, model, path);
  if (meta) {
    meta->epoch = manifest.value("epoch", 0);
    meta->history = manifest.value("history", std::vector<std::string>{});
  }
}

}  // namespace quasar
