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

#include "quasar/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quasar/features.hpp"

namespace quasar {

namespace fs = std::filesystem;

namespace {

QuaternionTensor quaternions_from_stacked(const EnergyMatrix& m) {
  if (m.bands() % 4 != 0)
    throw DimensionMismatch("quaternion4 feature file needs a band count divisible by 4");
  const Index F = m.bands() / 4, T = m.frames();
  QuaternionTensor q = QuaternionTensor::zeros({T, F});
  for (Index t = 0; t < T; ++t)
    for (Index f = 0; f < F; ++f) {
      const Index at = t * F + f;
      q.r.data[at] = m.e(f, t);
      q.x.data[at] = m.e(F + f, t);
      q.y.data[at] = m.e(2 * F + f, t);
      q.z.data[at] = m.e(3 * F + f, t);
    }
  return q;
}

EnergyMatrix stacked_from_quaternions(const QuaternionTensor& q) {
  const Index T = q.shape[0], F = q.shape[1];
  EnergyMatrix m;
  m.e.resize(4 * F, T);
  for (Index t = 0; t < T; ++t)
    for (Index f = 0; f < F; ++f) {
      const Index at = t * F + f;
      m.e(f, t) = q.r.data[at];
      m.e(F + f, t) = q.x.data[at];
      m.e(2 * F + f, t) = q.y.data[at];
      m.e(3 * F + f, t) = q.z.data[at];
    }
  return m;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw DataError("dataset directory not found: " + dir);

  std::string kind = "energy";
  const fs::path meta = root / "dataset.json";
  if (fs::exists(meta)) {
    std::ifstream is(meta);
    try {
      nlohmann::json j = nlohmann::json::parse(is);
      kind = j.value("features", kind);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed dataset.json in " + dir + ": " + e.what());
    }
    if (kind != "energy" && kind != "quaternion4")
      throw DataError("unknown feature kind '" + kind + "' in " + dir);
  }

  const fs::path labels_path = root / "labels.txt";
  std::ifstream labels(labels_path);
  if (!labels) throw DataError("missing labels.txt in " + dir);

  Dataset ds;
  std::string line;
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Utterance u;
    ss >> u.id;
    int v;
    while (ss >> v) u.labels.push_back(v);
    if (u.id.empty()) continue;

    const fs::path feat = root / (u.id + ".qacf");
    if (!fs::exists(feat)) throw DataError("missing feature file " + feat.string());
    EnergyMatrix m = load_features(feat.string());
    u.feats = (kind == "energy") ? build_acoustic_quaternions(m) : quaternions_from_stacked(m);
    ds.utts.push_back(std::move(u));
  }
  if (ds.utts.empty()) throw EmptyDataset();

  std::sort(ds.utts.begin(), ds.utts.end(),
            [](const Utterance& a, const Utterance& b) { return a.id < b.id; });
  ds.bands = ds.utts.front().bands();
  for (const Utterance& u : ds.utts)
    if (u.bands() != ds.bands)
      throw DimensionMismatch("utterance " + u.id + " has " + std::to_string(u.bands()) +
                              " bands, expected " + std::to_string(ds.bands));
  return ds;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
  const fs::path root(dir);
  fs::create_directories(root);
  {
    std::ofstream meta(root / "dataset.json");
    meta << "{\n  \"features\": \"quaternion4\"\n}\n";
  }
  std::ofstream labels(root / "labels.txt");
  for (const Utterance& u : ds.utts) {
    save_features(stacked_from_quaternions(u.feats), (root / (u.id + ".qacf")).string());
    labels << u.id;
    for (int v : u.labels) labels << " " << v;
    labels << "\n";
  }
}

}  // namespace quasar
