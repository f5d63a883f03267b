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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quasar/features.hpp"
#include "quasar/rng.hpp"

using namespace quasar;

namespace {

EnergyMatrix random_energy(Rng& rng, Index F, Index T) {
  EnergyMatrix m;
  m.e.resize(F, T);
  for (Index f = 0; f < F; ++f)
    for (Index t = 0; t < T; ++t) m.e(f, t) = rng.uniform(-2.0, 2.0);
  return m;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("deltas of constant and linear signals") {
  EnergyMatrix constant;
  constant.e = Eigen::MatrixXd::Constant(3, 12, 4.2);
  for (int order = 1; order <= 3; ++order)
    CHECK(compute_deltas(constant, order).e.cwiseAbs().maxCoeff() == 0.0);

  // linear ramp e(t) = c*t: first delta = c away from the edges
  EnergyMatrix ramp;
  const double c = 0.37;
  ramp.e.resize(2, 20);
  for (Index t = 0; t < 20; ++t) {
    ramp.e(0, t) = c * static_cast<double>(t);
    ramp.e(1, t) = -2.0 * c * static_cast<double>(t);
  }
  EnergyMatrix d1 = compute_deltas(ramp, 1);
  EnergyMatrix d2 = compute_deltas(ramp, 2);
  for (Index t = 2; t < 18; ++t) {
    CHECK(d1.e(0, t) == doctest::Approx(c).epsilon(1e-12));
    CHECK(d1.e(1, t) == doctest::Approx(-2.0 * c).epsilon(1e-12));
  }
  for (Index t = 4; t < 16; ++t) CHECK(std::abs(d2.e(0, t)) <= 1e-12);
}

TEST_CASE("delta filter matches an independent direct convolution") {
  Rng rng(31);
  EnergyMatrix m = random_energy(rng, 5, 20);
  EnergyMatrix d = compute_deltas(m, 1);
  // d_t = (1*(m[t+1]-m[t-1]) + 2*(m[t+2]-m[t-2])) / 10, edges replicated
  for (Index f = 0; f < 5; ++f)
    for (Index t = 0; t < 20; ++t) {
      auto clamp = [&](Index i) { return std::max<Index>(0, std::min<Index>(19, i)); };
      const double want = (1.0 * (m.e(f, clamp(t + 1)) - m.e(f, clamp(t - 1))) +
                           2.0 * (m.e(f, clamp(t + 2)) - m.e(f, clamp(t - 2)))) /
                          10.0;
      CHECK(std::abs(d.e(f, t) - want) <= 1e-12);
    }
}

TEST_CASE("delta linearity and odd symmetry") {
  Rng rng(37);
  EnergyMatrix m1 = random_energy(rng, 4, 16);
  EnergyMatrix m2 = random_energy(rng, 4, 16);
  const double a = 1.3, b = -0.4;
  EnergyMatrix mix;
  mix.e = a * m1.e + b * m2.e;
  EnergyMatrix lhs = compute_deltas(mix, 1);
  EnergyMatrix rhs;
  rhs.e = a * compute_deltas(m1, 1).e + b * compute_deltas(m2, 1).e;
  CHECK((lhs.e - rhs.e).cwiseAbs().maxCoeff() <= 1e-10);

  // time reversal: delta(reverse(m)) = -reverse(delta(m)) on interior frames
  EnergyMatrix rev;
  rev.e = m1.e.rowwise().reverse();
  EnergyMatrix d_rev = compute_deltas(rev, 1);
  EnergyMatrix d_fwd = compute_deltas(m1, 1);
  for (Index f = 0; f < 4; ++f)
    for (Index t = 2; t < 14; ++t)
      CHECK(std::abs(d_rev.e(f, t) + d_fwd.e(f, 15 - t)) <= 1e-12);
}

TEST_CASE("acoustic quaternion packing follows the delta chain bit-exactly") {
  Rng rng(41);
  EnergyMatrix m = random_energy(rng, 40, 30);
  QuaternionTensor q = build_acoustic_quaternions(m);
  CHECK(q.shape == Shape{30, 40});
  CHECK(qt_to_real(q).shape == Shape{30, 160});

  EnergyMatrix d1 = compute_deltas(m, 1);
  EnergyMatrix d2 = compute_deltas(m, 2);
  EnergyMatrix d3 = compute_deltas(m, 3);
  bool exact = true;
  for (Index t = 0; t < 30 && exact; ++t)
    for (Index f = 0; f < 40; ++f) {
      const Index at = t * 40 + f;
      exact = exact && q.r.data[at] == m.e(f, t) && q.x.data[at] == d1.e(f, t) &&
              q.y.data[at] == d2.e(f, t) && q.z.data[at] == d3.e(f, t);
    }
  CHECK(exact);

  EnergyMatrix flat;
  flat.e = Eigen::MatrixXd::Constant(4, 9, 2.5);
  QuaternionTensor qc = build_acoustic_quaternions(flat);
  CHECK((qc.r.data == 2.5).all());
  CHECK((qc.x.data == 0.0).all());
  CHECK((qc.y.data == 0.0).all());
  CHECK((qc.z.data == 0.0).all());
}

TEST_CASE("QACF1 round trip is bit-exact") {
  Rng rng(43);
  EnergyMatrix m = random_energy(rng, 40, 100);
  const auto path = temp_file("quasar_feat_test.qacf");
  save_features(m, path.string());
  EnergyMatrix back = load_features(path.string());
  CHECK(back.bands() == 40);
  CHECK(back.frames() == 100);
  CHECK((back.e.array() == m.e.array()).all());
  std::filesystem::remove(path);
}

TEST_CASE("feature file error paths") {
  const auto bad = temp_file("quasar_bad_magic.qacf");
  {
    std::ofstream os(bad, std::ios::binary);
    os << "NOPE!whatever";
  }
  CHECK_THROWS_AS(load_features(bad.string()), BadMagic);
  std::filesystem::remove(bad);

  const auto trunc = temp_file("quasar_truncated.qacf");
  {
    Rng rng(47);
    EnergyMatrix m = random_energy(rng, 4, 4);
    save_features(m, trunc.string());
    std::filesystem::resize_file(trunc, 40);  // cut into the payload
  }
  CHECK_THROWS_AS(load_features(trunc.string()), TruncatedFile);
  std::filesystem::remove(trunc);

  const auto ragged = temp_file("quasar_ragged.csv");
  {
    std::ofstream os(ragged);
    os << "1.0,2.0,3.0\n1.0,2.0\n";
  }
  CHECK_THROWS_AS(load_features(ragged.string()), DimensionMismatch);
  std::filesystem::remove(ragged);
}

TEST_CASE("CSV round trip preserves layout (rows are frames)") {
  Rng rng(53);
  EnergyMatrix m = random_energy(rng, 3, 5);
  const auto path = temp_file("quasar_feat_test.csv");
  save_features(m, path.string());
  EnergyMatrix back = load_features(path.string());
  CHECK(back.bands() == 3);
  CHECK(back.frames() == 5);
  CHECK((back.e - m.e).cwiseAbs().maxCoeff() <= 1e-15);

  std::ifstream is(path);
  std::string first;
  std::getline(is, first);
  CHECK(std::count(first.begin(), first.end(), ',') == 2);  // F-1 commas per frame row
  std::filesystem::remove(path);
}

TEST_CASE("standardize yields zero mean unit variance per band") {
  Rng rng(59);
  EnergyMatrix m = random_energy(rng, 6, 50);
  EnergyMatrix s = standardize(m);
  for (Index f = 0; f < 6; ++f) {
    CHECK(std::abs(s.e.row(f).mean()) <= 1e-12);
    const double var = (s.e.row(f).array() - s.e.row(f).mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("logmel frame count and silence floor") {
  // 1 s at 16 kHz with 25 ms windows and 10 ms shift: (16000-400)/160 + 1 = 98
  std::vector<double> silence(16000, 0.0);
  EnergyMatrix m = logmel_extract(silence, 16000.0, 40);
  CHECK(m.frames() == 98);
  CHECK(m.bands() == 40);
  CHECK((m.e.array() - std::log(1e-10)).abs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(logmel_extract(std::vector<double>(100, 0.0), 16000.0, 40), AudioTooShort);
}

TEST_CASE("pure 1 kHz tone lands in the band whose mel center is nearest") {
  const double rate = 16000.0;
  const Index bands = 40;
  std::vector<double> tone(16000);
  for (size_t n = 0; n < tone.size(); ++n)
    tone[n] = 0.5 * std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(n) / rate);
  EnergyMatrix m = logmel_extract(tone, rate, bands);

  const std::vector<double> centers = mel_center_frequencies(rate, bands);
  Index expect = 0;
  for (Index b = 1; b < bands; ++b)
    if (std::abs(centers[static_cast<size_t>(b)] - 1000.0) <
        std::abs(centers[static_cast<size_t>(expect)] - 1000.0))
      expect = b;

  Index got = 0;
  m.e.col(m.frames() / 2).maxCoeff(&got);
  CHECK(got == expect);
}

TEST_CASE("wav reader round trips PCM16 mono") {
  const auto path = temp_file("quasar_tone.wav");
  const uint32_t rate = 8000;
  const uint16_t channels = 1, bits = 16;
  std::vector<int16_t> samples(1600);
  for (size_t n = 0; n < samples.size(); ++n)
    samples[n] = static_cast<int16_t>(12000.0 * std::sin(0.1 * static_cast<double>(n)));

  {
    std::ofstream os(path, std::ios::binary);
    auto u32 = [&](uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); };
    const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
    os.write("RIFF", 4);
    u32(36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    u32(16);
    u16(1);  // PCM
    u16(channels);
    u32(rate);
    u32(rate * 2);
    u16(2);
    u16(bits);
    os.write("data", 4);
    u32(data_bytes);
    os.write(reinterpret_cast<const char*>(samples.data()), data_bytes);
  }

  double got_rate = 0.0;
  std::vector<double> audio = read_wav_mono(path.string(), &got_rate);
  CHECK(got_rate == 8000.0);
  CHECK(audio.size() == samples.size());
  CHECK(audio[100] == doctest::Approx(samples[100] / 32768.0).epsilon(1e-12));
  std::filesystem::remove(path);
}
