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

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "quasar/tensor.hpp"

namespace quasar {

// Log filter-bank energies, one row per band, one column per frame.
struct EnergyMatrix {
  Eigen::MatrixXd e;         // [bands, frames]
  double frame_shift = 0.0;  // seconds; 0 when unknown

  Index bands() const { return e.rows(); }
  Index frames() const { return e.cols(); }
};

// Order-k temporal derivatives via the symmetric regression filter
//   d_t = sum_{n=1..2} n (m_{t+n} - m_{t-n}) / (2 sum n^2)
// with edge frames replicated, applied k times. Order must be in {1,2,3}.
EnergyMatrix compute_deltas(const EnergyMatrix& m, int order);

// Packs (e, de, dde, ddde) per band-frame into the quaternion components
// (r, x, y, z); result shape is [frames, bands].
QuaternionTensor build_acoustic_quaternions(const EnergyMatrix& m);

// Per-utterance standardization: each band to zero mean / unit variance
// across frames (opt-in; raw log energies are the default everywhere).
EnergyMatrix standardize(const EnergyMatrix& m);

// Feature files. Paths ending in .csv hold frames as rows and bands as
// columns; anything else is the binary QACF1 container (magic, then band
// and frame counts as little-endian u32, then band-major little-endian
// doubles). The binary round trip is bit-exact.
void save_features(const EnergyMatrix& m, const std::string& path);
EnergyMatrix load_features(const std::string& path);

// 16-bit mono PCM WAV reader.
std::vector<double> read_wav_mono(const std::string& path, double* sample_rate);

// 25 ms Hamming windows at a 10 ms shift, magnitude-squared DFT, triangular
// mel bank over [0, rate/2], natural log floored at 1e-10.
EnergyMatrix logmel_extract(std::span<const double> audio, double rate, Index bands);

// Mel filter center frequencies in Hz for the given bank geometry.
std::vector<double> mel_center_frequencies(double rate, Index bands);

}  // namespace quasar
