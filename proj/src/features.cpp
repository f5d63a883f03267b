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

#include "quasar/features.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace quasar {

namespace {

constexpr char kMagic[5] = {'Q', 'A', 'C', 'F', '1'};
constexpr double kLogFloor = 1e-10;

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw TruncatedFile("unexpected end of file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw TruncatedFile("unexpected end of file");
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void save_csv(const EnergyMatrix& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw TruncatedFile("cannot open " + path + " for writing");
  char buf[64];
  for (Index t = 0; t < m.frames(); ++t) {
    for (Index f = 0; f < m.bands(); ++f) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.e(f, t));
      os << (f ? "," : "") << buf;
    }
    os << "\n";
  }
}

EnergyMatrix load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw TruncatedFile("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw DimensionMismatch("non-numeric CSV cell '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DimensionMismatch("ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw TruncatedFile("empty CSV file " + path);
  EnergyMatrix m;
  m.e.resize(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (size_t t = 0; t < rows.size(); ++t)
    for (size_t f = 0; f < rows[t].size(); ++f)
      m.e(static_cast<Index>(f), static_cast<Index>(t)) = rows[t][f];
  return m;
}

}  // namespace

EnergyMatrix compute_deltas(const EnergyMatrix& m, int order) {
  if (order < 1 || order > 3) throw DimensionMismatch("delta order must be 1, 2 or 3");
  const Index F = m.bands(), T = m.frames();
  constexpr double denom = 10.0;  // 2 * (1^2 + 2^2)
  EnergyMatrix cur = m;
  for (int k = 0; k < order; ++k) {
    EnergyMatrix next = cur;
    for (Index t = 0; t < T; ++t) {
      const Index tp1 = std::min(T - 1, t + 1), tp2 = std::min(T - 1, t + 2);
      const Index tm1 = std::max(Index(0), t - 1), tm2 = std::max(Index(0), t - 2);
      for (Index f = 0; f < F; ++f)
        next.e(f, t) =
            (1.0 * (cur.e(f, tp1) - cur.e(f, tm1)) + 2.0 * (cur.e(f, tp2) - cur.e(f, tm2))) /
            denom;
    }
    cur = std::move(next);
  }
  return cur;
}

QuaternionTensor build_acoustic_quaternions(const EnergyMatrix& m) {
  const Index F = m.bands(), T = m.frames();
  const EnergyMatrix d1 = compute_deltas(m, 1);
  const EnergyMatrix d2 = compute_deltas(d1, 1);
  const EnergyMatrix d3 = compute_deltas(d2, 1);

  QuaternionTensor q = QuaternionTensor::zeros({T, F});
  for (Index t = 0; t < T; ++t)
    for (Index f = 0; f < F; ++f) {
      const Index at = t * F + f;
      q.r.data[at] = m.e(f, t);
      q.x.data[at] = d1.e(f, t);
      q.y.data[at] = d2.e(f, t);
      q.z.data[at] = d3.e(f, t);
    }
  return q;
}

EnergyMatrix standardize(const EnergyMatrix& m) {
  EnergyMatrix out = m;
  for (Index f = 0; f < m.bands(); ++f) {
    const double mean = m.e.row(f).mean();
    const double var = (m.e.row(f).array() - mean).square().mean();
    const double sd = std::sqrt(var);
    out.e.row(f) = (m.e.row(f).array() - mean) / (sd > 1e-12 ? sd : 1.0);
  }
  return out;
}

void save_features(const EnergyMatrix& m, const std::string& path) {
  if (ends_with(path, ".csv")) {
    save_csv(m, path);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw TruncatedFile("cannot open " + path + " for writing");
  os.write(kMagic, 5);
  write_u32(os, static_cast<uint32_t>(m.bands()));
  write_u32(os, static_cast<uint32_t>(m.frames()));
  for (Index f = 0; f < m.bands(); ++f)
    for (Index t = 0; t < m.frames(); ++t) write_f64(os, m.e(f, t));
}

EnergyMatrix load_features(const std::string& path) {
  if (ends_with(path, ".csv")) return load_csv(path);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TruncatedFile("cannot open " + path);
  char magic[5];
  if (!is.read(magic, 5)) throw TruncatedFile("unexpected end of file in " + path);
  if (std::memcmp(magic, kMagic, 5) != 0) throw BadMagic("not a QACF1 file: " + path);
  const Index F = static_cast<Index>(read_u32(is));
  const Index T = static_cast<Index>(read_u32(is));
  if (F < 1 || T < 1) throw DimensionMismatch("degenerate feature dimensions in " + path);
  EnergyMatrix m;
  m.e.resize(F, T);
  for (Index f = 0; f < F; ++f)
    for (Index t = 0; t < T; ++t) m.e(f, t) = read_f64(is);
  return m;
}

std::vector<double> read_wav_mono(const std::string& path, double* sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TruncatedFile("cannot open " + path);
  char tag[4];
  auto read_tag = [&](const char* what) {
    if (!is.read(tag, 4)) throw TruncatedFile(std::string("truncated ") + what + " in " + path);
  };
  read_tag("RIFF header");
  if (std::memcmp(tag, "RIFF", 4) != 0) throw BadMagic("not a RIFF file: " + path);
  read_u32(is);  // total size, unused
  read_tag("WAVE tag");
  if (std::memcmp(tag, "WAVE", 4) != 0) throw BadMagic("not a WAVE file: " + path);

  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t rate = 0;
  std::vector<double> samples;
  bool have_data = false;
  while (is.peek() != EOF) {
    read_tag("chunk id");
    const uint32_t size = read_u32(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw TruncatedFile("short fmt chunk in " + path);
      unsigned char buf[16];
      if (!is.read(reinterpret_cast<char*>(buf), 16)) throw TruncatedFile("truncated fmt chunk");
      format = static_cast<uint16_t>(buf[0] | (buf[1] << 8));
      channels = static_cast<uint16_t>(buf[2] | (buf[3] << 8));
      rate = static_cast<uint32_t>(buf[4]) | (static_cast<uint32_t>(buf[5]) << 8) |
             (static_cast<uint32_t>(buf[6]) << 16) | (static_cast<uint32_t>(buf[7]) << 24);
      bits = static_cast<uint16_t>(buf[14] | (buf[15] << 8));
      is.seekg(size - 16 + (size % 2), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw TruncatedFile("data chunk before fmt in " + path);
      if (format != 1 || channels != 1 || bits != 16)
        throw DimensionMismatch("only 16-bit mono PCM supported: " + path);
      const uint32_t n = size / 2;
      samples.resize(n);
      for (uint32_t i = 0; i < n; ++i) {
        unsigned char b[2];
        if (!is.read(reinterpret_cast<char*>(b), 2)) throw TruncatedFile("truncated samples");
        const int16_t s = static_cast<int16_t>(b[0] | (b[1] << 8));
        samples[i] = static_cast<double>(s) / 32768.0;
      }
      if (size % 2) is.seekg(1, std::ios::cur);
      have_data = true;
    } else {
      is.seekg(size + (size % 2), std::ios::cur);
    }
  }
  if (!have_fmt || !have_data) throw TruncatedFile("missing fmt/data chunk in " + path);
  if (sample_rate) *sample_rate = static_cast<double>(rate);
  return samples;
}

namespace {
double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }
}  // namespace

std::vector<double> mel_center_frequencies(double rate, Index bands) {
  const double mel_max = hz_to_mel(rate / 2.0);
  std::vector<double> centers(static_cast<size_t>(bands));
  for (Index b = 0; b < bands; ++b)
    centers[static_cast<size_t>(b)] =
        mel_to_hz(mel_max * static_cast<double>(b + 1) / static_cast<double>(bands + 1));
  return centers;
}

EnergyMatrix logmel_extract(std::span<const double> audio, double rate, Index bands) {
  if (rate <= 0) throw DimensionMismatch("sample rate must be positive");
  if (bands < 1) throw DimensionMismatch("band count must be positive");
  const Index win = static_cast<Index>(std::lround(0.025 * rate));
  const Index shift = static_cast<Index>(std::lround(0.010 * rate));
  if (static_cast<Index>(audio.size()) < win)
    throw AudioTooShort("need at least " + std::to_string(win) + " samples, got " +
                        std::to_string(audio.size()));
  const Index frames = (static_cast<Index>(audio.size()) - win) / shift + 1;

  Index nfft = 1;
  while (nfft < win) nfft *= 2;
  const Index nbins = nfft / 2 + 1;

  Eigen::ArrayXd window(win);
  for (Index n = 0; n < win; ++n)
    window[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(n) /
                                       static_cast<double>(win - 1));

  // Triangular mel bank over the DFT bins.
  const double mel_max = hz_to_mel(rate / 2.0);
  std::vector<double> edges(static_cast<size_t>(bands) + 2);
  for (size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(bands + 1));
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(bands, nbins);
  for (Index b = 0; b < bands; ++b) {
    const double lo = edges[static_cast<size_t>(b)];
    const double mid = edges[static_cast<size_t>(b) + 1];
    const double hi = edges[static_cast<size_t>(b) + 2];
    for (Index k = 0; k < nbins; ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(nfft);
      if (f > lo && f < mid)
        bank(b, k) = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        bank(b, k) = (hi - f) / (hi - mid);
    }
  }

  Eigen::FFT<double> fft;
  std::vector<double> frame(static_cast<size_t>(nfft), 0.0);
  std::vector<std::complex<double>> spectrum;
  EnergyMatrix out;
  out.e.resize(bands, frames);
  out.frame_shift = 0.010;
  Eigen::VectorXd power(nbins);
  for (Index t = 0; t < frames; ++t) {
    for (Index n = 0; n < win; ++n)
      frame[static_cast<size_t>(n)] = audio[static_cast<size_t>(t * shift + n)] * window[n];
    std::fill(frame.begin() + static_cast<size_t>(win), frame.end(), 0.0);
    fft.fwd(spectrum, frame);
    for (Index k = 0; k < nbins; ++k) power[k] = std::norm(spectrum[static_cast<size_t>(k)]);
    out.e.col(t) = (bank * power).array().max(kLogFloor).log();
  }
  return out;
}

}  // namespace quasar
