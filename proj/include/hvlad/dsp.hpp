// hvlad/dsp.hpp

// Copyright 2026  The hvlad authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef HVLAD_DSP_HPP_
#define HVLAD_DSP_HPP_

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hvlad/common.hpp"
#include "hvlad/tensor.hpp"
#include "hvlad/wav.hpp"

namespace hvlad {

// Magnitude spectrogram, values[frame][bin] with n_bins = fft_size/2 + 1.
struct Spectrogram {
  Tensor<float> values;  // [n_frames, n_bins]
  float hop_s = 0.0f;
  float win_s = 0.0f;
  bool normalized = false;

  int64_t n_frames() const { return values.dim(0); }
  int64_t n_bins() const { return values.dim(1); }
};

// Front-end settings shared by training, evaluation and cache extraction.
struct FrontendConfig {
  int sample_rate_hz = 16000;
  int fft_size = 512;
  double win_s = 0.025;
  double hop_s = 0.010;
  double crop_s = 2.5;  // segment length fed to the encoder
};

// Fixed-length segment selection: a uniformly random offset crop when the
// input is longer than requested, wrap-padding (repeat from the start) when
// it is shorter.
inline Waveform CropOrPad(const Waveform &w, double duration_s, Rng *rng) {
  Require(duration_s > 0, Errc::kInvalidInput, "duration must be positive");
  Require(!w.samples.empty(), Errc::kEmptyAudio, "empty waveform");
  size_t target =
      static_cast<size_t>(std::llround(duration_s * w.sample_rate_hz));
  Require(target > 0, Errc::kInvalidInput, "target length rounds to zero");

  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.resize(target);
  size_t len = w.samples.size();
  if (len > target) {
    size_t offset = static_cast<size_t>(rng->UniformInt(len - target + 1));
    std::copy(w.samples.begin() + static_cast<ptrdiff_t>(offset),
              w.samples.begin() + static_cast<ptrdiff_t>(offset + target),
              out.samples.begin());
  } else {
    for (size_t k = 0; k < target; ++k) out.samples[k] = w.samples[k % len];
  }
  return out;
}

namespace detail {

// Iterative radix-2 FFT, in place.  n must be a power of two.
inline void Fft(std::vector<std::complex<double>> *a) {
  size_t n = a->size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap((*a)[i], (*a)[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = (*a)[i + k];
        std::complex<double> v = (*a)[i + k + len / 2] * w;
        (*a)[i + k] = u + v;
        (*a)[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

inline std::vector<double> HammingWindow(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  return w;
}

}  // namespace detail

// Short-time magnitude spectrogram: Hamming-windowed frames, zero-padded to
// fft_size, bins 0..fft_size/2.  Frames are computed in double precision and
// stored as float.
inline Spectrogram StftMagnitude(const Waveform &w,
                                 const FrontendConfig &cfg = {}) {
  Require((cfg.fft_size & (cfg.fft_size - 1)) == 0 && cfg.fft_size > 0,
          Errc::kInvalidConfig, "fft_size must be a power of two");
  size_t win_len =
      static_cast<size_t>(std::llround(cfg.win_s * w.sample_rate_hz));
  size_t hop_len =
      static_cast<size_t>(std::llround(cfg.hop_s * w.sample_rate_hz));
  Require(win_len > 1 && hop_len > 0, Errc::kInvalidConfig,
          "window/hop too small for sample rate");
  Require(win_len <= static_cast<size_t>(cfg.fft_size), Errc::kInvalidConfig,
          "window longer than fft_size");
  if (w.samples.size() < win_len)
    Throw(Errc::kTooShort, "waveform shorter than one analysis window");

  int64_t n_frames =
      1 + static_cast<int64_t>((w.samples.size() - win_len) / hop_len);
  int64_t n_bins = cfg.fft_size / 2 + 1;

  std::vector<double> window = detail::HammingWindow(win_len);
  Spectrogram spec;
  spec.values = Tensor<float>({n_frames, n_bins});
  spec.hop_s = static_cast<float>(cfg.hop_s);
  spec.win_s = static_cast<float>(cfg.win_s);

  std::vector<std::complex<double>> frame(static_cast<size_t>(cfg.fft_size));
  for (int64_t t = 0; t < n_frames; ++t) {
    size_t start = static_cast<size_t>(t) * hop_len;
    for (size_t i = 0; i < win_len; ++i)
      frame[i] = {static_cast<double>(w.samples[start + i]) * window[i], 0.0};
    for (size_t i = win_len; i < frame.size(); ++i) frame[i] = {0.0, 0.0};
    detail::Fft(&frame);
    for (int64_t f = 0; f < n_bins; ++f)
      spec.values(t, f) = static_cast<float>(std::abs(frame[static_cast<size_t>(f)]));
  }
  CheckFinite(spec.values, "stft");
  return spec;
}

// Scalar mean/variance normalization over all entries.  Population standard
// deviation; epsilon guards constant input.
inline Spectrogram Normalize(const Spectrogram &s, double eps = 1e-6) {
  Require(!s.normalized, Errc::kInvalidInput, "spectrogram already normalized");
  const int64_t n = s.values.numel();
  Require(n > 0, Errc::kInvalidInput, "empty spectrogram");

  double sum = 0.0;
  for (int64_t i = 0; i < n; ++i) sum += s.values[i];
  double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double d = s.values[i] - mean;
    ss += d * d;
  }
  double std_dev = std::sqrt(ss / static_cast<double>(n));

  Spectrogram out;
  out.values = Tensor<float>(s.values.shape());
  out.hop_s = s.hop_s;
  out.win_s = s.win_s;
  out.normalized = true;
  double inv = 1.0 / (std_dev + eps);
  for (int64_t i = 0; i < n; ++i)
    out.values[i] = static_cast<float>((s.values[i] - mean) * inv);
  return out;
}

// ---------------------------------------------------------------------------
// Spectrogram cache: per-utterance binary record.
//   "HVSPEC1" | u32 n_frames | u32 n_bins | f32 hop_s | f32 win_s |
//   u8 normalized | row-major f32 values
// ---------------------------------------------------------------------------

inline constexpr char kSpecMagic[] = "HVSPEC1";  // 7 bytes on disk

inline void SaveSpectrogram(const std::filesystem::path &path,
                            const Spectrogram &s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Errc::kIoError, "cannot write: " + path.string());
  os.write(kSpecMagic, 7);
  WriteLe<uint32_t>(os, static_cast<uint32_t>(s.n_frames()));
  WriteLe<uint32_t>(os, static_cast<uint32_t>(s.n_bins()));
  WriteLe<float>(os, s.hop_s);
  WriteLe<float>(os, s.win_s);
  WriteLe<uint8_t>(os, s.normalized ? 1 : 0);
  for (int64_t i = 0; i < s.values.numel(); ++i) WriteLe<float>(os, s.values[i]);
  if (!os) Throw(Errc::kIoError, "write failed: " + path.string());
}

inline Spectrogram LoadSpectrogram(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Errc::kNotFound, "cannot open: " + path.string());
  char magic[7];
  is.read(magic, 7);
  if (!is || std::string(magic, 7) != kSpecMagic)
    Throw(Errc::kUnsupportedFormat, "bad spectrogram magic: " + path.string());
  uint32_t n_frames = ReadLe<uint32_t>(is);
  uint32_t n_bins = ReadLe<uint32_t>(is);
  Spectrogram s;
  s.hop_s = ReadLe<float>(is);
  s.win_s = ReadLe<float>(is);
  s.normalized = ReadLe<uint8_t>(is) != 0;
  s.values = Tensor<float>({static_cast<int64_t>(n_frames),
                            static_cast<int64_t>(n_bins)});
  for (int64_t i = 0; i < s.values.numel(); ++i) s.values[i] = ReadLe<float>(is);
  return s;
}

// Frame-domain analogue of CropOrPad used with cached full-utterance
// spectrograms: selects n_target consecutive frames at a random offset, or
// wraps when the utterance has fewer frames.
inline Spectrogram CropFrames(const Spectrogram &s, int64_t n_target,
                              Rng *rng) {
  Require(n_target > 0, Errc::kInvalidInput, "target frames must be positive");
  Spectrogram out;
  out.hop_s = s.hop_s;
  out.win_s = s.win_s;
  out.normalized = s.normalized;
  out.values = Tensor<float>({n_target, s.n_bins()});
  int64_t n = s.n_frames();
  int64_t offset = 0;
  if (n > n_target) offset = static_cast<int64_t>(rng->UniformInt(
      static_cast<uint64_t>(n - n_target + 1)));
  for (int64_t t = 0; t < n_target; ++t) {
    int64_t src = (n >= n_target) ? offset + t : t % n;
    for (int64_t f = 0; f < s.n_bins(); ++f) out.values(t, f) = s.values(src, f);
  }
  return out;
}

// Number of STFT frames produced by a segment of the given duration.
inline int64_t FramesForDuration(double duration_s, const FrontendConfig &cfg) {
  int64_t samples =
      static_cast<int64_t>(std::llround(duration_s * cfg.sample_rate_hz));
  int64_t win = static_cast<int64_t>(std::llround(cfg.win_s * cfg.sample_rate_hz));
  int64_t hop = static_cast<int64_t>(std::llround(cfg.hop_s * cfg.sample_rate_hz));
  Require(samples >= win, Errc::kTooShort, "segment shorter than one window");
  return 1 + (samples - win) / hop;
}

}  // namespace hvlad

#endif  // HVLAD_DSP_HPP_
