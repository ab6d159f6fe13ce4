// hvlad/wav.hpp

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

#ifndef HVLAD_WAV_HPP_
#define HVLAD_WAV_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hvlad/common.hpp"

namespace hvlad {

// Mono PCM audio, amplitudes in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate_hz = 0;

  double DurationSeconds() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

namespace detail {

inline uint32_t ReadU32(std::istream &is) { return ReadLe<uint32_t>(is); }
inline uint16_t ReadU16(std::istream &is) { return ReadLe<uint16_t>(is); }

inline std::string ReadTag(std::istream &is) {
  char tag[4];
  is.read(tag, 4);
  if (!is) Throw(Errc::kUnsupportedFormat, "truncated RIFF chunk header");
  return std::string(tag, 4);
}

}  // namespace detail

// Reads a RIFF/WAVE file with 16-bit PCM samples.  Multi-channel audio is
// averaged down to mono; samples are scaled by 1/32768.
inline Waveform LoadWav(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path))
    Throw(Errc::kNotFound, "no such file: " + path.string());
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Errc::kNotFound, "cannot open: " + path.string());

  if (detail::ReadTag(is) != "RIFF")
    Throw(Errc::kUnsupportedFormat, "not a RIFF file: " + path.string());
  detail::ReadU32(is);  // riff size, unused
  if (detail::ReadTag(is) != "WAVE")
    Throw(Errc::kUnsupportedFormat, "not a WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<int16_t> raw;
  bool have_data = false;

  while (is && !have_data) {
    char tagbuf[4];
    is.read(tagbuf, 4);
    if (!is) break;
    std::string tag(tagbuf, 4);
    uint32_t size = detail::ReadU32(is);
    if (tag == "fmt ") {
      format = detail::ReadU16(is);
      channels = detail::ReadU16(is);
      sample_rate = detail::ReadU32(is);
      detail::ReadU32(is);  // byte rate
      detail::ReadU16(is);  // block align
      bits = detail::ReadU16(is);
      if (size > 16) is.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (tag == "data") {
      Require(have_fmt, Errc::kUnsupportedFormat,
              "data chunk before fmt chunk: " + path.string());
      raw.resize(size / 2);
      is.read(reinterpret_cast<char *>(raw.data()),
              static_cast<std::streamsize>(raw.size() * 2));
      if (!is)
        Throw(Errc::kUnsupportedFormat, "truncated data chunk: " + path.string());
      have_data = true;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
  }

  Require(have_fmt && have_data, Errc::kUnsupportedFormat,
          "missing fmt/data chunk: " + path.string());
  Require(format == 1, Errc::kUnsupportedFormat,
          "only PCM supported (fmt tag " + std::to_string(format) + ")");
  Require(bits == 16, Errc::kUnsupportedFormat,
          "only 16-bit supported (got " + std::to_string(bits) + ")");
  Require(channels >= 1, Errc::kUnsupportedFormat, "zero channels");
  Require(sample_rate > 0, Errc::kUnsupportedFormat, "zero sample rate");

  size_t n_frames = raw.size() / channels;
  if (n_frames == 0) Throw(Errc::kEmptyAudio, "no samples: " + path.string());

  Waveform w;
  w.sample_rate_hz = static_cast<int>(sample_rate);
  w.samples.resize(n_frames);
  const float scale = 1.0f / 32768.0f;
  for (size_t i = 0; i < n_frames; ++i) {
    float acc = 0.0f;
    for (size_t c = 0; c < channels; ++c)
      acc += static_cast<float>(raw[i * channels + c]);
    w.samples[i] = acc * scale / static_cast<float>(channels);
  }
  return w;
}

// Writes mono 16-bit PCM.  Amplitudes are clipped to [-1, 1].
inline void SaveWav(const std::filesystem::path &path, const Waveform &w) {
  Require(w.sample_rate_hz > 0, Errc::kInvalidInput, "sample rate must be > 0");
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Errc::kIoError, "cannot write: " + path.string());

  uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  WriteLe<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  WriteLe<uint32_t>(os, 16);
  WriteLe<uint16_t>(os, 1);  // PCM
  WriteLe<uint16_t>(os, 1);  // mono
  WriteLe<uint32_t>(os, static_cast<uint32_t>(w.sample_rate_hz));
  WriteLe<uint32_t>(os, static_cast<uint32_t>(w.sample_rate_hz * 2));
  WriteLe<uint16_t>(os, 2);
  WriteLe<uint16_t>(os, 16);
  os.write("data", 4);
  WriteLe<uint32_t>(os, data_bytes);
  for (float s : w.samples) {
    float c = std::clamp(s, -1.0f, 1.0f);
    int v = static_cast<int>(std::lrintf(c * 32767.0f));
    WriteLe<int16_t>(os, static_cast<int16_t>(v));
  }
  if (!os) Throw(Errc::kIoError, "write failed: " + path.string());
}

// Linear-interpolation resampler used at ingestion when corpus audio is not
// at the pipeline rate.
inline Waveform ResampleLinear(const Waveform &w, int target_rate_hz) {
  Require(target_rate_hz > 0, Errc::kInvalidInput, "target rate must be > 0");
  if (w.sample_rate_hz == target_rate_hz) return w;
  Require(!w.samples.empty(), Errc::kEmptyAudio, "cannot resample empty audio");

  double ratio = static_cast<double>(w.sample_rate_hz) / target_rate_hz;
  size_t out_len = static_cast<size_t>(std::max<int64_t>(
      1, std::llround(static_cast<double>(w.samples.size()) / ratio)));
  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(out_len);
  size_t last = w.samples.size() - 1;
  for (size_t i = 0; i < out_len; ++i) {
    double pos = i * ratio;
    size_t i0 = std::min(static_cast<size_t>(pos), last);
    size_t i1 = std::min(i0 + 1, last);
    double frac = pos - static_cast<double>(i0);
    out.samples[i] = static_cast<float>((1.0 - frac) * w.samples[i0] +
                                        frac * w.samples[i1]);
  }
  return out;
}

}  // namespace hvlad

#endif  // HVLAD_WAV_HPP_
