// hvlad/synth.hpp

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

#ifndef HVLAD_SYNTH_HPP_
#define HVLAD_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hvlad/common.hpp"
#include "hvlad/wav.hpp"

namespace hvlad {
namespace synth {

// Synthetic speakers for tests and demos.  Each speaker owns a small set of
// characteristic tone frequencies; an utterance is those tones with random
// phases/amplitudes plus white noise.  With zero tones utterances are pure
// noise (no class signal at all).
struct SynthConfig {
  int n_speakers = 10;
  int utts_per_speaker = 40;
  double duration_s = 1.5;
  int sample_rate_hz = 8000;
  uint64_t seed = 1;
  int tones_per_speaker = 3;
  double tone_amp = 0.22;
  double noise_amp = 0.02;
};

// Deterministic per-speaker tone set, spaced at least four FFT-bin widths
// apart so signatures stay distinguishable after a 512-point FFT.
inline std::vector<double> SpeakerTones(int speaker, const SynthConfig &cfg) {
  Rng rng(MixSeed(cfg.seed, 0x5107ULL + static_cast<uint64_t>(speaker)));
  double bin_hz = static_cast<double>(cfg.sample_rate_hz) / 512.0;
  double lo = 0.05 * cfg.sample_rate_hz, hi = 0.45 * cfg.sample_rate_hz;
  std::vector<double> tones;
  int guard = 0;
  while (static_cast<int>(tones.size()) < cfg.tones_per_speaker &&
         guard++ < 1000) {
    double f = rng.Uniform(lo, hi);
    bool ok = true;
    for (double t : tones)
      if (std::abs(t - f) < 4.0 * bin_hz) ok = false;
    if (ok) tones.push_back(f);
  }
  return tones;
}

inline Waveform SynthUtterance(const std::vector<double> &tones,
                               const SynthConfig &cfg, Rng *rng) {
  size_t n = static_cast<size_t>(
      std::llround(cfg.duration_s * cfg.sample_rate_hz));
  Waveform w;
  w.sample_rate_hz = cfg.sample_rate_hz;
  w.samples.assign(n, 0.0f);
  for (double f : tones) {
    double phase = rng->Uniform(0.0, 2.0 * M_PI);
    double amp = cfg.tone_amp * rng->Uniform(0.7, 1.0);
    double omega = 2.0 * M_PI * f / cfg.sample_rate_hz;
    for (size_t i = 0; i < n; ++i)
      w.samples[i] += static_cast<float>(
          amp * std::sin(omega * static_cast<double>(i) + phase));
  }
  for (size_t i = 0; i < n; ++i)
    w.samples[i] += static_cast<float>(cfg.noise_amp * rng->Normal());
  return w;
}

// Builds a speaker-per-directory tree: root/spk000/utt000.wav ...
inline void MakeSyntheticCorpus(const std::filesystem::path &root,
                                const SynthConfig &cfg) {
  Require(cfg.n_speakers >= 1 && cfg.utts_per_speaker >= 1, Errc::kInvalidInput,
          "corpus needs speakers and utterances");
  for (int s = 0; s < cfg.n_speakers; ++s) {
    char spk[32];
    std::snprintf(spk, sizeof(spk), "spk%03d", s);
    std::filesystem::create_directories(root / spk);
    std::vector<double> tones = SpeakerTones(s, cfg);
    for (int u = 0; u < cfg.utts_per_speaker; ++u) {
      Rng rng(MixSeed(cfg.seed, 0xA77ULL + 1000003ULL * static_cast<uint64_t>(s) +
                                    static_cast<uint64_t>(u)));
      Waveform w = SynthUtterance(tones, cfg, &rng);
      char utt[32];
      std::snprintf(utt, sizeof(utt), "utt%03d.wav", u);
      SaveWav(root / spk / utt, w);
    }
  }
}

// "Identity-plus-warp" conversion stand-in: the output is the tiled target
// audio (dominant) plus a slightly resampled copy of the source (weak), so a
// trace of the source's spectral signature survives, shifted by the warp
// factor.
inline Waveform WarpConvert(const Waveform &source,
                            const std::vector<Waveform> &targets,
                            double source_weight = 0.3,
                            double warp_factor = 1.02) {
  Require(!targets.empty(), Errc::kInvalidInput, "need at least one target");
  Require(!source.samples.empty(), Errc::kEmptyAudio, "empty source");

  size_t n = source.samples.size();
  Waveform out;
  out.sample_rate_hz = source.sample_rate_hz;
  out.samples.assign(n, 0.0f);

  // Concatenate targets (resampled to the source rate), tile to length.
  std::vector<float> target_cat;
  for (const Waveform &t : targets) {
    Waveform tr = (t.sample_rate_hz == source.sample_rate_hz)
                      ? t
                      : ResampleLinear(t, source.sample_rate_hz);
    target_cat.insert(target_cat.end(), tr.samples.begin(), tr.samples.end());
  }
  Require(!target_cat.empty(), Errc::kEmptyAudio, "empty target audio");

  // Warped source: read at a slightly faster rate, shifting frequencies up.
  std::vector<float> warped(n);
  size_t last = n - 1;
  for (size_t i = 0; i < n; ++i) {
    double pos = static_cast<double>(i) * warp_factor;
    size_t i0 = static_cast<size_t>(pos);
    if (i0 >= last) i0 = (i0 % last);  // wrap to keep full length
    double frac = pos - std::floor(pos);
    size_t i1 = std::min(i0 + 1, last);
    warped[i] = static_cast<float>((1.0 - frac) * source.samples[i0] +
                                   frac * source.samples[i1]);
  }

  double scale = 1.0 / (1.0 + source_weight);
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = static_cast<float>(
        scale * (target_cat[i % target_cat.size()] +
                 source_weight * warped[i]));
  return out;
}

}  // namespace synth
}  // namespace hvlad

#endif  // HVLAD_SYNTH_HPP_
