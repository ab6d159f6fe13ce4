// tools/vc_stub_main.cpp

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

// Stand-in voice converter for tests and demos, pluggable through the
// converter command template:
//   vc_stub --mode identity --source {source} --targets {targets} --out {out}
//   vc_stub --mode warp     --source {source} --targets {targets} --out {out}
// identity copies the source; warp emits dominant target audio plus a weak,
// slightly frequency-shifted copy of the source.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hvlad/synth.hpp"
#include "hvlad/wav.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Stand-in voice converter"};
  std::string mode = "warp", source, out;
  std::vector<std::string> targets;
  double source_weight = 0.3;
  double warp_factor = 1.02;
  app.add_option("--mode", mode, "identity|warp")
      ->check(CLI::IsMember({"identity", "warp"}));
  app.add_option("--source", source, "Source wav")->required();
  app.add_option("--targets", targets, "Target wav(s)");
  app.add_option("--out", out, "Output wav")->required();
  app.add_option("--source-weight", source_weight, "Weak source mix weight");
  app.add_option("--warp", warp_factor, "Source resampling factor");
  CLI11_PARSE(app, argc, argv);

  try {
    hvlad::Waveform src = hvlad::LoadWav(source);
    if (mode == "identity") {
      hvlad::SaveWav(out, src);
      return 0;
    }
    if (targets.empty()) {
      std::cerr << "warp mode needs at least one --targets file\n";
      return 2;
    }
    std::vector<hvlad::Waveform> tw;
    for (const auto &t : targets) tw.push_back(hvlad::LoadWav(t));
    hvlad::Waveform converted =
        hvlad::synth::WarpConvert(src, tw, source_weight, warp_factor);
    hvlad::SaveWav(out, converted);
  } catch (const std::exception &e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
