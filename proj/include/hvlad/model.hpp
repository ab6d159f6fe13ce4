// hvlad/model.hpp

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

#ifndef HVLAD_MODEL_HPP_
#define HVLAD_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hvlad/autograd.hpp"
#include "hvlad/common.hpp"
#include "hvlad/dsp.hpp"
#include "hvlad/nn.hpp"
#include "hvlad/tensor.hpp"
#include "hvlad/vlad.hpp"

namespace hvlad {
namespace model {

// Encoder variants.  All share the same trunk; they differ in how trunk
// features are aggregated before the shared FC / classifier:
//   Baseline1: final stage output, flattened
//   Baseline2: final stage output, one VLAD layer
//   Baseline3: one flatten per last-stage sub-block, shared FC, averaged
//   Hvlad:     one VLAD per last-stage sub-block, shared FC, averaged
enum class Variant { kBaseline1, kBaseline2, kBaseline3, kHvlad };

inline std::string VariantName(Variant v) {
  switch (v) {
    case Variant::kBaseline1: return "baseline1";
    case Variant::kBaseline2: return "baseline2";
    case Variant::kBaseline3: return "baseline3";
    case Variant::kHvlad: return "hvlad";
  }
  return "?";
}

inline Variant ParseVariant(const std::string &s) {
  if (s == "baseline1") return Variant::kBaseline1;
  if (s == "baseline2") return Variant::kBaseline2;
  if (s == "baseline3") return Variant::kBaseline3;
  if (s == "hvlad") return Variant::kHvlad;
  Throw(Errc::kInvalidConfig, "unknown variant: " + s);
}

inline constexpr int kNumTaps = 3;  // sub-blocks tapped in the last stage

struct EncoderConfig {
  Variant variant = Variant::kHvlad;
  int clusters = 64;
  int n_classes = 108;
  std::vector<int> trunk_channels = {16, 32, 64, 128};
  std::vector<int> stage_depths = {2, 3, 3, 3};
  int embed_dim = 512;
  int input_bins = 257;
  int input_frames = 248;
  bool intra_norm = true;
  vlad::AssignMode assign_mode = vlad::AssignMode::kSoft;

  bool UsesVlad() const {
    return variant == Variant::kBaseline2 || variant == Variant::kHvlad;
  }
  bool UsesTaps() const {
    return variant == Variant::kBaseline3 || variant == Variant::kHvlad;
  }
  int NumVladLayers() const {
    if (variant == Variant::kHvlad) return kNumTaps;
    if (variant == Variant::kBaseline2) return 1;
    return 0;
  }

  void Validate() const {
    Require(clusters >= 2, Errc::kInvalidConfig, "clusters must be >= 2");
    Require(n_classes >= 2, Errc::kInvalidConfig, "n_classes must be >= 2");
    Require(trunk_channels.size() == 4 && stage_depths.size() == 4,
            Errc::kInvalidConfig, "trunk needs four stages");
    for (int c : trunk_channels)
      Require(c >= 1, Errc::kInvalidConfig, "trunk channels must be positive");
    for (int d : stage_depths)
      Require(d >= 1, Errc::kInvalidConfig, "stage depths must be positive");
    Require(embed_dim >= 1, Errc::kInvalidConfig, "embed_dim must be positive");
    Require(input_bins >= 8 && input_frames >= 8, Errc::kInvalidConfig,
            "input smaller than the trunk receptive field");
    if (UsesTaps())
      Require(stage_depths[3] == kNumTaps, Errc::kInvalidConfig,
              "tapped variants need exactly " + std::to_string(kNumTaps) +
                  " sub-blocks in the last stage");
  }
};

// Spatial extent after conv1, the stem pool, and the four stages.
struct TrunkDims {
  int64_t h = 0, w = 0;
};

inline int64_t StrideDim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

inline TrunkDims ComputeTrunkDims(const EncoderConfig &cfg, int64_t in_h,
                                  int64_t in_w) {
  TrunkDims d;
  d.h = StrideDim(in_h, 7, 2, 3);
  d.w = StrideDim(in_w, 7, 2, 3);
  Require(d.h >= 3 && d.w >= 3, Errc::kInvalidConfig, "input too small");
  d.h = StrideDim(d.h, 3, 2, 0);  // stem maxpool
  d.w = StrideDim(d.w, 3, 2, 0);
  for (int s = 1; s < 4; ++s) {  // stages 2..4 downsample
    d.h = StrideDim(d.h, 3, 2, 1);
    d.w = StrideDim(d.w, 3, 2, 1);
  }
  Require(d.h >= 1 && d.w >= 1, Errc::kInvalidConfig, "input too small");
  return d;
}

// Named parameter store.  Insertion order is the canonical order for
// initialization, optimizer state and serialization.  Tensors whose names
// end in ".running_mean"/".running_var" are batch-norm buffers, not
// trainable parameters.
template <typename T>
struct ModelParams {
  EncoderConfig cfg;
  std::vector<std::string> names;
  std::unordered_map<std::string, Tensor<T>> tensors;

  Tensor<T> &At(const std::string &name) {
    auto it = tensors.find(name);
    Require(it != tensors.end(), Errc::kConfigMismatch,
            "missing tensor: " + name);
    return it->second;
  }
  const Tensor<T> &At(const std::string &name) const {
    auto it = tensors.find(name);
    Require(it != tensors.end(), Errc::kConfigMismatch,
            "missing tensor: " + name);
    return it->second;
  }
  bool Has(const std::string &name) const { return tensors.count(name) > 0; }

  void Add(const std::string &name, Tensor<T> t) {
    Require(tensors.emplace(name, std::move(t)).second, Errc::kInvalidConfig,
            "duplicate tensor name: " + name);
    names.push_back(name);
  }

  static bool IsBuffer(const std::string &name) {
    auto ends_with = [&](const char *suffix) {
      std::string s(suffix);
      return name.size() >= s.size() &&
             name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    return ends_with(".running_mean") || ends_with(".running_var");
  }

  std::vector<std::string> TrainableNames() const {
    std::vector<std::string> out;
    for (const auto &n : names)
      if (!IsBuffer(n)) out.push_back(n);
    return out;
  }

  int64_t ParameterCount() const {
    int64_t n = 0;
    for (const auto &name : names)
      if (!IsBuffer(name)) n += tensors.at(name).numel();
    return n;
  }

  template <typename U>
  ModelParams<U> Cast() const {
    ModelParams<U> out;
    out.cfg = cfg;
    for (const auto &name : names)
      out.Add(name, tensors.at(name).template Cast<U>());
    return out;
  }
};

namespace detail {

template <typename T>
void AddConv(ModelParams<T> *p, const std::string &name, int64_t cout,
             int64_t cin, int64_t kh, int64_t kw, Rng *rng) {
  Tensor<T> w({cout, cin, kh, kw});
  nn::HeUniformInit(&w, cin * kh * kw, rng);
  p->Add(name + ".w", std::move(w));
}

template <typename T>
void AddBatchNorm(ModelParams<T> *p, const std::string &name, int64_t c) {
  p->Add(name + ".gamma", Tensor<T>::Full({c}, T(1)));
  p->Add(name + ".beta", Tensor<T>({c}));
  p->Add(name + ".running_mean", Tensor<T>({c}));
  p->Add(name + ".running_var", Tensor<T>::Full({c}, T(1)));
}

template <typename T>
void AddLinear(ModelParams<T> *p, const std::string &name, int64_t dout,
               int64_t din, Rng *rng) {
  Tensor<T> w({dout, din});
  nn::HeUniformInit(&w, din, rng);
  p->Add(name + ".w", std::move(w));
  p->Add(name + ".b", Tensor<T>({dout}));
}

inline int64_t BottleneckMid(int64_t out_c) { return std::max<int64_t>(1, out_c / 4); }

}  // namespace detail

// Aggregated input dimension of the shared FC layer.
inline int64_t SharedFcInputDim(const EncoderConfig &cfg) {
  TrunkDims dims = ComputeTrunkDims(cfg, cfg.input_bins, cfg.input_frames);
  int64_t c_last = cfg.trunk_channels[3];
  if (cfg.UsesVlad()) return static_cast<int64_t>(cfg.clusters) * c_last;
  return c_last * dims.w;  // flattened temporal columns
}

// Builds all parameters for the configured variant, deterministically from
// the seed.  The trunk is a stem (7x7/2 conv + 3x3/2 maxpool) followed by
// four stages of bottleneck sub-blocks, each sub-block three convolutions
// (1x1 reduce, 3x3, 1x1 expand) with an identity or projection shortcut.
template <typename T>
ModelParams<T> BuildEncoder(const EncoderConfig &cfg, uint64_t seed) {
  cfg.Validate();
  Rng rng(seed);
  ModelParams<T> p;
  p.cfg = cfg;

  detail::AddConv(&p, "conv1", cfg.trunk_channels[0], 1, 7, 7, &rng);
  detail::AddBatchNorm(&p, "bn1", cfg.trunk_channels[0]);

  int64_t in_c = cfg.trunk_channels[0];
  for (int s = 0; s < 4; ++s) {
    int64_t out_c = cfg.trunk_channels[static_cast<size_t>(s)];
    int64_t mid = detail::BottleneckMid(out_c);
    for (int b = 0; b < cfg.stage_depths[static_cast<size_t>(s)]; ++b) {
      std::string base =
          "stage" + std::to_string(s + 1) + ".block" + std::to_string(b);
      int64_t stride = (s > 0 && b == 0) ? 2 : 1;
      detail::AddConv(&p, base + ".conv1", mid, in_c, 1, 1, &rng);
      detail::AddBatchNorm(&p, base + ".bn1", mid);
      detail::AddConv(&p, base + ".conv2", mid, mid, 3, 3, &rng);
      detail::AddBatchNorm(&p, base + ".bn2", mid);
      detail::AddConv(&p, base + ".conv3", out_c, mid, 1, 1, &rng);
      detail::AddBatchNorm(&p, base + ".bn3", out_c);
      if (stride != 1 || in_c != out_c) {
        detail::AddConv(&p, base + ".proj", out_c, in_c, 1, 1, &rng);
        detail::AddBatchNorm(&p, base + ".proj_bn", out_c);
      }
      in_c = out_c;
    }
  }

  int64_t d_last = cfg.trunk_channels[3];
  for (int t = 0; t < cfg.NumVladLayers(); ++t) {
    std::string base = "vlad" + std::to_string(t);
    Tensor<T> centroids({cfg.clusters, d_last});
    nn::HeUniformInit(&centroids, d_last, &rng);
    vlad::VladParams<T> vp;
    vp.centroids = centroids;
    vlad::InitAssignFromCentroids(&vp, 1.0);
    p.Add(base + ".centroids", std::move(vp.centroids));
    p.Add(base + ".W_a", std::move(vp.assign_w));
    p.Add(base + ".b_a", std::move(vp.assign_b));
  }

  detail::AddLinear(&p, "fc", cfg.embed_dim, SharedFcInputDim(cfg), &rng);
  detail::AddLinear(&p, "classifier", cfg.n_classes, cfg.embed_dim, &rng);
  return p;
}

// ---------------------------------------------------------------------------
// Forward pass.
// ---------------------------------------------------------------------------

template <typename T>
struct Forward {
  typename autograd::Tape<T>::Var *logits = nullptr;
  // Trainable leaves, keyed by parameter name (grad source after Backward).
  std::map<std::string, typename autograd::Tape<T>::Var *> leaves;
  // Final-stage sub-block outputs (before aggregation), for VLAD warm-up.
  std::vector<typename autograd::Tape<T>::Var *> taps;
};

namespace detail {

template <typename T>
typename autograd::Tape<T>::Var *LeafFor(autograd::Tape<T> *tape,
                                         ModelParams<T> *params,
                                         Forward<T> *fwd,
                                         const std::string &name,
                                         bool needs_grad) {
  auto it = fwd->leaves.find(name);
  if (it != fwd->leaves.end()) return it->second;
  auto *leaf = tape->Leaf(params->At(name), needs_grad);
  fwd->leaves.emplace(name, leaf);
  return leaf;
}

template <typename T>
typename autograd::Tape<T>::Var *ApplyBatchNorm(
    autograd::Tape<T> *tape, ModelParams<T> *params, Forward<T> *fwd,
    typename autograd::Tape<T>::Var *x, const std::string &name,
    bool train_mode, bool needs_grad) {
  auto *gamma = LeafFor(tape, params, fwd, name + ".gamma", needs_grad);
  auto *beta = LeafFor(tape, params, fwd, name + ".beta", needs_grad);
  return tape->BatchNorm2d(x, gamma, beta, &params->At(name + ".running_mean"),
                           &params->At(name + ".running_var"), train_mode);
}

template <typename T>
typename autograd::Tape<T>::Var *ApplyBottleneck(
    autograd::Tape<T> *tape, ModelParams<T> *params, Forward<T> *fwd,
    typename autograd::Tape<T>::Var *x, const std::string &base, int64_t stride,
    bool train_mode, bool needs_grad) {
  auto conv = [&](typename autograd::Tape<T>::Var *in, const std::string &name,
                  int64_t s, int64_t pad) {
    auto *w = LeafFor(tape, params, fwd, name + ".w", needs_grad);
    return tape->Conv2d(in, w, nullptr, s, pad);
  };
  auto *h = conv(x, base + ".conv1", 1, 0);
  h = ApplyBatchNorm(tape, params, fwd, h, base + ".bn1", train_mode, needs_grad);
  h = tape->Relu(h);
  h = conv(h, base + ".conv2", stride, 1);
  h = ApplyBatchNorm(tape, params, fwd, h, base + ".bn2", train_mode, needs_grad);
  h = tape->Relu(h);
  h = conv(h, base + ".conv3", 1, 0);
  h = ApplyBatchNorm(tape, params, fwd, h, base + ".bn3", train_mode, needs_grad);

  typename autograd::Tape<T>::Var *shortcut = x;
  if (params->Has(base + ".proj.w")) {
    shortcut = conv(x, base + ".proj", stride, 0);
    shortcut = ApplyBatchNorm(tape, params, fwd, shortcut, base + ".proj_bn",
                              train_mode, needs_grad);
  }
  return tape->Relu(tape->Add(h, shortcut));
}

// Collapse the frequency axis to 1 by max-pooling over it.
template <typename T>
typename autograd::Tape<T>::Var *CollapseFrequency(
    autograd::Tape<T> *tape, typename autograd::Tape<T>::Var *x) {
  return tape->MaxPool2d(x, x->value.dim(2), 1, 1, 1);
}

}  // namespace detail

// Runs the variant-specific forward pass over a batch of normalized
// spectrograms shaped [B, 1, n_bins, n_frames] and returns logits
// [B, n_classes].  In train mode batch-norm running statistics inside
// `params` are updated.  `needs_grad` controls whether the tape records
// backward closures and exposes leaves.
template <typename T>
Forward<T> ForwardLogits(autograd::Tape<T> *tape, ModelParams<T> *params,
                         const Tensor<T> &batch, bool train_mode,
                         bool needs_grad = true) {
  const EncoderConfig &cfg = params->cfg;
  Require(batch.ndim() == 4 && batch.dim(1) == 1, Errc::kShapeMismatch,
          "batch must be [B, 1, bins, frames], got " + batch.ShapeString());
  Require(batch.dim(2) == cfg.input_bins, Errc::kShapeMismatch,
          "bin count mismatch: " + batch.ShapeString());
  if (!cfg.UsesVlad())
    Require(batch.dim(3) == cfg.input_frames, Errc::kShapeMismatch,
            "flatten variants need a fixed frame count");

  Forward<T> fwd;
  auto *x = tape->Leaf(batch, false);

  auto *w1 = detail::LeafFor(tape, params, &fwd, "conv1.w", needs_grad);
  auto *h = tape->Conv2d(x, w1, nullptr, 2, 3);
  h = detail::ApplyBatchNorm(tape, params, &fwd, h, "bn1", train_mode, needs_grad);
  h = tape->Relu(h);
  h = tape->MaxPool2d(h, 3, 3, 2, 2);

  for (int s = 0; s < 4; ++s) {
    for (int b = 0; b < cfg.stage_depths[static_cast<size_t>(s)]; ++b) {
      std::string base =
          "stage" + std::to_string(s + 1) + ".block" + std::to_string(b);
      int64_t stride = (s > 0 && b == 0) ? 2 : 1;
      h = detail::ApplyBottleneck(tape, params, &fwd, h, base, stride,
                                  train_mode, needs_grad);
      if (s == 3) fwd.taps.push_back(h);
    }
  }

  auto *fc_w = detail::LeafFor(tape, params, &fwd, "fc.w", needs_grad);
  auto *fc_b = detail::LeafFor(tape, params, &fwd, "fc.b", needs_grad);
  vlad::VladOptions vopt;
  vopt.intra_norm = cfg.intra_norm;
  vopt.assign = cfg.assign_mode;

  auto embed_tap = [&](typename autograd::Tape<T>::Var *tap, int vlad_index) {
    auto *collapsed = detail::CollapseFrequency(tape, tap);
    typename autograd::Tape<T>::Var *agg;
    if (vlad_index >= 0) {
      std::string base = "vlad" + std::to_string(vlad_index);
      auto *c = detail::LeafFor(tape, params, &fwd, base + ".centroids", needs_grad);
      auto *wa = detail::LeafFor(tape, params, &fwd, base + ".W_a", needs_grad);
      auto *ba = detail::LeafFor(tape, params, &fwd, base + ".b_a", needs_grad);
      agg = tape->NetVlad(tape->ToDescriptors(collapsed), c, wa, ba, vopt);
    } else {
      agg = tape->Flatten(collapsed);
    }
    return tape->Linear(agg, fc_w, fc_b);
  };

  typename autograd::Tape<T>::Var *combined;
  switch (cfg.variant) {
    case Variant::kBaseline1:
      combined = embed_tap(fwd.taps.back(), -1);
      break;
    case Variant::kBaseline2:
      combined = embed_tap(fwd.taps.back(), 0);
      break;
    case Variant::kBaseline3: {
      std::vector<typename autograd::Tape<T>::Var *> embeds;
      for (auto *tap : fwd.taps) embeds.push_back(embed_tap(tap, -1));
      combined = tape->MeanOf(embeds);
      break;
    }
    case Variant::kHvlad: {
      Require(static_cast<int>(fwd.taps.size()) == kNumTaps, Errc::kMissingTap,
              "expected " + std::to_string(kNumTaps) + " taps");
      std::vector<typename autograd::Tape<T>::Var *> embeds;
      for (size_t t = 0; t < fwd.taps.size(); ++t)
        embeds.push_back(embed_tap(fwd.taps[t], static_cast<int>(t)));
      combined = tape->MeanOf(embeds);
      break;
    }
  }

  auto *hrelu = tape->Relu(combined);
  auto *cls_w = detail::LeafFor(tape, params, &fwd, "classifier.w", needs_grad);
  auto *cls_b = detail::LeafFor(tape, params, &fwd, "classifier.b", needs_grad);
  fwd.logits = tape->Linear(hrelu, cls_w, cls_b);
  return fwd;
}

// Elementwise mean of per-tap embeddings after the shared FC layer.
template <typename T>
Tensor<T> HvladCombine(const std::vector<Tensor<T>> &tap_embeddings) {
  Require(static_cast<int>(tap_embeddings.size()) == kNumTaps, Errc::kMissingTap,
          "expected " + std::to_string(kNumTaps) + " tap embeddings");
  Tensor<T> out(tap_embeddings[0].shape());
  for (const auto &e : tap_embeddings) {
    Require(e.SameShape(out), Errc::kShapeMismatch, "tap shape mismatch");
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += e[i];
  }
  T inv = T(1) / static_cast<T>(tap_embeddings.size());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] *= inv;
  return out;
}

// ---------------------------------------------------------------------------
// Plain-text key=value config file.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string JoinInts(const std::vector<int> &v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

inline std::vector<int> SplitInts(const std::string &s) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ','))
    out.push_back(std::stoi(tok));
  return out;
}

}  // namespace detail

inline void SaveModelConfig(const std::filesystem::path &path,
                            const EncoderConfig &enc,
                            const FrontendConfig &frontend) {
  std::ofstream os(path);
  if (!os) Throw(Errc::kIoError, "cannot write: " + path.string());
  os << "variant=" << VariantName(enc.variant) << "\n"
     << "clusters=" << enc.clusters << "\n"
     << "n_classes=" << enc.n_classes << "\n"
     << "trunk_channels=" << detail::JoinInts(enc.trunk_channels) << "\n"
     << "stage_depths=" << detail::JoinInts(enc.stage_depths) << "\n"
     << "embed_dim=" << enc.embed_dim << "\n"
     << "input_bins=" << enc.input_bins << "\n"
     << "input_frames=" << enc.input_frames << "\n"
     << "intra_norm=" << (enc.intra_norm ? 1 : 0) << "\n"
     << "assign_mode="
     << (enc.assign_mode == vlad::AssignMode::kSoft ? "soft" : "unit") << "\n"
     << "sample_rate_hz=" << frontend.sample_rate_hz << "\n"
     << "fft_size=" << frontend.fft_size << "\n"
     << "win_s=" << frontend.win_s << "\n"
     << "hop_s=" << frontend.hop_s << "\n"
     << "crop_s=" << frontend.crop_s << "\n";
  if (!os) Throw(Errc::kIoError, "write failed: " + path.string());
}

inline void LoadModelConfig(const std::filesystem::path &path,
                            EncoderConfig *enc, FrontendConfig *frontend) {
  std::ifstream is(path);
  if (!is) Throw(Errc::kNotFound, "cannot open: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    Require(eq != std::string::npos, Errc::kInvalidConfig,
            path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    try {
      if (key == "variant") enc->variant = ParseVariant(val);
      else if (key == "clusters") enc->clusters = std::stoi(val);
      else if (key == "n_classes") enc->n_classes = std::stoi(val);
      else if (key == "trunk_channels") enc->trunk_channels = detail::SplitInts(val);
      else if (key == "stage_depths") enc->stage_depths = detail::SplitInts(val);
      else if (key == "embed_dim") enc->embed_dim = std::stoi(val);
      else if (key == "input_bins") enc->input_bins = std::stoi(val);
      else if (key == "input_frames") enc->input_frames = std::stoi(val);
      else if (key == "intra_norm") enc->intra_norm = std::stoi(val) != 0;
      else if (key == "assign_mode")
        enc->assign_mode = (val == "unit") ? vlad::AssignMode::kUnit
                                           : vlad::AssignMode::kSoft;
      else if (key == "sample_rate_hz") frontend->sample_rate_hz = std::stoi(val);
      else if (key == "fft_size") frontend->fft_size = std::stoi(val);
      else if (key == "win_s") frontend->win_s = std::stod(val);
      else if (key == "hop_s") frontend->hop_s = std::stod(val);
      else if (key == "crop_s") frontend->crop_s = std::stod(val);
      else
        Throw(Errc::kInvalidConfig, "unknown config key: " + key);
    } catch (const std::invalid_argument &) {
      Throw(Errc::kInvalidConfig, "bad value for " + key + ": " + val);
    }
  }
  enc->Validate();
}

}  // namespace model
}  // namespace hvlad

#endif  // HVLAD_MODEL_HPP_
