// hvlad/traineval.hpp

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

#ifndef HVLAD_TRAINEVAL_HPP_
#define HVLAD_TRAINEVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hvlad/autograd.hpp"
#include "hvlad/checkpoint.hpp"
#include "hvlad/common.hpp"
#include "hvlad/data.hpp"
#include "hvlad/dsp.hpp"
#include "hvlad/model.hpp"
#include "hvlad/nn.hpp"
#include "hvlad/tensor.hpp"

namespace hvlad {
namespace traineval {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Metrics.
// ---------------------------------------------------------------------------

// Fraction of rows whose label ranks within the k highest logits.  Ties are
// broken in favour of the lower class index.
inline double TopkAccuracy(const Tensor<float> &logits,
                           const std::vector<int> &labels, int k) {
  Require(logits.ndim() == 2, Errc::kShapeMismatch, "logits must be 2-d");
  int64_t B = logits.dim(0), N = logits.dim(1);
  Require(k >= 1 && k <= N, Errc::kInvalidInput, "k out of range");
  Require(static_cast<int64_t>(labels.size()) == B, Errc::kShapeMismatch,
          "labels length mismatch");
  int64_t hits = 0;
  for (int64_t n = 0; n < B; ++n) {
    int label = labels[static_cast<size_t>(n)];
    Require(label >= 0 && label < N, Errc::kLabelOutOfRange,
            "label " + std::to_string(label));
    float ref = logits(n, label);
    int64_t rank = 0;  // number of classes ranked ahead of the label
    for (int64_t c = 0; c < N; ++c) {
      if (logits(n, c) > ref || (logits(n, c) == ref && c < label)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(B);
}

// Centered moving average; edge windows are truncated to the valid range.
inline std::vector<double> MovingAverage(const std::vector<double> &series,
                                         int window = 5) {
  if (series.empty()) Throw(Errc::kEmptySeries, "empty series");
  Require(window >= 1 && window % 2 == 1, Errc::kInvalidInput,
          "window must be odd and >= 1");
  int64_t n = static_cast<int64_t>(series.size());
  int64_t half = window / 2;
  std::vector<double> out(series.size());
  for (int64_t i = 0; i < n; ++i) {
    int64_t lo = std::max<int64_t>(0, i - half);
    int64_t hi = std::min<int64_t>(n - 1, i + half);
    double acc = 0.0;
    for (int64_t j = lo; j <= hi; ++j) acc += series[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// Arithmetic mean and sample standard deviation.
inline std::pair<double, double> AggregateMeanStd(
    const std::vector<double> &values) {
  Require(values.size() >= 2, Errc::kTooFewValues,
          "need at least two values for mean/std");
  double sum = 0.0;
  for (double v : values) sum += v;
  double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, std_dev};
}

inline std::string FormatMeanStd(double mean, double std_dev) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean, std_dev);
  return buf;
}

// ---------------------------------------------------------------------------
// Batch assembly.
// ---------------------------------------------------------------------------

// Turns one converted utterance into a normalized [bins, frames] example.
// Audio path: load, resample to the pipeline rate, random crop, STFT.
// Cache path: load the full-utterance spectrogram and crop frames instead.
class ExampleLoader {
 public:
  ExampleLoader(const FrontendConfig &frontend, std::string cache_dir)
      : frontend_(frontend), cache_dir_(std::move(cache_dir)) {
    crop_frames_ = FramesForDuration(frontend_.crop_s, frontend_);
  }

  int64_t crop_frames() const { return crop_frames_; }
  int64_t n_bins() const { return frontend_.fft_size / 2 + 1; }

  static std::string CacheName(size_t record_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "r%06zu.spec", record_index);
    return buf;
  }

  Spectrogram Load(const data::PairingRecord &rec, size_t record_index,
                   Rng *rng) const {
    Require(!rec.converted_path.empty(), Errc::kInvalidInput,
            "record has no converted audio (run convert first): " +
                rec.source_utt);
    Spectrogram cropped;
    if (!cache_dir_.empty()) {
      Spectrogram full =
          LoadSpectrogram(fs::path(cache_dir_) / CacheName(record_index));
      cropped = CropFrames(full, crop_frames_, rng);
    } else {
      Waveform w = LoadWav(rec.converted_path);
      if (w.sample_rate_hz != frontend_.sample_rate_hz)
        w = ResampleLinear(w, frontend_.sample_rate_hz);
      Waveform seg = CropOrPad(w, frontend_.crop_s, rng);
      cropped = StftMagnitude(seg, frontend_);
    }
    return Normalize(cropped);
  }

  // batch(i, 0, bin, frame) = spec_i(frame, bin)
  void FillBatchRow(const Spectrogram &spec, Tensor<float> *batch,
                    int64_t row) const {
    Require(spec.n_frames() == batch->dim(3) && spec.n_bins() == batch->dim(2),
            Errc::kShapeMismatch, "example does not fit batch tensor");
    for (int64_t t = 0; t < spec.n_frames(); ++t)
      for (int64_t f = 0; f < spec.n_bins(); ++f)
        (*batch)(row, 0, f, t) = spec.values(t, f);
  }

 private:
  FrontendConfig frontend_;
  std::string cache_dir_;
  int64_t crop_frames_ = 0;
};

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

struct TrainConfig {
  int batch_size = 32;
  int64_t steps = 1000;
  uint64_t seed = 1;
  int64_t eval_every = 0;  // also the checkpoint cadence; 0 = ends only
  std::string checkpoint_dir;
  nn::AdamConfig adam;  // lr 1e-4 fixed by default
  bool vlad_warmup = true;
  FrontendConfig frontend;
  std::string cache_dir;  // optional spectrogram cache
  bool quiet = false;
};

struct TrainLogEntry {
  int64_t step = 0;
  double loss = 0.0;
  double top1 = 0.0;
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  fs::path final_checkpoint;
  model::ModelParams<float> params;
};

namespace detail {

inline std::vector<size_t> EpochPermutation(size_t n, uint64_t seed,
                                            int64_t epoch) {
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(MixSeed(seed, 0xE19AC000ULL + static_cast<uint64_t>(epoch)));
  rng.Shuffle(&perm);
  return perm;
}

// Deterministic batch for a given step: an epoch-level permutation of the
// train split, consumed batch_size records at a time.
inline void BatchIndices(size_t n_train, int batch_size, uint64_t seed,
                         int64_t step, std::vector<size_t> *out) {
  size_t batches_per_epoch = n_train / static_cast<size_t>(batch_size);
  Require(batches_per_epoch >= 1, Errc::kInvalidConfig,
          "train split smaller than one batch");
  int64_t epoch = step / static_cast<int64_t>(batches_per_epoch);
  size_t pos = static_cast<size_t>(step % static_cast<int64_t>(batches_per_epoch));
  std::vector<size_t> perm = EpochPermutation(n_train, seed, epoch);
  out->assign(perm.begin() + static_cast<ptrdiff_t>(pos * batch_size),
              perm.begin() + static_cast<ptrdiff_t>((pos + 1) * batch_size));
}

// K-means over collapsed trunk descriptors from one batch, applied to every
// VLAD layer.  Keeps early assignments close to the nearest-centroid rule.
inline void VladWarmup(model::ModelParams<float> *params,
                       const Tensor<float> &batch, uint64_t seed) {
  const model::EncoderConfig &cfg = params->cfg;
  if (cfg.NumVladLayers() == 0) return;
  autograd::Tape<float> tape;
  model::Forward<float> fwd = model::ForwardLogits(
      &tape, params, batch, /*train_mode=*/false, /*needs_grad=*/false);

  for (int t = 0; t < cfg.NumVladLayers(); ++t) {
    auto *tap = (cfg.variant == model::Variant::kBaseline2)
                    ? fwd.taps.back()
                    : fwd.taps[static_cast<size_t>(t)];
    const Tensor<float> &feat = tap->value;  // [B, C, H, W]
    int64_t B = feat.dim(0), C = feat.dim(1), H = feat.dim(2), W = feat.dim(3);
    Tensor<float> desc({B * W, C});
    for (int64_t n = 0; n < B; ++n)
      for (int64_t c = 0; c < C; ++c)
        for (int64_t w = 0; w < W; ++w) {
          float mx = feat(n, c, 0, w);
          for (int64_t h = 1; h < H; ++h)
            mx = std::max(mx, feat(n, c, h, w));
          desc(n * W + w, c) = mx;
        }
    Rng rng(MixSeed(seed, 0xC1AD0000ULL + static_cast<uint64_t>(t)));
    if (desc.dim(0) < cfg.clusters) continue;  // batch too small, keep init
    Tensor<float> centroids = vlad::KMeans(desc, cfg.clusters, 10, &rng);
    std::string base = "vlad" + std::to_string(t);
    vlad::VladParams<float> vp;
    vp.centroids = centroids;
    vlad::InitAssignFromCentroids(&vp, 1.0);
    params->At(base + ".centroids") = std::move(vp.centroids);
    params->At(base + ".W_a") = std::move(vp.assign_w);
    params->At(base + ".b_a") = std::move(vp.assign_b);
  }
}

inline std::string CheckpointName(int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%06lld.ckpt",
                static_cast<long long>(step));
  return buf;
}

}  // namespace detail

// Runs (or resumes) training.  Per step: sample a train batch, random-crop,
// normalize, forward, cross-entropy, backward, Adam.  Checkpoints land in
// cfg.checkpoint_dir together with model.cfg and train_log.csv.  A NonFinite
// error aborts after writing diag_nonfinite.ckpt.
inline TrainResult Train(const model::EncoderConfig &enc,
                         const data::PairingManifest &manifest,
                         const TrainConfig &cfg,
                         const fs::path &resume_from = {}) {
  enc.Validate();
  Require(cfg.batch_size >= 1, Errc::kInvalidConfig, "batch_size must be >= 1");
  Require(cfg.steps >= 0, Errc::kInvalidConfig, "steps must be >= 0");
  Require(!cfg.checkpoint_dir.empty(), Errc::kInvalidConfig,
          "checkpoint_dir required");
  fs::create_directories(cfg.checkpoint_dir);

  // Indices of train records within the manifest.
  std::vector<size_t> train_idx;
  for (size_t i = 0; i < manifest.records.size(); ++i)
    if (manifest.records[i].split == "train") train_idx.push_back(i);
  Require(!train_idx.empty(), Errc::kInvalidInput, "manifest has no train split");
  for (size_t i : train_idx)
    Require(manifest.records[i].label >= 0 &&
                manifest.records[i].label < enc.n_classes,
            Errc::kConfigMismatch, "record label outside n_classes");

  ExampleLoader loader(cfg.frontend, cfg.cache_dir);
  Require(loader.n_bins() == enc.input_bins, Errc::kConfigMismatch,
          "front-end bins != encoder input_bins");
  Require(loader.crop_frames() == enc.input_frames, Errc::kConfigMismatch,
          "front-end crop frames != encoder input_frames");

  const int B = cfg.batch_size;
  auto assemble = [&](int64_t step, Tensor<float> *batch,
                      std::vector<int> *labels) {
    std::vector<size_t> idx;
    detail::BatchIndices(train_idx.size(), B, cfg.seed, step, &idx);
    Rng rng(MixSeed(cfg.seed, 0xC409000ULL + static_cast<uint64_t>(step)));
    labels->clear();
    for (int i = 0; i < B; ++i) {
      size_t rec_index = train_idx[idx[static_cast<size_t>(i)]];
      const data::PairingRecord &rec = manifest.records[rec_index];
      Spectrogram spec = loader.Load(rec, rec_index, &rng);
      loader.FillBatchRow(spec, batch, i);
      labels->push_back(rec.label);
    }
  };

  model::ModelParams<float> params = model::BuildEncoder<float>(enc, cfg.seed);
  std::vector<std::string> trainable = params.TrainableNames();
  std::vector<const Tensor<float> *> param_ptrs;
  for (const auto &n : trainable) param_ptrs.push_back(&params.At(n));
  nn::AdamState<float> adam = nn::AdamState<float>::Init(param_ptrs, cfg.adam);

  int64_t start_step = 0;
  Tensor<float> batch({B, 1, enc.input_bins, enc.input_frames});
  std::vector<int> labels;

  if (!resume_from.empty()) {
    adam.cfg = cfg.adam;
    start_step = LoadCheckpoint(resume_from, &params, &adam);
    adam.cfg = cfg.adam;  // run config wins over archived hyperparameters
  } else if (cfg.vlad_warmup && enc.NumVladLayers() > 0 && cfg.steps > 0) {
    assemble(0, &batch, &labels);
    detail::VladWarmup(&params, batch, cfg.seed);
  }

  model::SaveModelConfig(fs::path(cfg.checkpoint_dir) / "model.cfg", enc,
                         cfg.frontend);

  std::ofstream log_os(fs::path(cfg.checkpoint_dir) / "train_log.csv",
                       resume_from.empty() ? std::ios::trunc : std::ios::app);
  if (resume_from.empty()) {
    log_os << "# variant=" << model::VariantName(enc.variant)
           << " clusters=" << enc.clusters << " n_classes=" << enc.n_classes
           << " n_targets=" << manifest.n_targets << " batch=" << B
           << " lr=" << cfg.adam.lr << " seed=" << cfg.seed
           << " crop_s=" << cfg.frontend.crop_s << "\n";
    log_os << "step,loss,top1\n";
  }

  TrainResult result;
  if (start_step == 0) {
    fs::path p = fs::path(cfg.checkpoint_dir) / detail::CheckpointName(0);
    SaveCheckpoint(p, params, &adam, 0);
    result.final_checkpoint = p;
  }

  for (int64_t step = start_step; step < cfg.steps; ++step) {
    try {
      assemble(step, &batch, &labels);
      autograd::Tape<float> tape;
      model::Forward<float> fwd =
          model::ForwardLogits(&tape, &params, batch, /*train_mode=*/true);
      auto *loss_var = tape.SoftmaxCrossEntropy(fwd.logits, labels);
      double loss = loss_var->value[0];
      double top1 = TopkAccuracy(fwd.logits->value, labels, 1);
      tape.Backward(loss_var);

      std::vector<Tensor<float> *> ps;
      std::vector<const Tensor<float> *> gs;
      for (const auto &name : trainable) {
        auto it = fwd.leaves.find(name);
        Require(it != fwd.leaves.end(), Errc::kConfigMismatch,
                "parameter unused in forward pass: " + name);
        ps.push_back(&params.At(name));
        gs.push_back(&it->second->grad);
      }
      nn::AdamStep(ps, gs, &adam);

      result.log.push_back({step + 1, loss, top1});
      log_os << step + 1 << "," << loss << "," << top1 << "\n";
      if (!cfg.quiet && ((step + 1) % 50 == 0 || step + 1 == cfg.steps))
        std::fprintf(stderr, "step %lld loss %.4f top1 %.3f\n",
                     static_cast<long long>(step + 1), loss, top1);

      bool at_eval = cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0;
      if (at_eval || step + 1 == cfg.steps) {
        fs::path p =
            fs::path(cfg.checkpoint_dir) / detail::CheckpointName(step + 1);
        SaveCheckpoint(p, params, &adam, step + 1);
        result.final_checkpoint = p;
      }
    } catch (const Error &e) {
      if (e.code() == Errc::kNonFinite) {
        SaveCheckpoint(fs::path(cfg.checkpoint_dir) / "diag_nonfinite.ckpt",
                       params, &adam, step);
        std::fprintf(stderr, "aborting at step %lld: %s\n",
                     static_cast<long long>(step), e.what());
      }
      throw;
    }
  }
  result.params = std::move(params);
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string split = "test";
  int n_crops = 1;  // logits averaged over crops when > 1
  uint64_t seed = 1;
  int batch_size = 32;
  std::string cache_dir;
};

struct EvalPoint {
  int64_t step = 0;
  double top1 = 0.0;
  double top5 = 0.0;
};

struct EvalReport {
  std::string variant;
  int clusters = 0;
  int n_targets = 0;
  int n_classes = 0;
  std::string split;
  int64_t n_records = 0;
  uint64_t seed = 0;
  int n_runs = 1;
  double top1 = 0.0;
  double top5 = 0.0;
  std::vector<EvalPoint> series;
  std::vector<double> smoothed_top1;
  std::vector<double> smoothed_top5;
  std::string top1_mean_std;  // filled when aggregating >= 2 runs
  std::string top5_mean_std;

  nlohmann::json ToJson() const {
    nlohmann::json series_json = nlohmann::json::array();
    for (const auto &p : series)
      series_json.push_back(
          {{"step", p.step}, {"top1", p.top1}, {"top5", p.top5}});
    return {{"variant", variant},
            {"clusters", clusters},
            {"n_targets", n_targets},
            {"n_classes", n_classes},
            {"split", split},
            {"n_records", n_records},
            {"seed", seed},
            {"n_runs", n_runs},
            {"top1", top1},
            {"top5", top5},
            {"series", series_json},
            {"smoothed_top1", smoothed_top1},
            {"smoothed_top5", smoothed_top5},
            {"top1_mean_std", top1_mean_std},
            {"top5_mean_std", top5_mean_std}};
  }

  static EvalReport FromJson(const nlohmann::json &j) {
    EvalReport r;
    r.variant = j.at("variant").get<std::string>();
    r.clusters = j.at("clusters").get<int>();
    r.n_targets = j.at("n_targets").get<int>();
    r.n_classes = j.at("n_classes").get<int>();
    r.split = j.at("split").get<std::string>();
    r.n_records = j.at("n_records").get<int64_t>();
    r.seed = j.at("seed").get<uint64_t>();
    r.n_runs = j.at("n_runs").get<int>();
    r.top1 = j.at("top1").get<double>();
    r.top5 = j.at("top5").get<double>();
    for (const auto &p : j.at("series"))
      r.series.push_back({p.at("step").get<int64_t>(),
                          p.at("top1").get<double>(),
                          p.at("top5").get<double>()});
    r.smoothed_top1 = j.at("smoothed_top1").get<std::vector<double>>();
    r.smoothed_top5 = j.at("smoothed_top5").get<std::vector<double>>();
    r.top1_mean_std = j.at("top1_mean_std").get<std::string>();
    r.top5_mean_std = j.at("top5_mean_std").get<std::string>();
    return r;
  }
};

inline void SaveReport(const EvalReport &r, const fs::path &path) {
  std::ofstream os(path);
  if (!os) Throw(Errc::kIoError, "cannot write: " + path.string());
  os << r.ToJson().dump(2) << "\n";
}

inline EvalReport LoadReport(const fs::path &path) {
  std::ifstream is(path);
  if (!is) Throw(Errc::kNotFound, "cannot open report: " + path.string());
  try {
    nlohmann::json j;
    is >> j;
    return EvalReport::FromJson(j);
  } catch (const nlohmann::json::exception &e) {
    Throw(Errc::kUnsupportedFormat,
          "malformed report " + path.string() + ": " + e.what());
  }
}

// Eval-mode accuracy of one parameter set over one split.  One seeded crop
// per record (or the mean of n_crops logit evaluations), batched forward,
// side-effect free on `params`.
inline EvalPoint EvaluateParams(model::ModelParams<float> *params,
                                const FrontendConfig &frontend,
                                const data::PairingManifest &manifest,
                                const EvalOptions &opt, int64_t step) {
  const model::EncoderConfig &enc = params->cfg;
  std::vector<size_t> rec_idx;
  for (size_t i = 0; i < manifest.records.size(); ++i)
    if (manifest.records[i].split == opt.split) rec_idx.push_back(i);
  Require(!rec_idx.empty(), Errc::kInvalidInput,
          "no records in split '" + opt.split + "'");
  for (size_t i : rec_idx)
    Require(manifest.records[i].label >= 0 &&
                manifest.records[i].label < enc.n_classes,
            Errc::kConfigMismatch, "record label outside n_classes");

  ExampleLoader loader(frontend, opt.cache_dir);
  Require(loader.n_bins() == enc.input_bins, Errc::kConfigMismatch,
          "front-end bins != encoder input_bins");

  int64_t hits1 = 0, hits5 = 0;
  int64_t n_frames = loader.crop_frames();
  size_t pos = 0;
  while (pos < rec_idx.size()) {
    int64_t b = std::min<int64_t>(opt.batch_size,
                                  static_cast<int64_t>(rec_idx.size() - pos));
    Tensor<float> logits_sum;
    std::vector<int> labels;
    for (int crop = 0; crop < std::max(1, opt.n_crops); ++crop) {
      Tensor<float> batch({b, 1, enc.input_bins, n_frames});
      labels.clear();
      for (int64_t i = 0; i < b; ++i) {
        size_t rec_index = rec_idx[pos + static_cast<size_t>(i)];
        Rng rng(MixSeed(opt.seed, (static_cast<uint64_t>(rec_index) << 8) +
                                      static_cast<uint64_t>(crop)));
        Spectrogram spec =
            loader.Load(manifest.records[rec_index], rec_index, &rng);
        loader.FillBatchRow(spec, &batch, i);
        labels.push_back(manifest.records[rec_index].label);
      }
      autograd::Tape<float> tape;
      model::Forward<float> fwd = model::ForwardLogits(
          &tape, params, batch, /*train_mode=*/false, /*needs_grad=*/false);
      if (crop == 0) {
        logits_sum = fwd.logits->value;
      } else {
        for (int64_t i = 0; i < logits_sum.numel(); ++i)
          logits_sum[i] += fwd.logits->value[i];
      }
    }
    int k5 = std::min<int>(5, enc.n_classes);
    hits1 += static_cast<int64_t>(
        std::llround(TopkAccuracy(logits_sum, labels, 1) * static_cast<double>(b)));
    hits5 += static_cast<int64_t>(std::llround(
        TopkAccuracy(logits_sum, labels, k5) * static_cast<double>(b)));
    pos += static_cast<size_t>(b);
  }

  EvalPoint p;
  p.step = step;
  p.top1 = static_cast<double>(hits1) / static_cast<double>(rec_idx.size());
  p.top5 = static_cast<double>(hits5) / static_cast<double>(rec_idx.size());
  return p;
}

// Evaluates one or more checkpoints sharing a model.cfg; the report's
// headline numbers come from the highest-step checkpoint.
inline EvalReport EvaluateCheckpoints(const std::vector<fs::path> &checkpoints,
                                      const model::EncoderConfig &enc,
                                      const FrontendConfig &frontend,
                                      const data::PairingManifest &manifest,
                                      const EvalOptions &opt) {
  Require(!checkpoints.empty(), Errc::kInvalidInput, "no checkpoints given");
  EvalReport report;
  report.variant = model::VariantName(enc.variant);
  report.clusters = enc.clusters;
  report.n_targets = manifest.n_targets;
  report.n_classes = enc.n_classes;
  report.split = opt.split;
  report.seed = opt.seed;

  for (const auto &ckpt : checkpoints) {
    model::ModelParams<float> params = model::BuildEncoder<float>(enc, 0);
    int64_t step = LoadCheckpoint(ckpt, &params, nullptr);
    EvalPoint p = EvaluateParams(&params, frontend, manifest, opt, step);
    report.series.push_back(p);
  }
  std::sort(report.series.begin(), report.series.end(),
            [](const EvalPoint &a, const EvalPoint &b) { return a.step < b.step; });

  int64_t n_records = 0;
  for (const auto &r : manifest.records)
    if (r.split == opt.split) ++n_records;
  report.n_records = n_records;
  report.top1 = report.series.back().top1;
  report.top5 = report.series.back().top5;

  std::vector<double> t1, t5;
  for (const auto &p : report.series) {
    t1.push_back(p.top1);
    t5.push_back(p.top5);
  }
  report.smoothed_top1 = MovingAverage(t1, 5);
  report.smoothed_top5 = MovingAverage(t5, 5);
  return report;
}

// ---------------------------------------------------------------------------
// Aggregation across runs ("15.38 ± 0.25" style rows).
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string variant;
  int clusters = 0;
  int n_targets = 0;
  int n_runs = 0;
  double top1_mean = 0.0, top1_std = 0.0;
  double top5_mean = 0.0, top5_std = 0.0;
  std::string top1_mean_std;  // percent, two decimals
  std::string top5_mean_std;
};

// Groups reports by (variant, clusters, n_targets) and aggregates final
// top-1/top-5 across runs.  With `group` false, mixed configurations are
// rejected so a single table row cannot silently blend settings.
inline std::vector<ReportRow> AggregateReports(
    const std::vector<EvalReport> &reports, bool group) {
  Require(!reports.empty(), Errc::kInvalidInput, "no reports to aggregate");

  auto key = [](const EvalReport &r) {
    return r.variant + "/" + std::to_string(r.clusters) + "/" +
           std::to_string(r.n_targets);
  };
  if (!group) {
    for (const auto &r : reports)
      Require(key(r) == key(reports.front()), Errc::kConfigMismatch,
              "mixed configurations (" + key(reports.front()) + " vs " +
                  key(r) + "); pass --group to aggregate per configuration");
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalReport *>> groups;
  for (const auto &r : reports) {
    std::string k = key(r);
    if (groups.find(k) == groups.end()) order.push_back(k);
    groups[k].push_back(&r);
  }

  std::vector<ReportRow> rows;
  for (const auto &k : order) {
    const auto &runs = groups[k];
    ReportRow row;
    row.variant = runs.front()->variant;
    row.clusters = runs.front()->clusters;
    row.n_targets = runs.front()->n_targets;
    row.n_runs = static_cast<int>(runs.size());
    std::vector<double> t1, t5;
    for (const auto *r : runs) {
      t1.push_back(100.0 * r->top1);
      t5.push_back(100.0 * r->top5);
    }
    if (t1.size() >= 2) {
      auto [m1, s1] = AggregateMeanStd(t1);
      auto [m5, s5] = AggregateMeanStd(t5);
      row.top1_mean = m1;
      row.top1_std = s1;
      row.top5_mean = m5;
      row.top5_std = s5;
      row.top1_mean_std = FormatMeanStd(m1, s1);
      row.top5_mean_std = FormatMeanStd(m5, s5);
    } else {
      char buf[32];
      row.top1_mean = t1[0];
      row.top5_mean = t5[0];
      std::snprintf(buf, sizeof(buf), "%.2f", t1[0]);
      row.top1_mean_std = buf;
      std::snprintf(buf, sizeof(buf), "%.2f", t5[0]);
      row.top5_mean_std = buf;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string RenderTable(const std::vector<ReportRow> &rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %8s %9s %5s %18s %18s\n", "variant",
                "clusters", "n_targets", "runs", "top1 (%)", "top5 (%)");
  out += line;
  for (const auto &r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %8d %9d %5d %18s %18s\n",
                  r.variant.c_str(), r.clusters, r.n_targets, r.n_runs,
                  r.top1_mean_std.c_str(), r.top5_mean_std.c_str());
    out += line;
  }
  return out;
}

}  // namespace traineval
}  // namespace hvlad

#endif  // HVLAD_TRAINEVAL_HPP_
