// tests/test_traineval.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <vector>

#include "hvlad/svg.hpp"
#include "hvlad/synth.hpp"
#include "hvlad/traineval.hpp"
#include "testutil.hpp"

using namespace hvlad;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path manifest_path;
  data::PairingManifest manifest;
  model::EncoderConfig enc;
  traineval::TrainConfig train;
};

// Small 4-speaker corpus with in-process conversion (dominant target plus a
// strong source trace so a tiny model can overfit quickly).
Fixture MakeFixture(const fs::path &dir, int n_test, uint64_t seed = 1) {
  synth::SynthConfig sc;
  sc.n_speakers = 4;
  sc.utts_per_speaker = 6;
  sc.duration_s = 0.7;
  sc.sample_rate_hz = 8000;
  sc.seed = seed;
  synth::MakeSyntheticCorpus(dir / "corpus", sc);

  data::CorpusIndex index = data::ScanCorpus(dir / "corpus", {});
  data::PairingManifest m = data::BuildPairingManifest(index, 6, 1, seed);
  data::SplitTrainTest(&m, static_cast<int64_t>(m.records.size()) - n_test,
                       n_test, seed);

  fs::create_directories(dir / "conv");
  for (size_t i = 0; i < m.records.size(); ++i) {
    auto &rec = m.records[i];
    Waveform src = LoadWav(rec.source_utt);
    std::vector<Waveform> targets;
    for (const auto &t : rec.target_utts) targets.push_back(LoadWav(t));
    Waveform conv = synth::WarpConvert(src, targets, 0.5, 1.02);
    char name[32];
    std::snprintf(name, sizeof(name), "c%06zu.wav", i);
    SaveWav(dir / "conv" / name, conv);
    rec.converted_path = (dir / "conv" / name).string();
  }
  Fixture f;
  f.manifest_path = dir / "m.jsonl";
  data::SaveManifest(m, f.manifest_path);
  f.manifest = m;

  f.train.frontend.sample_rate_hz = 8000;
  f.train.frontend.crop_s = 0.5;
  f.train.batch_size = 8;
  f.train.seed = seed;
  f.train.adam.lr = 1e-3;
  f.train.quiet = true;

  f.enc.variant = model::Variant::kHvlad;
  f.enc.clusters = 2;
  f.enc.n_classes = 4;
  f.enc.trunk_channels = {2, 2, 4, 4};
  f.enc.stage_depths = {1, 1, 1, 3};
  f.enc.embed_dim = 16;
  f.enc.input_bins = 257;
  f.enc.input_frames = static_cast<int>(
      FramesForDuration(f.train.frontend.crop_s, f.train.frontend));
  return f;
}

std::vector<float> TrainableBlob(const model::ModelParams<float> &p) {
  std::vector<float> out;
  for (const auto &n : p.TrainableNames()) {
    const auto &v = p.At(n).vec();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

TEST_CASE("topk accuracy basics", "[traineval]") {
  SECTION("one-hot logits give perfect top1") {
    Tensor<float> logits({3, 5});
    std::vector<int> labels = {2, 0, 4};
    for (int64_t i = 0; i < 3; ++i) logits(i, labels[size_t(i)]) = 5.0f;
    REQUIRE(traineval::TopkAccuracy(logits, labels, 1) == 1.0);
  }
  SECTION("top5 never below top1") {
    Rng rng(1);
    for (int c = 0; c < 20; ++c) {
      Tensor<float> logits({6, 12});
      testutil::FillNormal(&logits, &rng);
      std::vector<int> labels;
      for (int i = 0; i < 6; ++i)
        labels.push_back(static_cast<int>(rng.UniformInt(12)));
      double t1 = traineval::TopkAccuracy(logits, labels, 1);
      double t5 = traineval::TopkAccuracy(logits, labels, 5);
      REQUIRE(t5 >= t1);
    }
  }
  SECTION("hand-enumerated batch of four") {
    // Rankings: row0 label ranks 1st; row1 ranks 3rd; row2 ranks 2nd;
    // row3 ranks 4th.
    Tensor<float> logits({4, 4}, {9, 1, 2, 3,   // label 0 -> rank 0
                                  5, 4, 9, 8,   // label 1 -> rank 2
                                  3, 7, 5, 1,   // label 2 -> rank 1
                                  9, 8, 7, 6}); // label 3 -> rank 3
    std::vector<int> labels = {0, 1, 2, 3};
    REQUIRE(traineval::TopkAccuracy(logits, labels, 1) == 0.25);
    REQUIRE(traineval::TopkAccuracy(logits, labels, 2) == 0.5);
    REQUIRE(traineval::TopkAccuracy(logits, labels, 3) == 0.75);
    REQUIRE(traineval::TopkAccuracy(logits, labels, 4) == 1.0);
  }
  SECTION("ties rank the lower class index first") {
    Tensor<float> logits({1, 3}, {1.0f, 1.0f, 0.0f});
    REQUIRE(traineval::TopkAccuracy(logits, {0}, 1) == 1.0);
    REQUIRE(traineval::TopkAccuracy(logits, {1}, 1) == 0.0);
    REQUIRE(traineval::TopkAccuracy(logits, {1}, 2) == 1.0);
  }
  SECTION("label out of range") {
    Tensor<float> logits({1, 3});
    CHECK_THROWS_MATCHES(traineval::TopkAccuracy(logits, {3}, 1), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e) {
                           return e.code() == Errc::kLabelOutOfRange;
                         }));
  }
}

TEST_CASE("moving average", "[traineval]") {
  SECTION("constant series is unchanged") {
    std::vector<double> s(9, 3.25);
    REQUIRE(traineval::MovingAverage(s, 5) == s);
  }
  SECTION("impulse spreads over the window") {
    std::vector<double> s = {0, 0, 5, 0, 0};
    std::vector<double> out = traineval::MovingAverage(s, 5);
    REQUIRE(out[2] == Catch::Approx(1.0));
    REQUIRE(out[0] == Catch::Approx(5.0 / 3.0));  // truncated edge window
    REQUIRE(out[1] == Catch::Approx(5.0 / 4.0));
    REQUIRE(out[3] == Catch::Approx(5.0 / 4.0));
    REQUIRE(out[4] == Catch::Approx(5.0 / 3.0));
  }
  SECTION("random series against a direct loop") {
    Rng rng(2);
    std::vector<double> s;
    for (int i = 0; i < 23; ++i) s.push_back(rng.Normal());
    std::vector<double> out = traineval::MovingAverage(s, 7);
    for (int i = 0; i < 23; ++i) {
      int lo = std::max(0, i - 3), hi = std::min(22, i + 3);
      double acc = 0;
      for (int j = lo; j <= hi; ++j) acc += s[size_t(j)];
      REQUIRE(out[size_t(i)] == Catch::Approx(acc / (hi - lo + 1)));
    }
  }
  SECTION("window must be odd, series non-empty") {
    CHECK_THROWS(traineval::MovingAverage({1.0, 2.0}, 4));
    CHECK_THROWS_MATCHES(traineval::MovingAverage({}, 5), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e) {
                           return e.code() == Errc::kEmptySeries;
                         }));
  }
}

TEST_CASE("mean and spread aggregation", "[traineval]") {
  SECTION("table-style rendering") {
    auto [mean, sd] = traineval::AggregateMeanStd({15.13, 15.38, 15.63});
    REQUIRE(mean == Catch::Approx(15.38).margin(1e-9));
    REQUIRE(sd == Catch::Approx(0.25).margin(1e-9));
    REQUIRE(traineval::FormatMeanStd(mean, sd) == "15.38 ± 0.25");
  }
  SECTION("identical values have zero spread") {
    auto [mean, sd] = traineval::AggregateMeanStd({7.5, 7.5, 7.5, 7.5});
    REQUIRE(mean == 7.5);
    REQUIRE(sd == 0.0);
  }
  SECTION("formatter") {
    REQUIRE(traineval::FormatMeanStd(1.39, 0.18) == "1.39 ± 0.18");
  }
  SECTION("needs at least two values") {
    CHECK_THROWS_MATCHES(traineval::AggregateMeanStd({1.0}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e) {
                           return e.code() == Errc::kTooFewValues;
                         }));
  }
  SECTION("order and grouping invariant") {
    auto a = traineval::AggregateMeanStd({1.0, 2.0, 3.0, 4.0});
    auto b = traineval::AggregateMeanStd({4.0, 2.0, 1.0, 3.0});
    REQUIRE(a.first == b.first);
    REQUIRE(a.second == Catch::Approx(b.second).margin(1e-12));
  }
}

TEST_CASE("zero learning rate leaves trainable parameters unchanged",
          "[traineval]") {
  TempDir tmp("lr0");
  Fixture f = MakeFixture(tmp.path(), 0);
  f.train.adam.lr = 0.0;
  f.train.steps = 3;
  f.train.checkpoint_dir = (tmp.path() / "ckpt").string();
  traineval::TrainResult r = traineval::Train(f.enc, f.manifest, f.train);

  auto initial = model::BuildEncoder<float>(f.enc, f.train.seed);
  nn::AdamState<float> adam;
  std::vector<const Tensor<float> *> ptrs;
  for (const auto &n : initial.TrainableNames()) ptrs.push_back(&initial.At(n));
  adam = nn::AdamState<float>::Init(ptrs, f.train.adam);
  LoadCheckpoint(tmp.path() / "ckpt" / "step_000000.ckpt", &initial, &adam);
  REQUIRE(TrainableBlob(r.params) == TrainableBlob(initial));
}

TEST_CASE("training trajectories are deterministic and resumable",
          "[traineval]") {
  TempDir tmp("resume");
  Fixture f = MakeFixture(tmp.path(), 0);
  f.train.steps = 6;
  f.train.eval_every = 3;

  f.train.checkpoint_dir = (tmp.path() / "full").string();
  traineval::Train(f.enc, f.manifest, f.train);

  f.train.checkpoint_dir = (tmp.path() / "partial").string();
  f.train.steps = 3;
  traineval::Train(f.enc, f.manifest, f.train);
  f.train.steps = 6;
  traineval::Train(f.enc, f.manifest, f.train,
                   tmp.path() / "partial" / "step_000003.ckpt");

  auto full = testutil::ReadFileBytes(tmp.path() / "full" / "step_000006.ckpt");
  auto resumed =
      testutil::ReadFileBytes(tmp.path() / "partial" / "step_000006.ckpt");
  REQUIRE(!full.empty());
  REQUIRE(full == resumed);

  // And a same-seed rerun is bit-identical end to end.
  f.train.checkpoint_dir = (tmp.path() / "again").string();
  traineval::Train(f.enc, f.manifest, f.train);
  auto again = testutil::ReadFileBytes(tmp.path() / "again" / "step_000006.ckpt");
  REQUIRE(full == again);
}

TEST_CASE("training reduces loss across seeds", "[traineval]") {
  TempDir tmp("lossdown");
  Fixture f = MakeFixture(tmp.path(), 0);
  f.train.steps = 50;
  f.train.batch_size = 16;
  int improved = 0;
  const int kSeeds = 10;
  for (int s = 0; s < kSeeds; ++s) {
    f.train.seed = 100 + static_cast<uint64_t>(s);
    f.train.checkpoint_dir = (tmp.path() / ("run" + std::to_string(s))).string();
    traineval::TrainResult r = traineval::Train(f.enc, f.manifest, f.train);
    REQUIRE(r.log.size() == 50);
    double head = 0, tail = 0;
    for (int i = 0; i < 10; ++i) {
      head += r.log[size_t(i)].loss;
      tail += r.log[r.log.size() - 1 - size_t(i)].loss;
    }
    if (tail < head) ++improved;
  }
  REQUIRE(improved >= 9);  // 90% of seeds
}

TEST_CASE("non-finite training aborts with a diagnostic checkpoint",
          "[traineval]") {
  TempDir tmp("nonfinite");
  Fixture f = MakeFixture(tmp.path(), 0);
  f.train.adam.lr = 1e30;  // guaranteed blow-up
  f.train.steps = 30;
  f.train.checkpoint_dir = (tmp.path() / "ckpt").string();
  bool aborted = false;
  try {
    traineval::Train(f.enc, f.manifest, f.train);
  } catch (const Error &e) {
    aborted = (e.code() == Errc::kNonFinite);
  }
  REQUIRE(aborted);
  REQUIRE(fs::exists(tmp.path() / "ckpt" / "diag_nonfinite.ckpt"));
}

TEST_CASE("overfit on the synthetic set reaches high train accuracy",
          "[traineval]") {
  TempDir tmp("overfit");
  Fixture f = MakeFixture(tmp.path(), 0);
  f.train.steps = 220;
  f.train.checkpoint_dir = (tmp.path() / "ckpt").string();
  traineval::TrainResult r = traineval::Train(f.enc, f.manifest, f.train);

  traineval::EvalOptions opt;
  opt.split = "train";
  opt.seed = 5;
  traineval::EvalReport report = traineval::EvaluateCheckpoints(
      {r.final_checkpoint}, f.enc, f.train.frontend, f.manifest, opt);
  INFO("train top1 " << report.top1);
  REQUIRE(report.top1 >= 0.95);
  REQUIRE(report.top5 >= report.top1);

  SECTION("evaluation is deterministic and side-effect free") {
    auto params = model::BuildEncoder<float>(f.enc, 0);
    LoadCheckpoint(r.final_checkpoint, &params, nullptr);
    std::vector<float> before = TrainableBlob(params);
    traineval::EvalPoint p1 =
        traineval::EvaluateParams(&params, f.train.frontend, f.manifest, opt, 0);
    std::vector<float> after = TrainableBlob(params);
    REQUIRE(before == after);
    traineval::EvalPoint p2 =
        traineval::EvaluateParams(&params, f.train.frontend, f.manifest, opt, 0);
    REQUIRE(p1.top1 == p2.top1);
    REQUIRE(p1.top5 == p2.top5);
  }
}

TEST_CASE("training works from a spectrogram cache", "[traineval]") {
  TempDir tmp("cachetrain");
  Fixture f = MakeFixture(tmp.path(), 0);

  // Extract full-utterance spectrograms.
  fs::path cache = tmp.path() / "cache";
  fs::create_directories(cache);
  for (size_t i = 0; i < f.manifest.records.size(); ++i) {
    Waveform w = LoadWav(f.manifest.records[i].converted_path);
    Spectrogram s = StftMagnitude(w, f.train.frontend);
    SaveSpectrogram(cache / traineval::ExampleLoader::CacheName(i), s);
  }

  f.train.steps = 4;
  f.train.cache_dir = cache.string();
  f.train.checkpoint_dir = (tmp.path() / "a").string();
  traineval::TrainResult a = traineval::Train(f.enc, f.manifest, f.train);
  f.train.checkpoint_dir = (tmp.path() / "b").string();
  traineval::TrainResult b = traineval::Train(f.enc, f.manifest, f.train);
  REQUIRE(TrainableBlob(a.params) == TrainableBlob(b.params));
}

TEST_CASE("report aggregation groups and formats runs", "[traineval]") {
  auto mk = [](const std::string &variant, int k, double top1, double top5) {
    traineval::EvalReport r;
    r.variant = variant;
    r.clusters = k;
    r.n_targets = 1;
    r.top1 = top1;
    r.top5 = top5;
    r.series.push_back({100, top1, top5});
    r.smoothed_top1 = {top1};
    r.smoothed_top5 = {top5};
    return r;
  };
  SECTION("three runs of one setting make one row") {
    std::vector<traineval::EvalReport> runs = {
        mk("hvlad", 64, 0.1513, 0.20), mk("hvlad", 64, 0.1538, 0.21),
        mk("hvlad", 64, 0.1563, 0.22)};
    auto rows = traineval::AggregateReports(runs, false);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].n_runs == 3);
    REQUIRE(rows[0].top1_mean_std == "15.38 ± 0.25");
    std::string table = traineval::RenderTable(rows);
    REQUIRE(table.find("15.38 ± 0.25") != std::string::npos);
  }
  SECTION("mixed settings need --group") {
    std::vector<traineval::EvalReport> runs = {mk("hvlad", 64, 0.15, 0.2),
                                               mk("baseline2", 64, 0.14, 0.2)};
    CHECK_THROWS_MATCHES(traineval::AggregateReports(runs, false), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e) {
                           return e.code() == Errc::kConfigMismatch;
                         }));
    auto rows = traineval::AggregateReports(runs, true);
    REQUIRE(rows.size() == 2);
  }
}

TEST_CASE("svg plot renders one polyline per series", "[traineval]") {
  TempDir tmp("svg");
  std::vector<svg::Series> series;
  for (int s = 0; s < 3; ++s) {
    svg::Series ser;
    ser.name = "K=" + std::to_string(32 << s);
    for (int i = 0; i <= 10; ++i) {
      ser.x.push_back(i * 100.0);
      ser.y.push_back(10.0 + s + i * 0.4);
    }
    series.push_back(ser);
  }
  auto p = tmp.path() / "plot.svg";
  svg::LinePlot(p, "sweep", "step", "top-1 (%)", series);
  std::string content = testutil::ReadFileBytes(p);
  REQUIRE(content.find("<svg") != std::string::npos);
  size_t count = 0, pos = 0;
  while ((pos = content.find("<polyline", pos)) != std::string::npos) {
    ++count;
    pos += 9;
  }
  REQUIRE(count == 3);
}

TEST_CASE("eval report json round trip", "[traineval]") {
  TempDir tmp("report_rt");
  traineval::EvalReport r;
  r.variant = "hvlad";
  r.clusters = 8;
  r.n_targets = 1;
  r.n_classes = 10;
  r.split = "test";
  r.n_records = 80;
  r.seed = 3;
  r.top1 = 0.45;
  r.top5 = 0.9;
  r.series = {{100, 0.3, 0.7}, {200, 0.45, 0.9}};
  r.smoothed_top1 = {0.3, 0.45};
  r.smoothed_top5 = {0.7, 0.9};
  auto p = tmp.path() / "r.json";
  traineval::SaveReport(r, p);
  traineval::EvalReport q = traineval::LoadReport(p);
  REQUIRE(q.variant == r.variant);
  REQUIRE(q.clusters == r.clusters);
  REQUIRE(q.top1 == r.top1);
  REQUIRE(q.series.size() == 2);
  REQUIRE(q.series[1].step == 200);
  REQUIRE(q.smoothed_top5 == r.smoothed_top5);
}
