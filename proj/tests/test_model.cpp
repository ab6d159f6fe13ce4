// tests/test_model.cpp

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

#include <set>
#include <vector>

#include "hvlad/checkpoint.hpp"
#include "hvlad/model.hpp"
#include "testutil.hpp"

using namespace hvlad;
using model::EncoderConfig;
using model::Variant;
using testutil::TempDir;

namespace {

EncoderConfig TinyConfig(Variant v) {
  EncoderConfig cfg;
  cfg.variant = v;
  cfg.clusters = 3;
  cfg.n_classes = 4;
  cfg.trunk_channels = {2, 2, 2, 2};
  cfg.stage_depths = {2, 3, 3, 3};
  cfg.embed_dim = 8;
  cfg.input_bins = 8;
  cfg.input_frames = 10;
  return cfg;
}

int CountVladLayers(const model::ModelParams<float> &p) {
  int count = 0;
  for (int t = 0; t < 8; ++t)
    if (p.Has("vlad" + std::to_string(t) + ".centroids")) ++count;
  return count;
}

}  // namespace

TEST_CASE("variant structure: vlad layer and shared fc counts", "[model]") {
  EncoderConfig cfg;  // default trunk, K=64, 108 classes
  cfg.input_frames = 248;

  cfg.variant = Variant::kHvlad;
  auto hv = model::BuildEncoder<float>(cfg, 1);
  CHECK(CountVladLayers(hv) == 3);
  CHECK(hv.Has("fc.w"));
  CHECK(hv.Has("vlad0.W_a"));
  CHECK(hv.Has("vlad2.b_a"));
  int fc_count = 0;
  for (const auto &n : hv.names)
    if (n == "fc.w") ++fc_count;
  CHECK(fc_count == 1);

  cfg.variant = Variant::kBaseline2;
  auto b2 = model::BuildEncoder<float>(cfg, 1);
  CHECK(CountVladLayers(b2) == 1);

  cfg.variant = Variant::kBaseline1;
  auto b1 = model::BuildEncoder<float>(cfg, 1);
  CHECK(CountVladLayers(b1) == 0);

  cfg.variant = Variant::kBaseline3;
  auto b3 = model::BuildEncoder<float>(cfg, 1);
  CHECK(CountVladLayers(b3) == 0);
}

TEST_CASE("parameter counts grow from baseline1 to hvlad", "[model]") {
  EncoderConfig cfg;
  cfg.input_frames = 248;
  cfg.variant = Variant::kBaseline1;
  int64_t c1 = model::BuildEncoder<float>(cfg, 1).ParameterCount();
  cfg.variant = Variant::kBaseline2;
  int64_t c2 = model::BuildEncoder<float>(cfg, 1).ParameterCount();
  cfg.variant = Variant::kHvlad;
  int64_t ch = model::BuildEncoder<float>(cfg, 1).ParameterCount();
  CHECK(ch > c2);
  CHECK(c2 > c1);
}

TEST_CASE("build is deterministic in the seed", "[model]") {
  EncoderConfig cfg = TinyConfig(Variant::kHvlad);
  auto a = model::BuildEncoder<float>(cfg, 42);
  auto b = model::BuildEncoder<float>(cfg, 42);
  auto c = model::BuildEncoder<float>(cfg, 43);
  REQUIRE(a.names == b.names);
  for (const auto &n : a.names) REQUIRE(a.At(n).vec() == b.At(n).vec());
  bool any_diff = false;
  for (const auto &n : a.names)
    if (a.At(n).vec() != c.At(n).vec()) any_diff = true;
  REQUIRE(any_diff);
}

TEST_CASE("forward produces finite logits of the right shape", "[model]") {
  for (Variant v : {Variant::kBaseline1, Variant::kBaseline2,
                    Variant::kBaseline3, Variant::kHvlad}) {
    EncoderConfig cfg = TinyConfig(v);
    cfg.n_classes = 108;
    auto params = model::BuildEncoder<float>(cfg, 3);
    Rng rng(4);
    Tensor<float> batch({2, 1, cfg.input_bins, cfg.input_frames});
    testutil::FillNormal(&batch, &rng);
    autograd::Tape<float> tape;
    auto fwd = model::ForwardLogits(&tape, &params, batch, true);
    REQUIRE(fwd.logits->value.dim(0) == 2);
    REQUIRE(fwd.logits->value.dim(1) == 108);
    REQUIRE(fwd.logits->value.AllFinite());
  }
}

TEST_CASE("aggregation head ignores temporal order", "[model]") {
  // Trunk bypassed: descriptors fed straight into the vlad + shared-FC head.
  EncoderConfig cfg = TinyConfig(Variant::kBaseline2);
  auto params = model::BuildEncoder<float>(cfg, 5);
  const int64_t C = cfg.trunk_channels[3], W = 7;

  Rng rng(6);
  Tensor<float> feat({1, C, 1, W});
  testutil::FillNormal(&feat, &rng);
  std::vector<int> perm = {4, 2, 6, 0, 3, 5, 1};
  Tensor<float> shuffled({1, C, 1, W});
  for (int64_t c = 0; c < C; ++c)
    for (int64_t w = 0; w < W; ++w)
      shuffled(0, c, 0, w) = feat(0, c, 0, perm[size_t(w)]);

  auto embed = [&](const Tensor<float> &f) {
    autograd::Tape<float> tape;
    auto *fv = tape.Leaf(f, false);
    auto *c0 = tape.Leaf(params.At("vlad0.centroids"), false);
    auto *wa = tape.Leaf(params.At("vlad0.W_a"), false);
    auto *ba = tape.Leaf(params.At("vlad0.b_a"), false);
    auto *fcw = tape.Leaf(params.At("fc.w"), false);
    auto *fcb = tape.Leaf(params.At("fc.b"), false);
    vlad::VladOptions opt;
    auto *v = tape.NetVlad(tape.ToDescriptors(fv), c0, wa, ba, opt);
    return tape.Linear(v, fcw, fcb)->value;
  };
  Tensor<float> e1 = embed(feat);
  Tensor<float> e2 = embed(shuffled);
  REQUIRE(testutil::MaxAbsDiff(e1, e2) < 1e-6);
}

TEST_CASE("eval forward duplicates batch rows bit-identically", "[model]") {
  EncoderConfig cfg = TinyConfig(Variant::kHvlad);
  auto params = model::BuildEncoder<float>(cfg, 7);
  Rng rng(8);
  Tensor<float> one({1, 1, cfg.input_bins, cfg.input_frames});
  testutil::FillNormal(&one, &rng);
  Tensor<float> dup({3, 1, cfg.input_bins, cfg.input_frames});
  for (int64_t n = 0; n < 3; ++n)
    for (int64_t i = 0; i < one.numel(); ++i) dup[n * one.numel() + i] = one[i];

  autograd::Tape<float> t1, t2;
  auto f1 = model::ForwardLogits(&t1, &params, one, false, false);
  auto f2 = model::ForwardLogits(&t2, &params, dup, false, false);
  for (int64_t n = 0; n < 3; ++n)
    for (int64_t j = 0; j < cfg.n_classes; ++j)
      REQUIRE(f2.logits->value(n, j) == f1.logits->value(0, j));
}

TEST_CASE("eval forward leaves parameters untouched", "[model]") {
  EncoderConfig cfg = TinyConfig(Variant::kHvlad);
  auto params = model::BuildEncoder<float>(cfg, 9);
  std::map<std::string, std::vector<float>> before;
  for (const auto &n : params.names) before[n] = params.At(n).vec();
  Rng rng(10);
  Tensor<float> batch({2, 1, cfg.input_bins, cfg.input_frames});
  testutil::FillNormal(&batch, &rng);
  autograd::Tape<float> tape;
  model::ForwardLogits(&tape, &params, batch, /*train_mode=*/false, false);
  for (const auto &n : params.names) REQUIRE(params.At(n).vec() == before[n]);
}

TEST_CASE("hvlad_combine averages tap embeddings", "[model]") {
  Rng rng(11);
  Tensor<float> e({2, 5});
  testutil::FillNormal(&e, &rng);

  SECTION("three identical taps") {
    Tensor<float> out = model::HvladCombine<float>({e, e, e});
    REQUIRE(testutil::MaxAbsDiff(out, e) < 1e-6);  // (3e)/3 rounds one ulp
  }
  SECTION("cancelling taps") {
    Tensor<float> neg(e.shape()), zero(e.shape());
    for (int64_t i = 0; i < e.numel(); ++i) neg[i] = -e[i];
    Tensor<float> out = model::HvladCombine<float>({e, neg, zero});
    for (int64_t i = 0; i < out.numel(); ++i)
      REQUIRE(out[i] == Catch::Approx(0.0).margin(1e-7));
  }
  SECTION("random taps against the scalar mean") {
    Tensor<float> a({2, 5}), b({2, 5}), c({2, 5});
    testutil::FillNormal(&a, &rng);
    testutil::FillNormal(&b, &rng);
    testutil::FillNormal(&c, &rng);
    Tensor<float> out = model::HvladCombine<float>({a, b, c});
    for (int64_t i = 0; i < out.numel(); ++i)
      REQUIRE(out[i] ==
              Catch::Approx((a[i] + b[i] + c[i]) / 3.0).margin(1e-7));
  }
  SECTION("missing tap") {
    CHECK_THROWS_MATCHES(model::HvladCombine<float>({e, e}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error &e2) {
                           return e2.code() == Errc::kMissingTap;
                         }));
  }
}

TEST_CASE("tiny hvlad model passes an end-to-end gradient check", "[model]") {
  EncoderConfig cfg = TinyConfig(Variant::kHvlad);
  auto params = model::BuildEncoder<float>(cfg, 12).Cast<double>();
  Rng rng(13);
  Tensor<double> batch({2, 1, cfg.input_bins, cfg.input_frames});
  testutil::FillNormal(&batch, &rng);
  std::vector<int> labels = {1, 3};

  std::vector<std::string> names = params.TrainableNames();
  std::vector<Tensor<double> *> ptrs;
  for (const auto &n : names) ptrs.push_back(&params.At(n));

  auto run = [&](std::vector<Tensor<double>> *grads) {
    autograd::Tape<double> tape;
    auto fwd = model::ForwardLogits(&tape, &params, batch, /*train_mode=*/true,
                                    grads != nullptr);
    auto *loss = tape.SoftmaxCrossEntropy(fwd.logits, labels);
    if (grads != nullptr) {
      tape.Backward(loss);
      grads->clear();
      for (const auto &n : names) grads->push_back(fwd.leaves.at(n)->grad);
    }
    return static_cast<double>(loss->value[0]);
  };
  auto loss_fn = [&]() { return run(nullptr); };
  auto grad_fn = [&]() {
    std::vector<Tensor<double>> g;
    run(&g);
    return g;
  };
  autograd::GradCheckOptions opt;
  opt.delta = 1e-4;
  opt.extra_deltas = {1e-6};
  opt.max_coords_per_tensor = 4;
  double err = autograd::GradCheck(loss_fn, grad_fn, ptrs, opt);
  REQUIRE(err < 1e-3);
}

TEST_CASE("model config file round trip", "[model]") {
  TempDir tmp("model_cfg");
  EncoderConfig enc = TinyConfig(Variant::kBaseline3);
  enc.intra_norm = false;
  enc.assign_mode = vlad::AssignMode::kUnit;
  FrontendConfig fe;
  fe.sample_rate_hz = 8000;
  fe.crop_s = 1.0;
  auto p = tmp.path() / "model.cfg";
  model::SaveModelConfig(p, enc, fe);

  EncoderConfig enc2;
  FrontendConfig fe2;
  model::LoadModelConfig(p, &enc2, &fe2);
  CHECK(enc2.variant == enc.variant);
  CHECK(enc2.clusters == enc.clusters);
  CHECK(enc2.n_classes == enc.n_classes);
  CHECK(enc2.trunk_channels == enc.trunk_channels);
  CHECK(enc2.stage_depths == enc.stage_depths);
  CHECK(enc2.embed_dim == enc.embed_dim);
  CHECK(enc2.input_bins == enc.input_bins);
  CHECK(enc2.input_frames == enc.input_frames);
  CHECK(enc2.intra_norm == enc.intra_norm);
  CHECK(enc2.assign_mode == enc.assign_mode);
  CHECK(fe2.sample_rate_hz == 8000);
  CHECK(fe2.crop_s == 1.0);
}

TEST_CASE("invalid configs are rejected", "[model]") {
  EncoderConfig cfg = TinyConfig(Variant::kHvlad);
  cfg.stage_depths = {2, 3, 3, 2};  // tapped variant needs 3 final sub-blocks
  CHECK_THROWS_MATCHES(model::BuildEncoder<float>(cfg, 1), Error,
                       Catch::Matchers::Predicate<Error>([](const Error &e) {
                         return e.code() == Errc::kInvalidConfig;
                       }));
  EncoderConfig bad = TinyConfig(Variant::kBaseline1);
  bad.clusters = 1;
  CHECK_THROWS(model::BuildEncoder<float>(bad, 1));
}

TEST_CASE("checkpoint round trip is bitwise", "[model]") {
  TempDir tmp("ckpt_rt");
  EncoderConfig cfg = TinyConfig(Variant::kHvlad);
  auto params = model::BuildEncoder<float>(cfg, 21);
  std::vector<const Tensor<float> *> ptrs;
  for (const auto &n : params.TrainableNames()) ptrs.push_back(&params.At(n));
  nn::AdamState<float> adam = nn::AdamState<float>::Init(ptrs, {});
  Rng rng(22);
  for (auto &m : adam.m) testutil::FillNormal(&m, &rng, 0.01);
  for (auto &v : adam.v) testutil::FillNormal(&v, &rng, 0.001);
  adam.t = 57;

  auto p = tmp.path() / "a.ckpt";
  SaveCheckpoint(p, params, &adam, 57);

  std::string bytes = testutil::ReadFileBytes(p);
  REQUIRE(bytes.substr(0, 7) == "HVCKPT1");

  auto params2 = model::BuildEncoder<float>(cfg, 99);  // different init
  std::vector<const Tensor<float> *> ptrs2;
  for (const auto &n : params2.TrainableNames()) ptrs2.push_back(&params2.At(n));
  nn::AdamState<float> adam2 = nn::AdamState<float>::Init(ptrs2, {});
  int64_t step = LoadCheckpoint(p, &params2, &adam2);
  REQUIRE(step == 57);
  REQUIRE(adam2.t == 57);
  for (const auto &n : params.names)
    REQUIRE(params2.At(n).vec() == params.At(n).vec());
  for (size_t i = 0; i < adam.m.size(); ++i) {
    REQUIRE(adam2.m[i].vec() == adam.m[i].vec());
    REQUIRE(adam2.v[i].vec() == adam.v[i].vec());
  }

  // Mismatched architecture must be refused.
  EncoderConfig other = TinyConfig(Variant::kHvlad);
  other.embed_dim = 16;
  auto params3 = model::BuildEncoder<float>(other, 1);
  CHECK_THROWS_MATCHES(LoadCheckpoint(p, &params3, nullptr), Error,
                       Catch::Matchers::Predicate<Error>([](const Error &e) {
                         return e.code() == Errc::kConfigMismatch;
                       }));
}
