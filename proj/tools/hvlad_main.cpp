// tools/hvlad_main.cpp

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

// Pipeline driver.  Subcommands: pair, convert, extract, train, eval,
// report, synth.  Exit codes: 0 ok, 2 bad arguments, 3 corpus errors,
// 4 numerical abort during training, 5 config/checkpoint mismatch,
// 1 anything else.  stdout carries data, stderr diagnostics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hvlad/checkpoint.hpp"
#include "hvlad/common.hpp"
#include "hvlad/data.hpp"
#include "hvlad/dsp.hpp"
#include "hvlad/model.hpp"
#include "hvlad/svg.hpp"
#include "hvlad/synth.hpp"
#include "hvlad/traineval.hpp"

namespace fs = std::filesystem;
using namespace hvlad;

namespace {

struct PairArgs {
  std::string corpus, out;
  int n_per_speaker = 100;
  int n_targets = 1;
  uint64_t seed = 1;
  int64_t n_train = -1, n_test = -1;
  std::vector<std::string> exclude = data::kDefaultExcludedSpeakers;
};

int RunPair(const PairArgs &a) {
  data::CorpusIndex index;
  try {
    index = data::ScanCorpus(a.corpus, a.exclude);
  } catch (const Error &e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  data::PairingManifest m =
      data::BuildPairingManifest(index, a.n_per_speaker, a.n_targets, a.seed);
  int64_t total = static_cast<int64_t>(m.records.size());
  int64_t n_train = a.n_train, n_test = a.n_test;
  if (n_train < 0 && n_test < 0) {
    // 5/6 train split by default, matching 9000/1800 out of 10800.
    n_train = (total * 5) / 6;
    n_test = total - n_train;
  } else if (n_train >= 0 && n_test < 0) {
    n_test = total - n_train;
  } else if (n_train < 0) {
    n_train = total - n_test;
  }
  data::SplitTrainTest(&m, n_train, n_test, a.seed);
  data::SaveManifest(m, a.out);
  std::cout << "records=" << total << " speakers=" << m.speakers.size()
            << " train=" << n_train << " test=" << n_test << "\n";
  return 0;
}

struct ConvertArgs {
  std::string manifest, converter, out_dir;
  int jobs = 1;
};

int RunConvert(const ConvertArgs &a) {
  data::PairingManifest m = data::LoadManifest(a.manifest);
  int n = data::ConvertManifest(&m, a.converter, a.out_dir, a.jobs, a.manifest);
  std::cout << "converted=" << n << "\n";
  return 0;
}

struct ExtractArgs {
  std::string manifest, out_dir;
  FrontendConfig frontend;
};

int RunExtract(const ExtractArgs &a) {
  data::PairingManifest m = data::LoadManifest(a.manifest);
  fs::create_directories(a.out_dir);
  int n = 0;
  for (size_t i = 0; i < m.records.size(); ++i) {
    const auto &rec = m.records[i];
    Require(!rec.converted_path.empty(), Errc::kInvalidInput,
            "record " + std::to_string(i) + " not converted yet");
    Waveform w = LoadWav(rec.converted_path);
    if (w.sample_rate_hz != a.frontend.sample_rate_hz)
      w = ResampleLinear(w, a.frontend.sample_rate_hz);
    Spectrogram spec = StftMagnitude(w, a.frontend);
    SaveSpectrogram(fs::path(a.out_dir) /
                        traineval::ExampleLoader::CacheName(i),
                    spec);
    ++n;
  }
  std::cout << "extracted=" << n << "\n";
  return 0;
}

struct TrainArgs {
  std::string manifest, out_dir, resume, cache_dir;
  std::string variant = "hvlad";
  int clusters = 64;
  int n_classes = 0;  // 0: from manifest
  std::vector<int> trunk = {16, 32, 64, 128};
  std::vector<int> depths = {2, 3, 3, 3};
  int embed = 512;
  bool no_intra_norm = false;
  bool no_warmup = false;
  traineval::TrainConfig train;
};

int RunTrain(TrainArgs &a) {
  data::PairingManifest m = data::LoadManifest(a.manifest);
  model::EncoderConfig enc;
  enc.variant = model::ParseVariant(a.variant);
  enc.clusters = a.clusters;
  enc.n_classes = a.n_classes > 0 ? a.n_classes
                                  : static_cast<int>(m.speakers.size());
  enc.trunk_channels = a.trunk;
  enc.stage_depths = a.depths;
  enc.embed_dim = a.embed;
  enc.intra_norm = !a.no_intra_norm;
  enc.input_bins = a.train.frontend.fft_size / 2 + 1;
  enc.input_frames = static_cast<int>(
      FramesForDuration(a.train.frontend.crop_s, a.train.frontend));

  a.train.checkpoint_dir = a.out_dir;
  a.train.cache_dir = a.cache_dir;
  a.train.vlad_warmup = !a.no_warmup;

  try {
    traineval::TrainResult r =
        traineval::Train(enc, m, a.train, a.resume.empty() ? fs::path{}
                                                           : fs::path(a.resume));
    std::cout << "final_checkpoint=" << r.final_checkpoint.string() << "\n";
  } catch (const Error &e) {
    if (e.code() == Errc::kNonFinite) {
      std::cerr << e.what() << "\n";
      return 4;
    }
    throw;
  }
  return 0;
}

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::string model_dir;  // directory holding model.cfg; default: ckpt parent
  std::string manifest, out, cache_dir;
  traineval::EvalOptions opt;
};

int RunEval(const EvalArgs &a) {
  data::PairingManifest m = data::LoadManifest(a.manifest);
  fs::path cfg_dir = a.model_dir.empty()
                         ? fs::path(a.checkpoints.front()).parent_path()
                         : fs::path(a.model_dir);
  model::EncoderConfig enc;
  FrontendConfig frontend;
  model::LoadModelConfig(cfg_dir / "model.cfg", &enc, &frontend);

  traineval::EvalOptions opt = a.opt;
  opt.cache_dir = a.cache_dir;
  std::vector<fs::path> ckpts(a.checkpoints.begin(), a.checkpoints.end());
  traineval::EvalReport report =
      traineval::EvaluateCheckpoints(ckpts, enc, frontend, m, opt);
  if (!a.out.empty()) traineval::SaveReport(report, a.out);
  std::cout << report.ToJson().dump(2) << "\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> reports;
  std::string out_dir;
  bool group = false;
};

int RunReport(const ReportArgs &a) {
  std::vector<traineval::EvalReport> reports;
  for (const auto &p : a.reports) reports.push_back(traineval::LoadReport(p));
  std::vector<traineval::ReportRow> rows =
      traineval::AggregateReports(reports, a.group);
  std::string table = traineval::RenderTable(rows);
  std::cout << table;

  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    std::ofstream os(fs::path(a.out_dir) / "table.txt");
    os << table;

    // One smoothed top-1 curve per configuration (runs averaged pointwise).
    std::vector<svg::Series> series;
    std::map<std::string, std::vector<const traineval::EvalReport *>> groups;
    std::vector<std::string> order;
    for (const auto &r : reports) {
      std::string k = r.variant + " K=" + std::to_string(r.clusters) +
                      " T=" + std::to_string(r.n_targets);
      if (groups.find(k) == groups.end()) order.push_back(k);
      groups[k].push_back(&r);
    }
    for (const auto &k : order) {
      const auto &runs = groups[k];
      size_t len = runs.front()->series.size();
      for (const auto *r : runs) len = std::min(len, r->series.size());
      if (len == 0) continue;
      svg::Series s;
      s.name = k;
      for (size_t i = 0; i < len; ++i) {
        double acc = 0.0;
        for (const auto *r : runs) acc += r->smoothed_top1[i];
        s.x.push_back(static_cast<double>(runs.front()->series[i].step));
        s.y.push_back(100.0 * acc / static_cast<double>(runs.size()));
      }
      series.push_back(std::move(s));
    }
    if (!series.empty())
      svg::LinePlot(fs::path(a.out_dir) / "accuracy.svg",
                    "Test accuracy (smoothed)", "training step", "top-1 (%)",
                    series);
  }
  return 0;
}

struct SynthArgs {
  std::string out;
  synth::SynthConfig cfg;
};

int RunSynth(const SynthArgs &a) {
  synth::MakeSyntheticCorpus(a.out, a.cfg);
  std::cout << "speakers=" << a.cfg.n_speakers
            << " utterances=" << a.cfg.n_speakers * a.cfg.utts_per_speaker
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Authentic-speaker recognition pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a key=value file");

  PairArgs pair;
  auto *cmd_pair = app.add_subcommand(
      "pair", "Scan a corpus and build a source/target pairing manifest");
  cmd_pair->add_option("--corpus", pair.corpus, "Corpus root")->required();
  cmd_pair->add_option("--out", pair.out, "Manifest path")->required();
  cmd_pair->add_option("--n-per-speaker", pair.n_per_speaker,
                       "Source utterances per speaker");
  cmd_pair->add_option("--n-targets", pair.n_targets,
                       "Target utterances per record (1-3)");
  cmd_pair->add_option("--seed", pair.seed, "Random seed");
  cmd_pair->add_option("--train", pair.n_train, "Train split size");
  cmd_pair->add_option("--test", pair.n_test, "Test split size");
  cmd_pair->add_option("--exclude", pair.exclude, "Speaker ids to exclude");

  ConvertArgs conv;
  auto *cmd_convert = app.add_subcommand(
      "convert", "Run the external voice converter over a manifest");
  cmd_convert->add_option("--manifest", conv.manifest, "Manifest path")
      ->required();
  cmd_convert
      ->add_option("--converter", conv.converter,
                   "Command template with {source} {targets} {out}")
      ->required();
  cmd_convert->add_option("--out-dir", conv.out_dir, "Converted audio dir")
      ->required();
  cmd_convert->add_option("--jobs", conv.jobs, "Parallel conversions");

  ExtractArgs extract;
  auto *cmd_extract = app.add_subcommand(
      "extract", "Precompute full-utterance spectrograms for a manifest");
  cmd_extract->add_option("--manifest", extract.manifest, "Manifest path")
      ->required();
  cmd_extract->add_option("--out-dir", extract.out_dir, "Cache directory")
      ->required();
  cmd_extract->add_option("--rate", extract.frontend.sample_rate_hz,
                          "Pipeline sample rate");
  cmd_extract->add_option("--win", extract.frontend.win_s, "Window (s)");
  cmd_extract->add_option("--hop", extract.frontend.hop_s, "Hop (s)");

  TrainArgs train;
  auto *cmd_train = app.add_subcommand("train", "Train an encoder variant");
  cmd_train->add_option("--manifest", train.manifest, "Manifest path")
      ->required();
  cmd_train->add_option("--out", train.out_dir, "Checkpoint directory")
      ->required();
  cmd_train
      ->add_option("--variant", train.variant,
                   "baseline1|baseline2|baseline3|hvlad")
      ->check(CLI::IsMember({"baseline1", "baseline2", "baseline3", "hvlad"}));
  cmd_train->add_option("--clusters", train.clusters, "VLAD clusters");
  cmd_train->add_option("--classes", train.n_classes,
                        "Class count (default: manifest speakers)");
  cmd_train->add_option("--trunk", train.trunk, "Stage channel widths (4)");
  cmd_train->add_option("--depths", train.depths, "Stage depths (4)");
  cmd_train->add_option("--embed", train.embed, "Embedding dimension");
  cmd_train->add_flag("--no-intra-norm", train.no_intra_norm,
                      "Disable per-cluster normalization");
  cmd_train->add_flag("--no-warmup", train.no_warmup,
                      "Skip k-means VLAD warm-up");
  cmd_train->add_option("--steps", train.train.steps, "Training steps");
  cmd_train->add_option("--batch", train.train.batch_size, "Batch size");
  cmd_train->add_option("--lr", train.train.adam.lr, "Adam learning rate");
  cmd_train->add_option("--seed", train.train.seed, "Random seed");
  cmd_train->add_option("--eval-every", train.train.eval_every,
                        "Checkpoint cadence in steps");
  cmd_train->add_option("--rate", train.train.frontend.sample_rate_hz,
                        "Pipeline sample rate");
  cmd_train->add_option("--crop", train.train.frontend.crop_s,
                        "Crop length (s)");
  cmd_train->add_option("--win", train.train.frontend.win_s, "Window (s)");
  cmd_train->add_option("--hop", train.train.frontend.hop_s, "Hop (s)");
  cmd_train->add_option("--cache", train.cache_dir,
                        "Spectrogram cache directory (from extract)");
  cmd_train->add_option("--resume", train.resume, "Checkpoint to resume from");
  cmd_train->add_flag("--quiet", train.train.quiet, "No progress on stderr");

  EvalArgs eval;
  auto *cmd_eval = app.add_subcommand("eval", "Evaluate checkpoints");
  cmd_eval->add_option("--ckpt", eval.checkpoints, "Checkpoint file(s)")
      ->required();
  cmd_eval->add_option("--model-dir", eval.model_dir,
                       "Directory with model.cfg (default: checkpoint dir)");
  cmd_eval->add_option("--manifest", eval.manifest, "Manifest path")->required();
  cmd_eval->add_option("--out", eval.out, "Report JSON path");
  cmd_eval->add_option("--split", eval.opt.split, "Split to evaluate");
  cmd_eval->add_option("--crops", eval.opt.n_crops, "Crops per utterance");
  cmd_eval->add_option("--seed", eval.opt.seed, "Crop seed");
  cmd_eval->add_option("--batch", eval.opt.batch_size, "Eval batch size");
  cmd_eval->add_option("--cache", eval.cache_dir, "Spectrogram cache dir");

  ReportArgs report;
  auto *cmd_report =
      app.add_subcommand("report", "Aggregate eval reports into a table");
  cmd_report->add_option("reports", report.reports, "Report JSON files")
      ->required();
  cmd_report->add_option("--out", report.out_dir, "Output directory");
  cmd_report->add_flag("--group", report.group,
                       "Aggregate per configuration instead of requiring one");

  SynthArgs syn;
  auto *cmd_synth = app.add_subcommand(
      "synth", "Generate a synthetic tone-signature corpus");
  cmd_synth->add_option("--out", syn.out, "Corpus root")->required();
  cmd_synth->add_option("--speakers", syn.cfg.n_speakers, "Speaker count");
  cmd_synth->add_option("--utts", syn.cfg.utts_per_speaker,
                        "Utterances per speaker");
  cmd_synth->add_option("--duration", syn.cfg.duration_s, "Clip length (s)");
  cmd_synth->add_option("--rate", syn.cfg.sample_rate_hz, "Sample rate");
  cmd_synth->add_option("--seed", syn.cfg.seed, "Random seed");
  cmd_synth->add_option("--tones", syn.cfg.tones_per_speaker,
                        "Tones per speaker (0 = pure noise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_pair->parsed()) return RunPair(pair);
    if (cmd_convert->parsed()) return RunConvert(conv);
    if (cmd_extract->parsed()) return RunExtract(extract);
    if (cmd_train->parsed()) return RunTrain(train);
    if (cmd_eval->parsed()) return RunEval(eval);
    if (cmd_report->parsed()) return RunReport(report);
    if (cmd_synth->parsed()) return RunSynth(syn);
  } catch (const Error &e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case Errc::kNotFound:
      case Errc::kEmptySpeaker:
      case Errc::kEmptyCorpus:
      case Errc::kTooFewSpeakers:
        return 3;
      case Errc::kNonFinite:
        return 4;
      case Errc::kConfigMismatch:
        return 5;
      default:
        return 1;
    }
  } catch (const std::exception &e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
