// tests/test_cli.cpp

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

#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "hvlad/data.hpp"
#include "hvlad/traineval.hpp"
#include "testutil.hpp"

using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

int RunCli(const std::string &args, const fs::path &log) {
  std::string cmd = std::string(HVLAD_CLI_BIN) + " " + args + " > " +
                    log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli pipeline: synth, pair, convert, extract, train, eval, report",
          "[cli]") {
  TempDir tmp("cli_pipeline");
  fs::path log = tmp.path() / "log.txt";

  // synth
  REQUIRE(RunCli("synth --out " + (tmp.path() / "corpus").string() +
                     " --speakers 3 --utts 4 --duration 0.7 --rate 8000 --seed 5",
                 log) == 0);

  // pair (3 speakers x 4 utts -> 12 records, default 5/6 split -> 10/2)
  fs::path manifest = tmp.path() / "m.jsonl";
  REQUIRE(RunCli("pair --corpus " + (tmp.path() / "corpus").string() +
                     " --out " + manifest.string() +
                     " --n-per-speaker 4 --n-targets 1 --seed 7",
                 log) == 0);
  REQUIRE(fs::exists(manifest));

  // Same flags and seed produce the identical manifest file.
  fs::path manifest2 = tmp.path() / "m2.jsonl";
  REQUIRE(RunCli("pair --corpus " + (tmp.path() / "corpus").string() +
                     " --out " + manifest2.string() +
                     " --n-per-speaker 4 --n-targets 1 --seed 7",
                 log) == 0);
  REQUIRE(testutil::ReadFileBytes(manifest) ==
          testutil::ReadFileBytes(manifest2));

  // convert through the bundled stand-in converter
  std::string converter = std::string(HVLAD_VCSTUB_BIN) +
                          " --mode warp --source-weight 0.5 --source {source}"
                          " --targets {targets} --out {out}";
  REQUIRE(RunCli("convert --manifest " + manifest.string() + " --converter '" +
                     converter + "' --out-dir " + (tmp.path() / "conv").string() +
                     " --jobs 2",
                 log) == 0);
  hvlad::data::PairingManifest m = hvlad::data::LoadManifest(manifest);
  for (const auto &r : m.records) REQUIRE(!r.converted_path.empty());

  // extract a spectrogram cache
  REQUIRE(RunCli("extract --manifest " + manifest.string() + " --out-dir " +
                     (tmp.path() / "cache").string() + " --rate 8000",
                 log) == 0);
  REQUIRE(fs::exists(tmp.path() / "cache" / "r000000.spec"));

  // train --steps 0 writes the initial checkpoint only
  fs::path ckpt_dir = tmp.path() / "ckpt";
  REQUIRE(RunCli("train --manifest " + manifest.string() + " --out " +
                     ckpt_dir.string() +
                     " --variant hvlad --clusters 2 --trunk 2,2,4,4 "
                     "--depths 1,1,1,3 --embed 8 --steps 0 --batch 4 "
                     "--rate 8000 --crop 0.5 --seed 3 --quiet",
                 log) == 0);
  REQUIRE(fs::exists(ckpt_dir / "step_000000.ckpt"));
  REQUIRE(fs::exists(ckpt_dir / "model.cfg"));

  // a short real training run, then eval
  REQUIRE(RunCli("train --manifest " + manifest.string() + " --out " +
                     ckpt_dir.string() +
                     " --variant hvlad --clusters 2 --trunk 2,2,4,4 "
                     "--depths 1,1,1,3 --embed 8 --steps 2 --batch 4 "
                     "--rate 8000 --crop 0.5 --seed 3 --quiet",
                 log) == 0);
  REQUIRE(fs::exists(ckpt_dir / "step_000002.ckpt"));
  REQUIRE(fs::exists(ckpt_dir / "train_log.csv"));

  fs::path report = tmp.path() / "report.json";
  REQUIRE(RunCli("eval --ckpt " + (ckpt_dir / "step_000002.ckpt").string() +
                     " --manifest " + manifest.string() + " --split test" +
                     " --out " + report.string(),
                 log) == 0);
  REQUIRE(fs::exists(report));

  // report renders a table and an svg
  REQUIRE(RunCli("report " + report.string() + " --out " +
                     (tmp.path() / "out").string(),
                 log) == 0);
  REQUIRE(fs::exists(tmp.path() / "out" / "table.txt"));
  REQUIRE(fs::exists(tmp.path() / "out" / "accuracy.svg"));
}

TEST_CASE("cli exit codes", "[cli]") {
  TempDir tmp("cli_codes");
  fs::path log = tmp.path() / "log.txt";

  SECTION("missing corpus root exits 3") {
    REQUIRE(RunCli("pair --corpus " + (tmp.path() / "absent").string() +
                       " --out " + (tmp.path() / "m.jsonl").string(),
                   log) == 3);
    std::string text = testutil::ReadFileBytes(log);
    REQUIRE(text.find("NotFound") != std::string::npos);
  }

  SECTION("unknown variant exits 2 with usage") {
    // minimal manifest file so the option parser is the failing stage
    REQUIRE(RunCli("train --manifest x.jsonl --out y --variant resnet99",
                   log) == 2);
  }

  SECTION("unknown subcommand exits 2") {
    REQUIRE(RunCli("frobnicate", log) == 2);
  }

  SECTION("mixed-variant reports without --group exit 5") {
    auto mk = [&](const std::string &variant, const fs::path &p) {
      hvlad::traineval::EvalReport r;
      r.variant = variant;
      r.clusters = 64;
      r.n_targets = 1;
      r.n_classes = 10;
      r.split = "test";
      r.n_records = 10;
      r.top1 = 0.2;
      r.top5 = 0.4;
      r.series = {{1, 0.2, 0.4}};
      r.smoothed_top1 = {0.2};
      r.smoothed_top5 = {0.4};
      hvlad::traineval::SaveReport(r, p);
    };
    mk("hvlad", tmp.path() / "a.json");
    mk("baseline2", tmp.path() / "b.json");
    REQUIRE(RunCli("report " + (tmp.path() / "a.json").string() + " " +
                       (tmp.path() / "b.json").string(),
                   log) == 5);
    REQUIRE(RunCli("report " + (tmp.path() / "a.json").string() + " " +
                       (tmp.path() / "b.json").string() + " --group",
                   log) == 0);
  }
}
