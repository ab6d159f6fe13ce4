// hvlad/data.hpp

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

#ifndef HVLAD_DATA_HPP_
#define HVLAD_DATA_HPP_

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hvlad/common.hpp"
#include "hvlad/wav.hpp"

namespace hvlad {
namespace data {

namespace fs = std::filesystem;

inline const std::vector<std::string> kDefaultExcludedSpeakers = {"p280",
                                                                  "p315"};

// Speakers and their utterance files, lexicographically sorted for
// reproducible labeling.
struct CorpusIndex {
  std::vector<std::string> speakers;
  std::map<std::string, std::vector<std::string>> utterances;
};

// One source utterance paired with target utterances of one other speaker.
// `label` is the class index of the source speaker.
struct PairingRecord {
  std::string source_speaker;
  std::string source_utt;
  std::string target_speaker;
  std::vector<std::string> target_utts;
  std::string converted_path;  // empty until conversion ran
  int label = -1;
  std::string split;  // "", "train" or "test"
};

struct PairingManifest {
  uint64_t seed = 0;
  int n_per_speaker = 0;
  int n_targets = 0;
  std::string converter_id;
  std::vector<std::string> speakers;  // label index -> speaker id
  std::vector<PairingRecord> records;
};

// Scans a speaker-per-directory tree of wav files.  Excluded speakers are
// dropped; the rest must each contribute at least one utterance.
inline CorpusIndex ScanCorpus(
    const fs::path &root,
    const std::vector<std::string> &exclude = kDefaultExcludedSpeakers) {
  if (!fs::is_directory(root))
    Throw(Errc::kNotFound, "corpus root not found: " + root.string());

  CorpusIndex index;
  std::vector<std::string> dirs;
  for (const auto &e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path().filename().string());
  std::sort(dirs.begin(), dirs.end());

  for (const std::string &speaker : dirs) {
    if (std::find(exclude.begin(), exclude.end(), speaker) != exclude.end())
      continue;
    std::vector<std::string> files;
    for (const auto &e : fs::directory_iterator(root / speaker))
      if (e.is_regular_file() && e.path().extension() == ".wav")
        files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
      Throw(Errc::kEmptySpeaker, "no audio files for speaker " + speaker);
    index.speakers.push_back(speaker);
    index.utterances.emplace(speaker, std::move(files));
  }
  if (index.speakers.empty())
    Throw(Errc::kEmptyCorpus, "no speakers left after exclusions in " +
                                  root.string());
  return index;
}

// Pairs each of n_per_speaker distinct source utterances per speaker with a
// uniformly chosen other speaker and n_targets of that speaker's utterances.
// Fully reproducible from the seed.
inline PairingManifest BuildPairingManifest(const CorpusIndex &index,
                                            int n_per_speaker, int n_targets,
                                            uint64_t seed) {
  Require(index.speakers.size() >= 2, Errc::kTooFewSpeakers,
          "pairing needs at least two speakers");
  Require(n_per_speaker >= 1, Errc::kInvalidInput, "n_per_speaker must be >= 1");
  Require(n_targets >= 1 && n_targets <= 3, Errc::kInvalidInput,
          "n_targets must be in {1,2,3}");

  PairingManifest m;
  m.seed = seed;
  m.n_per_speaker = n_per_speaker;
  m.n_targets = n_targets;
  m.speakers = index.speakers;

  Rng rng(seed);
  const int64_t n_speakers = static_cast<int64_t>(index.speakers.size());
  for (int64_t s = 0; s < n_speakers; ++s) {
    const std::string &speaker = index.speakers[static_cast<size_t>(s)];
    const auto &utts = index.utterances.at(speaker);

    // Distinct source utterances; if the speaker has fewer than requested,
    // take all of them.
    std::vector<size_t> order(utts.size());
    for (size_t i = 0; i < utts.size(); ++i) order[i] = i;
    rng.Shuffle(&order);
    size_t take = std::min<size_t>(static_cast<size_t>(n_per_speaker),
                                   utts.size());
    if (take < static_cast<size_t>(n_per_speaker))
      std::fprintf(stderr,
                   "warning: speaker %s has only %zu utterances (wanted %d)\n",
                   speaker.c_str(), utts.size(), n_per_speaker);

    for (size_t i = 0; i < take; ++i) {
      PairingRecord rec;
      rec.source_speaker = speaker;
      rec.source_utt = utts[order[i]];
      rec.label = static_cast<int>(s);

      // Uniform over the other speakers.
      int64_t t = static_cast<int64_t>(rng.UniformInt(
          static_cast<uint64_t>(n_speakers - 1)));
      if (t >= s) ++t;
      rec.target_speaker = index.speakers[static_cast<size_t>(t)];
      const auto &target_utts = index.utterances.at(rec.target_speaker);
      std::vector<size_t> torder(target_utts.size());
      for (size_t j = 0; j < target_utts.size(); ++j) torder[j] = j;
      rng.Shuffle(&torder);
      for (int j = 0; j < n_targets; ++j)
        rec.target_utts.push_back(
            target_utts[torder[static_cast<size_t>(j) % torder.size()]]);
      m.records.push_back(std::move(rec));
    }
  }
  return m;
}

// Random disjoint split labeling every record exactly once.
inline void SplitTrainTest(PairingManifest *m, int64_t n_train, int64_t n_test,
                           uint64_t seed) {
  Require(n_train >= 0 && n_test >= 0 &&
              n_train + n_test == static_cast<int64_t>(m->records.size()),
          Errc::kSizeMismatch,
          "split sizes " + std::to_string(n_train) + "+" +
              std::to_string(n_test) + " != " +
              std::to_string(m->records.size()) + " records");
  std::vector<size_t> order(m->records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(&order);
  for (size_t i = 0; i < order.size(); ++i)
    m->records[order[i]].split =
        (static_cast<int64_t>(i) < n_train) ? "train" : "test";
}

// ---------------------------------------------------------------------------
// Manifest serialization: one JSON header line, then one JSON object per
// record (UTF-8, line-delimited).
// ---------------------------------------------------------------------------

inline void SaveManifest(const PairingManifest &m, const fs::path &path) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) Throw(Errc::kIoError, "cannot write: " + tmp.string());
    nlohmann::json header = {{"seed", m.seed},
                             {"n_per_speaker", m.n_per_speaker},
                             {"n_targets", m.n_targets},
                             {"converter_id", m.converter_id},
                             {"speakers", m.speakers}};
    os << header.dump() << "\n";
    for (const auto &r : m.records) {
      nlohmann::json j = {{"source_speaker", r.source_speaker},
                          {"source_utt", r.source_utt},
                          {"target_speaker", r.target_speaker},
                          {"target_utts", r.target_utts},
                          {"converted_path", r.converted_path},
                          {"label", r.label},
                          {"split", r.split}};
      os << j.dump() << "\n";
    }
    if (!os) Throw(Errc::kIoError, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);  // atomic replace
}

inline PairingManifest LoadManifest(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Errc::kNotFound, "cannot open manifest: " + path.string());
  std::string line;
  Require(static_cast<bool>(std::getline(is, line)), Errc::kUnsupportedFormat,
          "empty manifest: " + path.string());

  PairingManifest m;
  try {
    nlohmann::json header = nlohmann::json::parse(line);
    m.seed = header.at("seed").get<uint64_t>();
    m.n_per_speaker = header.at("n_per_speaker").get<int>();
    m.n_targets = header.at("n_targets").get<int>();
    m.converter_id = header.at("converter_id").get<std::string>();
    m.speakers = header.at("speakers").get<std::vector<std::string>>();
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      PairingRecord r;
      r.source_speaker = j.at("source_speaker").get<std::string>();
      r.source_utt = j.at("source_utt").get<std::string>();
      r.target_speaker = j.at("target_speaker").get<std::string>();
      r.target_utts = j.at("target_utts").get<std::vector<std::string>>();
      r.converted_path = j.at("converted_path").get<std::string>();
      r.label = j.at("label").get<int>();
      r.split = j.at("split").get<std::string>();
      m.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception &e) {
    Throw(Errc::kUnsupportedFormat,
          "malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// External converter client.  The command template contains {source},
// {targets} and {out} placeholders; {targets} expands to space-separated
// shell-quoted paths.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string ShellQuote(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  out += "'";
  return out;
}

inline std::string SubstituteAll(std::string s, const std::string &key,
                                 const std::string &value) {
  size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
  return s;
}

}  // namespace detail

// Runs the external converter for one record and fills converted_path.
// The output must exist afterwards and load as non-empty audio.
inline void InvokeConverter(PairingRecord *rec, const std::string &cmd_template,
                            const fs::path &out_path) {
  Require(fs::exists(rec->source_utt), Errc::kNotFound,
          "source missing: " + rec->source_utt);
  for (const auto &t : rec->target_utts)
    Require(fs::exists(t), Errc::kNotFound, "target missing: " + t);

  std::string targets;
  for (size_t i = 0; i < rec->target_utts.size(); ++i) {
    if (i) targets += " ";
    targets += detail::ShellQuote(rec->target_utts[i]);
  }
  std::string cmd = cmd_template;
  cmd = detail::SubstituteAll(cmd, "{source}", detail::ShellQuote(rec->source_utt));
  cmd = detail::SubstituteAll(cmd, "{targets}", targets);
  cmd = detail::SubstituteAll(cmd, "{out}", detail::ShellQuote(out_path.string()));

  fs::path err_file = out_path;
  err_file += ".stderr";
  std::string full = cmd + " 2> " + detail::ShellQuote(err_file.string());
  int status = std::system(full.c_str());
  int exit_code = (status == -1) ? -1
                                 : (WIFEXITED(status) ? WEXITSTATUS(status) : -1);
  if (exit_code != 0) {
    std::string diag;
    std::ifstream ef(err_file);
    std::stringstream ss;
    ss << ef.rdbuf();
    diag = ss.str();
    if (diag.size() > 512) diag.resize(512);
    Throw(Errc::kConverterFailed, "converter exited " +
                                      std::to_string(exit_code) + ": " + cmd +
                                      (diag.empty() ? "" : ("\n" + diag)));
  }
  fs::remove(err_file);

  if (!fs::exists(out_path) || fs::file_size(out_path) == 0)
    Throw(Errc::kBadOutput, "converter produced no output: " + out_path.string());
  try {
    Waveform w = LoadWav(out_path);
    (void)w;
  } catch (const Error &e) {
    Throw(Errc::kBadOutput,
          "converter output unreadable (" + std::string(e.what()) + ")");
  }
  rec->converted_path = out_path.string();
}

// Converts every unconverted record, up to `jobs` invocations in flight.
// The manifest is rewritten atomically once all conversions finished.
inline int ConvertManifest(PairingManifest *m, const std::string &cmd_template,
                           const fs::path &out_dir, int jobs,
                           const fs::path &manifest_path) {
  fs::create_directories(out_dir);
  Require(jobs >= 1, Errc::kInvalidInput, "jobs must be >= 1");

  std::vector<size_t> todo;
  for (size_t i = 0; i < m->records.size(); ++i)
    if (m->records[i].converted_path.empty()) todo.push_back(i);

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;

  auto worker = [&] {
    for (;;) {
      size_t w = next.fetch_add(1);
      if (w >= todo.size() || failed.load()) return;
      size_t idx = todo[w];
      PairingRecord &rec = m->records[idx];
      char name[64];
      std::snprintf(name, sizeof(name), "c%06zu.wav", idx);
      try {
        InvokeConverter(&rec, cmd_template, out_dir / name);
      } catch (const std::exception &e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  for (int i = 0; i < std::min<int>(jobs, static_cast<int>(todo.size())); ++i)
    threads.emplace_back(worker);
  for (auto &t : threads) t.join();

  if (failed.load()) throw Error(Errc::kConverterFailed, first_error);
  m->converter_id = cmd_template;
  SaveManifest(*m, manifest_path);
  return static_cast<int>(todo.size());
}

// Records of one split, in manifest order.
inline std::vector<const PairingRecord *> SplitRecords(
    const PairingManifest &m, const std::string &split) {
  std::vector<const PairingRecord *> out;
  for (const auto &r : m.records)
    if (r.split == split) out.push_back(&r);
  return out;
}

}  // namespace data
}  // namespace hvlad

#endif  // HVLAD_DATA_HPP_
