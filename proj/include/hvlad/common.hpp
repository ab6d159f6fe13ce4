// hvlad/common.hpp

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

#ifndef HVLAD_COMMON_HPP_
#define HVLAD_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hvlad {

enum class Errc {
  kNotFound,
  kUnsupportedFormat,
  kEmptyAudio,
  kTooShort,
  kInvalidInput,
  kShapeMismatch,
  kLabelOutOfRange,
  kNonFinite,
  kInvalidConfig,
  kMissingTap,
  kEmptySpeaker,
  kEmptyCorpus,
  kTooFewSpeakers,
  kSizeMismatch,
  kConverterFailed,
  kBadOutput,
  kConfigMismatch,
  kTooFewValues,
  kEmptySeries,
  kIoError,
};

inline const char *ErrcName(Errc c) {
  switch (c) {
    case Errc::kNotFound: return "NotFound";
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kEmptyAudio: return "EmptyAudio";
    case Errc::kTooShort: return "TooShort";
    case Errc::kInvalidInput: return "InvalidInput";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kLabelOutOfRange: return "LabelOutOfRange";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kMissingTap: return "MissingTap";
    case Errc::kEmptySpeaker: return "EmptySpeaker";
    case Errc::kEmptyCorpus: return "EmptyCorpus";
    case Errc::kTooFewSpeakers: return "TooFewSpeakers";
    case Errc::kSizeMismatch: return "SizeMismatch";
    case Errc::kConverterFailed: return "ConverterFailed";
    case Errc::kBadOutput: return "BadOutput";
    case Errc::kConfigMismatch: return "ConfigMismatch";
    case Errc::kTooFewValues: return "TooFewValues";
    case Errc::kEmptySeries: return "EmptySeries";
    case Errc::kIoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &msg)
      : std::runtime_error(std::string(ErrcName(code)) + ": " + msg),
        code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void Throw(Errc code, const std::string &msg) {
  throw Error(code, msg);
}

inline void Require(bool cond, Errc code, const std::string &msg) {
  if (!cond) Throw(code, msg);
}

// Deterministic random stream.  All sampling helpers are implemented here
// rather than with std:: distributions so that a given seed produces the
// same draws on every standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n), unbiased via rejection.
  uint64_t UniformInt(uint64_t n) {
    if (n == 0) Throw(Errc::kInvalidInput, "UniformInt: n must be positive");
    uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Marsaglia polar method (cached spare).
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * Uniform() - 1.0;
      v = 2.0 * Uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  template <typename T>
  void Shuffle(std::vector<T> *v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent child seed from a base seed and a salt, so that
// per-step / per-record streams can be reseeded without replaying history.
inline uint64_t MixSeed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Little-endian binary I/O used by the checkpoint and spectrogram cache
// formats.
template <typename T>
void WriteLe(std::ostream &os, T v) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T>
T ReadLe(std::istream &is) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char *>(buf), sizeof(T));
  if (!is) Throw(Errc::kIoError, "unexpected end of stream");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace hvlad

#endif  // HVLAD_COMMON_HPP_
