// hvlad/checkpoint.hpp

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

#ifndef HVLAD_CHECKPOINT_HPP_
#define HVLAD_CHECKPOINT_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "hvlad/common.hpp"
#include "hvlad/model.hpp"
#include "hvlad/nn.hpp"
#include "hvlad/tensor.hpp"

namespace hvlad {

// Checkpoint archive layout:
//   "HVCKPT1" | u32 n_tensors | n_tensors records |
//   u32 step  | u32 n_state_tensors | state records
// Record: u16 name_len | name | u8 ndim | u32 dims[ndim] | f32 payload (LE).
// State records are the Adam moments ("adam.m.<name>", "adam.v.<name>") plus
// one "adam.hyper" tensor [lr, beta1, beta2, eps].

inline constexpr char kCkptMagic[] = "HVCKPT1";  // 7 bytes on disk

namespace detail {

inline void WriteRecord(std::ostream &os, const std::string &name,
                        const Tensor<float> &t) {
  Require(name.size() <= 0xffff, Errc::kInvalidInput, "tensor name too long");
  WriteLe<uint16_t>(os, static_cast<uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  WriteLe<uint8_t>(os, static_cast<uint8_t>(t.ndim()));
  for (int i = 0; i < t.ndim(); ++i)
    WriteLe<uint32_t>(os, static_cast<uint32_t>(t.dim(i)));
  for (int64_t i = 0; i < t.numel(); ++i) WriteLe<float>(os, t[i]);
}

inline std::pair<std::string, Tensor<float>> ReadRecord(std::istream &is) {
  uint16_t name_len = ReadLe<uint16_t>(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  if (!is) Throw(Errc::kIoError, "truncated checkpoint record name");
  uint8_t ndim = ReadLe<uint8_t>(is);
  std::vector<int64_t> dims;
  for (int i = 0; i < ndim; ++i)
    dims.push_back(static_cast<int64_t>(ReadLe<uint32_t>(is)));
  Tensor<float> t(dims);
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = ReadLe<float>(is);
  return {std::move(name), std::move(t)};
}

}  // namespace detail

inline void SaveCheckpoint(const std::filesystem::path &path,
                           const model::ModelParams<float> &params,
                           const nn::AdamState<float> *state, int64_t step) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Errc::kIoError, "cannot write: " + path.string());
  os.write(kCkptMagic, 7);
  WriteLe<uint32_t>(os, static_cast<uint32_t>(params.names.size()));
  for (const auto &name : params.names)
    detail::WriteRecord(os, name, params.tensors.at(name));
  WriteLe<uint32_t>(os, static_cast<uint32_t>(step));

  std::vector<std::string> trainable = params.TrainableNames();
  if (state != nullptr) {
    Require(state->m.size() == trainable.size(), Errc::kShapeMismatch,
            "optimizer state does not match trainable parameters");
    WriteLe<uint32_t>(os, static_cast<uint32_t>(2 * trainable.size() + 1));
    for (size_t i = 0; i < trainable.size(); ++i)
      detail::WriteRecord(os, "adam.m." + trainable[i], state->m[i]);
    for (size_t i = 0; i < trainable.size(); ++i)
      detail::WriteRecord(os, "adam.v." + trainable[i], state->v[i]);
    Tensor<float> hyper({4});
    hyper[0] = static_cast<float>(state->cfg.lr);
    hyper[1] = static_cast<float>(state->cfg.beta1);
    hyper[2] = static_cast<float>(state->cfg.beta2);
    hyper[3] = static_cast<float>(state->cfg.eps);
    detail::WriteRecord(os, "adam.hyper", hyper);
  } else {
    WriteLe<uint32_t>(os, 0);
  }
  if (!os) Throw(Errc::kIoError, "write failed: " + path.string());
}

// Loads tensors into an already-built parameter set (shapes must agree) and,
// when `state` is non-null and the archive has optimizer records, restores
// Adam moments aligned with the trainable parameter order.  Returns the step
// counter.
inline int64_t LoadCheckpoint(const std::filesystem::path &path,
                              model::ModelParams<float> *params,
                              nn::AdamState<float> *state) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Errc::kNotFound, "cannot open: " + path.string());
  char magic[7];
  is.read(magic, 7);
  if (!is || std::string(magic, 7) != kCkptMagic)
    Throw(Errc::kUnsupportedFormat, "bad checkpoint magic: " + path.string());

  uint32_t n_tensors = ReadLe<uint32_t>(is);
  Require(n_tensors == params->names.size(), Errc::kConfigMismatch,
          "checkpoint has " + std::to_string(n_tensors) + " tensors, model has " +
              std::to_string(params->names.size()));
  for (uint32_t i = 0; i < n_tensors; ++i) {
    auto [name, t] = detail::ReadRecord(is);
    Require(params->Has(name), Errc::kConfigMismatch,
            "checkpoint tensor not in model: " + name);
    Tensor<float> &dst = params->At(name);
    Require(dst.SameShape(t), Errc::kConfigMismatch,
            "shape mismatch for " + name + ": checkpoint " + t.ShapeString() +
                " vs model " + dst.ShapeString());
    dst = std::move(t);
  }

  int64_t step = static_cast<int64_t>(ReadLe<uint32_t>(is));
  uint32_t n_state = ReadLe<uint32_t>(is);
  if (state != nullptr && n_state > 0) {
    std::vector<std::string> trainable = params->TrainableNames();
    Require(n_state == 2 * trainable.size() + 1, Errc::kConfigMismatch,
            "unexpected optimizer record count");
    std::vector<const Tensor<float> *> ptrs;
    for (const auto &n : trainable) ptrs.push_back(&params->At(n));
    *state = nn::AdamState<float>::Init(ptrs, state->cfg);
    for (uint32_t i = 0; i < n_state; ++i) {
      auto [name, t] = detail::ReadRecord(is);
      if (name == "adam.hyper") {
        Require(t.numel() == 4, Errc::kConfigMismatch, "bad adam.hyper record");
        state->cfg.lr = t[0];
        state->cfg.beta1 = t[1];
        state->cfg.beta2 = t[2];
        state->cfg.eps = t[3];
        continue;
      }
      bool is_m = name.rfind("adam.m.", 0) == 0;
      bool is_v = name.rfind("adam.v.", 0) == 0;
      Require(is_m || is_v, Errc::kConfigMismatch,
              "unexpected state record: " + name);
      std::string param_name = name.substr(7);
      auto it = std::find(trainable.begin(), trainable.end(), param_name);
      Require(it != trainable.end(), Errc::kConfigMismatch,
              "state for unknown parameter: " + param_name);
      size_t idx = static_cast<size_t>(it - trainable.begin());
      Require(t.SameShape(*ptrs[idx]), Errc::kConfigMismatch,
              "state shape mismatch for " + param_name);
      (is_m ? state->m[idx] : state->v[idx]) = std::move(t);
    }
    state->t = step;
  } else if (n_state > 0) {
    // Skip optimizer records.
    for (uint32_t i = 0; i < n_state; ++i) detail::ReadRecord(is);
  }
  return step;
}

}  // namespace hvlad

#endif  // HVLAD_CHECKPOINT_HPP_
