// hvlad/tensor.hpp

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

#ifndef HVLAD_TENSOR_HPP_
#define HVLAD_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hvlad/common.hpp"

namespace hvlad {

// Dense row-major tensor.  Shapes are fixed at construction; data is owned.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape)
      : shape_(std::move(shape)), data_(CheckedNumel(shape_), T(0)) {}

  Tensor(std::initializer_list<int64_t> shape)
      : Tensor(std::vector<int64_t>(shape)) {}

  Tensor(std::vector<int64_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    Require(static_cast<int64_t>(data_.size()) == CheckedNumel(shape_),
            Errc::kShapeMismatch, "tensor data does not match shape");
  }

  static Tensor Full(std::vector<int64_t> shape, T value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  const std::vector<int64_t> &shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }
  std::vector<T> &vec() { return data_; }
  const std::vector<T> &vec() const { return data_; }

  T &operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T &operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  T &operator()(int64_t i, int64_t j) { return data_[size_t(i * shape_[1] + j)]; }
  const T &operator()(int64_t i, int64_t j) const {
    return data_[size_t(i * shape_[1] + j)];
  }
  T &operator()(int64_t i, int64_t j, int64_t k) {
    return data_[size_t((i * shape_[1] + j) * shape_[2] + k)];
  }
  const T &operator()(int64_t i, int64_t j, int64_t k) const {
    return data_[size_t((i * shape_[1] + j) * shape_[2] + k)];
  }
  T &operator()(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[size_t(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  const T &operator()(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[size_t(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  void Fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool SameShape(const Tensor &o) const { return shape_ == o.shape_; }

  bool AllFinite() const {
    for (const T &v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> Cast() const {
    Tensor<U> out(shape_);
    for (int64_t i = 0; i < numel(); ++i)
      out[i] = static_cast<U>(data_[static_cast<size_t>(i)]);
    return out;
  }

  std::string ShapeString() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape_.size(); ++i)
      os << (i ? "," : "") << shape_[i];
    os << "]";
    return os.str();
  }

 private:
  static int64_t CheckedNumel(const std::vector<int64_t> &shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      Require(d > 0, Errc::kShapeMismatch, "tensor dims must be positive");
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

template <typename T>
void CheckFinite(const Tensor<T> &t, const std::string &where) {
  if (!t.AllFinite())
    Throw(Errc::kNonFinite, where + " produced NaN/Inf " + t.ShapeString());
}

}  // namespace hvlad

#endif  // HVLAD_TENSOR_HPP_
