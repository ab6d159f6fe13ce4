// hvlad/autograd.hpp

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

#ifndef HVLAD_AUTOGRAD_HPP_
#define HVLAD_AUTOGRAD_HPP_

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hvlad/common.hpp"
#include "hvlad/nn.hpp"
#include "hvlad/tensor.hpp"
#include "hvlad/vlad.hpp"

namespace hvlad {
namespace autograd {

// Reverse-mode tape over the nn/vlad kernels.  Ops run forward eagerly and
// record a closure; Backward() replays closures in reverse.  Gradients
// accumulate, so a leaf used several times (e.g. a shared FC weight) collects
// all contributions.
template <typename T>
class Tape {
 public:
  struct Var {
    Tensor<T> value;
    Tensor<T> grad;  // allocated when needs_grad
    bool needs_grad = false;
  };

  Var *Leaf(Tensor<T> value, bool needs_grad) {
    return Emit(std::move(value), needs_grad, /*check=*/false);
  }

  Var *Conv2d(Var *x, Var *w, Var *b, int64_t stride, int64_t pad) {
    Var *y = Emit(nn::Conv2dForward(x->value, w->value,
                                    b != nullptr ? &b->value : nullptr, stride,
                                    pad),
                  x->needs_grad || w->needs_grad ||
                      (b != nullptr && b->needs_grad));
    if (y->needs_grad)
      steps_.push_back([=] {
        nn::Conv2dBackward(x->value, w->value, stride, pad, y->grad,
                           x->needs_grad ? &x->grad : nullptr,
                           w->needs_grad ? &w->grad : nullptr,
                           (b != nullptr && b->needs_grad) ? &b->grad : nullptr);
      });
    return y;
  }

  Var *BatchNorm2d(Var *x, Var *gamma, Var *beta, Tensor<T> *running_mean,
                   Tensor<T> *running_var, bool train_mode, T momentum = T(0.1),
                   T eps = T(1e-5)) {
    auto cache = std::make_shared<nn::BatchNormCache<T>>();
    bool needs = x->needs_grad || gamma->needs_grad || beta->needs_grad;
    Var *y = Emit(nn::BatchNorm2dForward(x->value, gamma->value, beta->value,
                                         running_mean, running_var, train_mode,
                                         momentum, eps,
                                         needs ? cache.get() : nullptr),
                  needs);
    if (y->needs_grad)
      steps_.push_back([=] {
        nn::BatchNorm2dBackward(*cache, gamma->value, y->grad, train_mode,
                                x->needs_grad ? &x->grad : nullptr,
                                gamma->needs_grad ? &gamma->grad : nullptr,
                                beta->needs_grad ? &beta->grad : nullptr);
      });
    return y;
  }

  Var *Relu(Var *x) {
    Var *y = Emit(nn::ReluForward(x->value), x->needs_grad);
    if (y->needs_grad)
      steps_.push_back([=] { nn::ReluBackward(x->value, y->grad, &x->grad); });
    return y;
  }

  Var *MaxPool2d(Var *x, int64_t kh, int64_t kw, int64_t sh, int64_t sw) {
    auto argmax = std::make_shared<std::vector<int64_t>>();
    Var *y = Emit(nn::MaxPool2dForward(x->value, kh, kw, sh, sw,
                                       x->needs_grad ? argmax.get() : nullptr),
                  x->needs_grad);
    if (y->needs_grad)
      steps_.push_back([=] { nn::MaxPool2dBackward(*argmax, y->grad, &x->grad); });
    return y;
  }

  Var *Linear(Var *x, Var *w, Var *b) {
    Var *y = Emit(nn::LinearForward(x->value, w->value,
                                    b != nullptr ? &b->value : nullptr),
                  x->needs_grad || w->needs_grad ||
                      (b != nullptr && b->needs_grad));
    if (y->needs_grad)
      steps_.push_back([=] {
        nn::LinearBackward(x->value, w->value, y->grad,
                           x->needs_grad ? &x->grad : nullptr,
                           w->needs_grad ? &w->grad : nullptr,
                           (b != nullptr && b->needs_grad) ? &b->grad : nullptr);
      });
    return y;
  }

  Var *Add(Var *a, Var *b) {
    Require(a->value.SameShape(b->value), Errc::kShapeMismatch,
            "add: " + a->value.ShapeString() + " vs " + b->value.ShapeString());
    Tensor<T> out(a->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] + b->value[i];
    Var *y = Emit(std::move(out), a->needs_grad || b->needs_grad);
    if (y->needs_grad)
      steps_.push_back([=] {
        if (a->needs_grad)
          for (int64_t i = 0; i < y->grad.numel(); ++i) a->grad[i] += y->grad[i];
        if (b->needs_grad)
          for (int64_t i = 0; i < y->grad.numel(); ++i) b->grad[i] += y->grad[i];
      });
    return y;
  }

  // Elementwise mean of equally shaped inputs.
  Var *MeanOf(const std::vector<Var *> &xs) {
    Require(!xs.empty(), Errc::kMissingTap, "mean of zero inputs");
    Tensor<T> out(xs[0]->value.shape());
    bool needs = false;
    for (Var *x : xs) {
      Require(x->value.SameShape(out), Errc::kShapeMismatch,
              "mean_of shape mismatch");
      needs = needs || x->needs_grad;
      for (int64_t i = 0; i < out.numel(); ++i) out[i] += x->value[i];
    }
    T inv = T(1) / static_cast<T>(xs.size());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= inv;
    Var *y = Emit(std::move(out), needs);
    if (y->needs_grad) {
      std::vector<Var *> inputs = xs;
      steps_.push_back([=] {
        for (Var *x : inputs)
          if (x->needs_grad)
            for (int64_t i = 0; i < y->grad.numel(); ++i)
              x->grad[i] += y->grad[i] * inv;
      });
    }
    return y;
  }

  // [B, C, 1, W] -> [B, W, C]: temporal columns become descriptor rows.
  Var *ToDescriptors(Var *x) {
    Require(x->value.ndim() == 4 && x->value.dim(2) == 1, Errc::kShapeMismatch,
            "descriptors need a collapsed frequency axis, got " +
                x->value.ShapeString());
    int64_t B = x->value.dim(0), C = x->value.dim(1), W = x->value.dim(3);
    Tensor<T> out({B, W, C});
    for (int64_t n = 0; n < B; ++n)
      for (int64_t c = 0; c < C; ++c)
        for (int64_t w = 0; w < W; ++w)
          out(n, w, c) = x->value(n, c, 0, w);
    Var *y = Emit(std::move(out), x->needs_grad);
    if (y->needs_grad)
      steps_.push_back([=] {
        for (int64_t n = 0; n < B; ++n)
          for (int64_t c = 0; c < C; ++c)
            for (int64_t w = 0; w < W; ++w)
              x->grad(n, c, 0, w) += y->grad(n, w, c);
      });
    return y;
  }

  // [B, ...] -> [B, rest]
  Var *Flatten(Var *x) {
    int64_t B = x->value.dim(0);
    int64_t rest = x->value.numel() / B;
    Tensor<T> out({B, rest}, x->value.vec());
    Var *y = Emit(std::move(out), x->needs_grad);
    if (y->needs_grad)
      steps_.push_back([=] {
        for (int64_t i = 0; i < y->grad.numel(); ++i) x->grad[i] += y->grad[i];
      });
    return y;
  }

  // Batched NetVLAD: x [B, N, D] -> [B, K*D].
  Var *NetVlad(Var *x, Var *centroids, Var *assign_w, Var *assign_b,
               const vlad::VladOptions &opt) {
    int64_t B = x->value.dim(0), N = x->value.dim(1), D = x->value.dim(2);
    int64_t K = centroids->value.dim(0);
    bool needs = x->needs_grad || centroids->needs_grad ||
                 assign_w->needs_grad || assign_b->needs_grad;

    vlad::VladParams<T> params{centroids->value, assign_w->value,
                               assign_b->value};
    auto caches = std::make_shared<std::vector<vlad::VladCache<T>>>();
    if (needs) caches->resize(static_cast<size_t>(B));

    Tensor<T> out({B, K * D});
    for (int64_t n = 0; n < B; ++n) {
      Tensor<T> xi({N, D});
      std::copy(x->value.data() + n * N * D, x->value.data() + (n + 1) * N * D,
                xi.data());
      Tensor<T> v = vlad::VladForward(
          xi, params, opt, needs ? &(*caches)[static_cast<size_t>(n)] : nullptr);
      std::copy(v.data(), v.data() + K * D, out.data() + n * K * D);
    }
    Var *y = Emit(std::move(out), needs);
    if (y->needs_grad) {
      vlad::VladOptions opt_copy = opt;
      steps_.push_back([=] {
        vlad::VladParams<T> p{centroids->value, assign_w->value,
                              assign_b->value};
        for (int64_t n = 0; n < B; ++n) {
          Tensor<T> xi({N, D});
          std::copy(x->value.data() + n * N * D,
                    x->value.data() + (n + 1) * N * D, xi.data());
          Tensor<T> dout({K * D});
          std::copy(y->grad.data() + n * K * D, y->grad.data() + (n + 1) * K * D,
                    dout.data());
          Tensor<T> dxi({N, D});
          vlad::VladBackward(xi, p, opt_copy,
                             (*caches)[static_cast<size_t>(n)], dout,
                             x->needs_grad ? &dxi : nullptr,
                             centroids->needs_grad ? &centroids->grad : nullptr,
                             assign_w->needs_grad ? &assign_w->grad : nullptr,
                             assign_b->needs_grad ? &assign_b->grad : nullptr);
          if (x->needs_grad)
            for (int64_t i = 0; i < N * D; ++i)
              x->grad[n * N * D + i] += dxi[i];
        }
      });
    }
    return y;
  }

  // Mean softmax cross-entropy; returns the scalar loss var ([1]).
  Var *SoftmaxCrossEntropy(Var *logits, const std::vector<int> &labels) {
    nn::XentResult<T> r = nn::SoftmaxCrossEntropy(logits->value, labels);
    auto grad_logits = std::make_shared<Tensor<T>>(std::move(r.grad));
    Tensor<T> loss({1});
    loss[0] = static_cast<T>(r.loss);
    Var *y = Emit(std::move(loss), logits->needs_grad);
    if (y->needs_grad)
      steps_.push_back([=] {
        T scale = y->grad[0];
        for (int64_t i = 0; i < logits->grad.numel(); ++i)
          logits->grad[i] += scale * (*grad_logits)[i];
      });
    return y;
  }

  // Seeds d(scalar)/d(scalar) = 1 and replays the tape in reverse.
  void Backward(Var *scalar) {
    Require(scalar->value.numel() == 1, Errc::kInvalidInput,
            "backward needs a scalar");
    Require(scalar->needs_grad, Errc::kInvalidInput,
            "backward target does not require grad");
    scalar->grad[0] = T(1);
    BackwardSeeded();
  }

  // Replays the tape with output gradients already seeded by the caller.
  void BackwardSeeded() {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  size_t NumVars() const { return vars_.size(); }

 private:
  Var *Emit(Tensor<T> value, bool needs_grad, bool check = true) {
    if (check) CheckFinite(value, "op output");
    auto v = std::make_unique<Var>();
    v->value = std::move(value);
    v->needs_grad = needs_grad;
    if (needs_grad) v->grad = Tensor<T>(v->value.shape());
    vars_.push_back(std::move(v));
    return vars_.back().get();
  }

  std::vector<std::unique_ptr<Var>> vars_;
  std::vector<std::function<void()>> steps_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checking (double precision).
// ---------------------------------------------------------------------------

struct GradCheckOptions {
  double delta = 1e-4;
  // Optional extra step sizes.  A coordinate passes with the best of the
  // offered steps: vanishing gradients need a large step to stay above the
  // cancellation noise floor, while regions of extreme curvature (e.g. an
  // L2 normalization near zero) need a small one.  A genuinely wrong
  // gradient fails at every step size.
  std::vector<double> extra_deltas;
  // Coordinates sampled per tensor; <= 0 means all.
  int64_t max_coords_per_tensor = -1;
  uint64_t seed = 12345;
};

// Compares an analytic gradient against central finite differences.
//   loss_fn:  evaluates the scalar objective at the current parameter values
//   grad_fn:  evaluates analytic gradients for `params` (aligned order)
// Returns the max over sampled coordinates of |a-n| / max(|a|,|n|,1e-8).
inline double GradCheck(const std::function<double()> &loss_fn,
                        const std::function<std::vector<Tensor<double>>()> &grad_fn,
                        const std::vector<Tensor<double> *> &params,
                        const GradCheckOptions &opt = {}) {
  std::vector<Tensor<double>> analytic = grad_fn();
  Require(analytic.size() == params.size(), Errc::kShapeMismatch,
          "grad_check: analytic gradient count mismatch");
  for (const auto &g : analytic)
    if (!g.AllFinite()) Throw(Errc::kNonFinite, "analytic gradient not finite");

  std::vector<double> deltas = {opt.delta};
  deltas.insert(deltas.end(), opt.extra_deltas.begin(), opt.extra_deltas.end());

  Rng rng(opt.seed);
  double max_err = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor<double> &par = *params[p];
    Require(par.SameShape(analytic[p]), Errc::kShapeMismatch,
            "grad_check: gradient shape mismatch");
    int64_t n = par.numel();
    std::vector<int64_t> coords;
    if (opt.max_coords_per_tensor > 0 && n > opt.max_coords_per_tensor) {
      for (int64_t i = 0; i < opt.max_coords_per_tensor; ++i)
        coords.push_back(static_cast<int64_t>(rng.UniformInt(
            static_cast<uint64_t>(n))));
    } else {
      coords.resize(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    }
    for (int64_t i : coords) {
      double a = analytic[p][i];
      double best = -1.0;
      for (double delta : deltas) {
        double orig = par[i];
        par[i] = orig + delta;
        double up = loss_fn();
        par[i] = orig - delta;
        double down = loss_fn();
        par[i] = orig;
        if (!std::isfinite(up) || !std::isfinite(down))
          Throw(Errc::kNonFinite, "loss not finite during grad check");
        double numeric = (up - down) / (2.0 * delta);
        double err = std::abs(a - numeric) /
                     std::max({std::abs(a), std::abs(numeric), 1e-8});
        if (best < 0.0 || err < best) best = err;
      }
      max_err = std::max(max_err, best);
    }
  }
  return max_err;
}

}  // namespace autograd
}  // namespace hvlad

#endif  // HVLAD_AUTOGRAD_HPP_
