// hvlad/nn.hpp

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

#ifndef HVLAD_NN_HPP_
#define HVLAD_NN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "hvlad/common.hpp"
#include "hvlad/tensor.hpp"

namespace hvlad {
namespace nn {

// ---------------------------------------------------------------------------
// GEMM.  Row-major, accumulating (C += A*B).  The j-inner loop orders keep
// the hot loops free of reductions so they vectorize without reassociation.
// ---------------------------------------------------------------------------

// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void GemmNN(int64_t M, int64_t N, int64_t K, const T *A, const T *B, T *C) {
  for (int64_t i = 0; i < M; ++i) {
    const T *a_row = A + i * K;
    T *c_row = C + i * N;
    for (int64_t k = 0; k < K; ++k) {
      T a = a_row[k];
      const T *b_row = B + k * N;
      for (int64_t j = 0; j < N; ++j) c_row[j] += a * b_row[j];
    }
  }
}

// C[M,N] += A[K,M]^T * B[K,N]
template <typename T>
void GemmTN(int64_t M, int64_t N, int64_t K, const T *A, const T *B, T *C) {
  for (int64_t k = 0; k < K; ++k) {
    const T *a_row = A + k * M;
    const T *b_row = B + k * N;
    for (int64_t i = 0; i < M; ++i) {
      T a = a_row[i];
      T *c_row = C + i * N;
      for (int64_t j = 0; j < N; ++j) c_row[j] += a * b_row[j];
    }
  }
}

template <typename T>
void TransposeInto(int64_t rows, int64_t cols, const T *src, T *dst) {
  constexpr int64_t kBlock = 32;
  for (int64_t i0 = 0; i0 < rows; i0 += kBlock)
    for (int64_t j0 = 0; j0 < cols; j0 += kBlock) {
      int64_t i1 = std::min(rows, i0 + kBlock);
      int64_t j1 = std::min(cols, j0 + kBlock);
      for (int64_t i = i0; i < i1; ++i)
        for (int64_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
    }
}

// C[M,N] += A[M,K] * B[N,K]^T  (implemented as transpose + GemmNN)
template <typename T>
void GemmNT(int64_t M, int64_t N, int64_t K, const T *A, const T *B, T *C) {
  std::vector<T> bt(static_cast<size_t>(K * N));
  TransposeInto(N, K, B, bt.data());
  GemmNN(M, N, K, A, bt.data(), C);
}

// ---------------------------------------------------------------------------
// Convolution (cross-correlation) via im2col.
// ---------------------------------------------------------------------------

inline int64_t ConvOutDim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

namespace detail {

// cols[(c*kh+ki)*kw+kj, oh*Wout+ow] = x[c, oh*s-p+ki, ow*s-p+kj] (0 outside)
template <typename T>
void Im2Col(const T *x, int64_t C, int64_t H, int64_t W, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, int64_t Hout, int64_t Wout, T *cols) {
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t ki = 0; ki < kh; ++ki) {
      for (int64_t kj = 0; kj < kw; ++kj) {
        T *row = cols + ((c * kh + ki) * kw + kj) * (Hout * Wout);
        for (int64_t oh = 0; oh < Hout; ++oh) {
          int64_t ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= H) {
            for (int64_t ow = 0; ow < Wout; ++ow) row[oh * Wout + ow] = T(0);
            continue;
          }
          const T *x_row = x + (c * H + ih) * W;
          for (int64_t ow = 0; ow < Wout; ++ow) {
            int64_t iw = ow * stride - pad + kj;
            row[oh * Wout + ow] = (iw >= 0 && iw < W) ? x_row[iw] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T *cols, int64_t C, int64_t H, int64_t W, int64_t kh,
            int64_t kw, int64_t stride, int64_t pad, int64_t Hout, int64_t Wout,
            T *x /* accumulated into */) {
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t ki = 0; ki < kh; ++ki) {
      for (int64_t kj = 0; kj < kw; ++kj) {
        const T *row = cols + ((c * kh + ki) * kw + kj) * (Hout * Wout);
        for (int64_t oh = 0; oh < Hout; ++oh) {
          int64_t ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= H) continue;
          T *x_row = x + (c * H + ih) * W;
          for (int64_t ow = 0; ow < Wout; ++ow) {
            int64_t iw = ow * stride - pad + kj;
            if (iw >= 0 && iw < W) x_row[iw] += row[oh * Wout + ow];
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
void CheckConvShapes(const Tensor<T> &x, const Tensor<T> &w, const Tensor<T> *b,
                     int64_t stride, int64_t pad) {
  Require(x.ndim() == 4 && w.ndim() == 4, Errc::kShapeMismatch,
          "conv2d expects 4-d input " + x.ShapeString() + " and kernel " +
              w.ShapeString());
  Require(x.dim(1) == w.dim(1), Errc::kShapeMismatch,
          "conv2d channel mismatch: x " + x.ShapeString() + " w " +
              w.ShapeString());
  Require(stride >= 1 && pad >= 0, Errc::kShapeMismatch,
          "conv2d needs stride >= 1, pad >= 0");
  Require(x.dim(2) + 2 * pad >= w.dim(2) && x.dim(3) + 2 * pad >= w.dim(3),
          Errc::kShapeMismatch, "conv2d kernel larger than padded input");
  if (b != nullptr)
    Require(b->numel() == w.dim(0), Errc::kShapeMismatch,
            "conv2d bias length must equal output channels");
}

template <typename T>
Tensor<T> Conv2dForward(const Tensor<T> &x, const Tensor<T> &w,
                        const Tensor<T> *b, int64_t stride, int64_t pad) {
  CheckConvShapes(x, w, b, stride, pad);
  int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  int64_t Cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  int64_t Hout = ConvOutDim(H, kh, stride, pad);
  int64_t Wout = ConvOutDim(W, kw, stride, pad);
  int64_t K = C * kh * kw, HW = Hout * Wout;

  Tensor<T> y({B, Cout, Hout, Wout});
  std::vector<T> cols(static_cast<size_t>(K * HW));
  for (int64_t n = 0; n < B; ++n) {
    detail::Im2Col(x.data() + n * C * H * W, C, H, W, kh, kw, stride, pad, Hout,
                   Wout, cols.data());
    GemmNN(Cout, HW, K, w.data(), cols.data(), y.data() + n * Cout * HW);
  }
  if (b != nullptr) {
    for (int64_t n = 0; n < B; ++n)
      for (int64_t c = 0; c < Cout; ++c) {
        T bias = (*b)[c];
        T *row = y.data() + (n * Cout + c) * HW;
        for (int64_t i = 0; i < HW; ++i) row[i] += bias;
      }
  }
  return y;
}

template <typename T>
void Conv2dBackward(const Tensor<T> &x, const Tensor<T> &w, int64_t stride,
                    int64_t pad, const Tensor<T> &dy, Tensor<T> *dx,
                    Tensor<T> *dw, Tensor<T> *db) {
  int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  int64_t Cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  int64_t Hout = dy.dim(2), Wout = dy.dim(3);
  int64_t K = C * kh * kw, HW = Hout * Wout;

  std::vector<T> cols(static_cast<size_t>(K * HW));
  std::vector<T> dcols(static_cast<size_t>(K * HW));
  for (int64_t n = 0; n < B; ++n) {
    const T *dy_n = dy.data() + n * Cout * HW;
    if (dw != nullptr) {
      detail::Im2Col(x.data() + n * C * H * W, C, H, W, kh, kw, stride, pad,
                     Hout, Wout, cols.data());
      GemmNT(Cout, K, HW, dy_n, cols.data(), dw->data());
    }
    if (dx != nullptr) {
      std::fill(dcols.begin(), dcols.end(), T(0));
      GemmTN(K, HW, Cout, w.data(), dy_n, dcols.data());
      detail::Col2Im(dcols.data(), C, H, W, kh, kw, stride, pad, Hout, Wout,
                     dx->data() + n * C * H * W);
    }
  }
  if (db != nullptr) {
    for (int64_t n = 0; n < B; ++n)
      for (int64_t c = 0; c < Cout; ++c) {
        const T *row = dy.data() + (n * Cout + c) * HW;
        T acc = 0;
        for (int64_t i = 0; i < HW; ++i) acc += row[i];
        (*db)[c] += acc;
      }
  }
}

// ---------------------------------------------------------------------------
// Batch normalization over [B, C, H, W], statistics per channel.
// ---------------------------------------------------------------------------

template <typename T>
struct BatchNormCache {
  Tensor<T> x_hat;     // normalized input
  std::vector<T> inv_std;  // per channel
};

template <typename T>
Tensor<T> BatchNorm2dForward(const Tensor<T> &x, const Tensor<T> &gamma,
                             const Tensor<T> &beta, Tensor<T> *running_mean,
                             Tensor<T> *running_var, bool train_mode,
                             T momentum, T eps, BatchNormCache<T> *cache) {
  Require(x.ndim() == 4, Errc::kShapeMismatch, "batchnorm2d expects 4-d input");
  int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  Require(gamma.numel() == C && beta.numel() == C, Errc::kShapeMismatch,
          "batchnorm2d gamma/beta length must equal channels");
  Require(running_mean->numel() == C && running_var->numel() == C,
          Errc::kShapeMismatch, "batchnorm2d running stats length mismatch");
  int64_t M = B * H * W;
  int64_t HW = H * W;

  Tensor<T> y(x.shape());
  if (cache != nullptr) {
    cache->x_hat = Tensor<T>(x.shape());
    cache->inv_std.assign(static_cast<size_t>(C), T(0));
  }

  for (int64_t c = 0; c < C; ++c) {
    T mean, var;
    if (train_mode) {
      double sum = 0.0;
      for (int64_t n = 0; n < B; ++n) {
        const T *row = x.data() + (n * C + c) * HW;
        for (int64_t i = 0; i < HW; ++i) sum += row[i];
      }
      mean = static_cast<T>(sum / static_cast<double>(M));
      double ss = 0.0;
      for (int64_t n = 0; n < B; ++n) {
        const T *row = x.data() + (n * C + c) * HW;
        for (int64_t i = 0; i < HW; ++i) {
          double d = row[i] - mean;
          ss += d * d;
        }
      }
      var = static_cast<T>(ss / static_cast<double>(M));
      // Unbiased variance for the running estimate when possible.
      T var_update = (M > 1)
                         ? static_cast<T>(ss / static_cast<double>(M - 1))
                         : var;
      (*running_mean)[c] = (T(1) - momentum) * (*running_mean)[c] + momentum * mean;
      (*running_var)[c] = (T(1) - momentum) * (*running_var)[c] + momentum * var_update;
    } else {
      mean = (*running_mean)[c];
      var = (*running_var)[c];
    }
    T inv_std = T(1) / std::sqrt(var + eps);
    T g = gamma[c], bb = beta[c];
    if (cache != nullptr) cache->inv_std[static_cast<size_t>(c)] = inv_std;
    for (int64_t n = 0; n < B; ++n) {
      const T *xr = x.data() + (n * C + c) * HW;
      T *yr = y.data() + (n * C + c) * HW;
      T *hr = cache != nullptr ? cache->x_hat.data() + (n * C + c) * HW : nullptr;
      for (int64_t i = 0; i < HW; ++i) {
        T xh = (xr[i] - mean) * inv_std;
        if (hr != nullptr) hr[i] = xh;
        yr[i] = g * xh + bb;
      }
    }
  }
  return y;
}

// Train-mode backward; the batch statistics are functions of x, which the
// x_hat/inv_std cache captures.
template <typename T>
void BatchNorm2dBackward(const BatchNormCache<T> &cache, const Tensor<T> &gamma,
                         const Tensor<T> &dy, bool train_mode, Tensor<T> *dx,
                         Tensor<T> *dgamma, Tensor<T> *dbeta) {
  const Tensor<T> &x_hat = cache.x_hat;
  int64_t B = x_hat.dim(0), C = x_hat.dim(1), H = x_hat.dim(2), W = x_hat.dim(3);
  int64_t HW = H * W;
  int64_t M = B * HW;

  for (int64_t c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int64_t n = 0; n < B; ++n) {
      const T *dyr = dy.data() + (n * C + c) * HW;
      const T *hr = x_hat.data() + (n * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) {
        sum_dy += dyr[i];
        sum_dy_xhat += static_cast<double>(dyr[i]) * hr[i];
      }
    }
    if (dgamma != nullptr) (*dgamma)[c] += static_cast<T>(sum_dy_xhat);
    if (dbeta != nullptr) (*dbeta)[c] += static_cast<T>(sum_dy);
    if (dx == nullptr) continue;

    T g = gamma[c];
    T inv_std = cache.inv_std[static_cast<size_t>(c)];
    T mean_dy = static_cast<T>(sum_dy / static_cast<double>(M));
    T mean_dy_xhat = static_cast<T>(sum_dy_xhat / static_cast<double>(M));
    for (int64_t n = 0; n < B; ++n) {
      const T *dyr = dy.data() + (n * C + c) * HW;
      const T *hr = x_hat.data() + (n * C + c) * HW;
      T *dxr = dx->data() + (n * C + c) * HW;
      if (train_mode) {
        for (int64_t i = 0; i < HW; ++i)
          dxr[i] += g * inv_std * (dyr[i] - mean_dy - hr[i] * mean_dy_xhat);
      } else {
        for (int64_t i = 0; i < HW; ++i) dxr[i] += g * inv_std * dyr[i];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// ReLU / max pooling / linear.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> ReluForward(const Tensor<T> &x) {
  Tensor<T> y(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
void ReluBackward(const Tensor<T> &x, const Tensor<T> &dy, Tensor<T> *dx) {
  for (int64_t i = 0; i < x.numel(); ++i)
    if (x[i] > T(0)) (*dx)[i] += dy[i];
}

template <typename T>
Tensor<T> MaxPool2dForward(const Tensor<T> &x, int64_t kh, int64_t kw,
                           int64_t sh, int64_t sw,
                           std::vector<int64_t> *argmax) {
  Require(x.ndim() == 4, Errc::kShapeMismatch, "maxpool2d expects 4-d input");
  int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  Require(kh >= 1 && kw >= 1 && sh >= 1 && sw >= 1 && kh <= H && kw <= W,
          Errc::kShapeMismatch, "maxpool2d window larger than input");
  int64_t Hout = (H - kh) / sh + 1;
  int64_t Wout = (W - kw) / sw + 1;
  Tensor<T> y({B, C, Hout, Wout});
  if (argmax != nullptr) argmax->assign(static_cast<size_t>(y.numel()), 0);

  int64_t o = 0;
  for (int64_t n = 0; n < B; ++n)
    for (int64_t c = 0; c < C; ++c) {
      const T *plane = x.data() + (n * C + c) * H * W;
      for (int64_t oh = 0; oh < Hout; ++oh)
        for (int64_t ow = 0; ow < Wout; ++ow) {
          int64_t best_idx = (oh * sh) * W + ow * sw;
          T best = plane[best_idx];
          for (int64_t ki = 0; ki < kh; ++ki)
            for (int64_t kj = 0; kj < kw; ++kj) {
              int64_t idx = (oh * sh + ki) * W + ow * sw + kj;
              if (plane[idx] > best) {
                best = plane[idx];
                best_idx = idx;
              }
            }
          y[o] = best;
          if (argmax != nullptr)
            (*argmax)[static_cast<size_t>(o)] = (n * C + c) * H * W + best_idx;
          ++o;
        }
    }
  return y;
}

template <typename T>
void MaxPool2dBackward(const std::vector<int64_t> &argmax, const Tensor<T> &dy,
                       Tensor<T> *dx) {
  for (int64_t i = 0; i < dy.numel(); ++i)
    (*dx)[argmax[static_cast<size_t>(i)]] += dy[i];
}

template <typename T>
Tensor<T> LinearForward(const Tensor<T> &x, const Tensor<T> &w,
                        const Tensor<T> *b) {
  Require(x.ndim() == 2 && w.ndim() == 2, Errc::kShapeMismatch,
          "linear expects 2-d input and weight");
  Require(x.dim(1) == w.dim(1), Errc::kShapeMismatch,
          "linear: input dim " + x.ShapeString() + " vs weight " +
              w.ShapeString());
  int64_t B = x.dim(0), Din = x.dim(1), Dout = w.dim(0);
  if (b != nullptr)
    Require(b->numel() == Dout, Errc::kShapeMismatch, "linear bias mismatch");
  Tensor<T> y({B, Dout});
  GemmNT(B, Dout, Din, x.data(), w.data(), y.data());
  if (b != nullptr)
    for (int64_t n = 0; n < B; ++n)
      for (int64_t j = 0; j < Dout; ++j) y(n, j) += (*b)[j];
  return y;
}

template <typename T>
void LinearBackward(const Tensor<T> &x, const Tensor<T> &w, const Tensor<T> &dy,
                    Tensor<T> *dx, Tensor<T> *dw, Tensor<T> *db) {
  int64_t B = x.dim(0), Din = x.dim(1), Dout = w.dim(0);
  if (dx != nullptr) GemmNN(B, Din, Dout, dy.data(), w.data(), dx->data());
  if (dw != nullptr) GemmTN(Dout, Din, B, dy.data(), x.data(), dw->data());
  if (db != nullptr)
    for (int64_t n = 0; n < B; ++n)
      for (int64_t j = 0; j < Dout; ++j) (*db)[j] += dy(n, j);
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy.  Returns mean loss over the batch and the gradient
// w.r.t. logits, (softmax - onehot)/B, computed with max-shift.
// ---------------------------------------------------------------------------

template <typename T>
struct XentResult {
  double loss = 0.0;
  Tensor<T> grad;  // [B, N]
};

template <typename T>
XentResult<T> SoftmaxCrossEntropy(const Tensor<T> &logits,
                                  const std::vector<int> &labels) {
  Require(logits.ndim() == 2, Errc::kShapeMismatch, "logits must be 2-d");
  int64_t B = logits.dim(0), N = logits.dim(1);
  Require(static_cast<int64_t>(labels.size()) == B, Errc::kShapeMismatch,
          "labels length must equal batch size");

  XentResult<T> out;
  out.grad = Tensor<T>(logits.shape());
  double total = 0.0;
  for (int64_t n = 0; n < B; ++n) {
    int label = labels[static_cast<size_t>(n)];
    Require(label >= 0 && label < N, Errc::kLabelOutOfRange,
            "label " + std::to_string(label) + " outside [0," +
                std::to_string(N) + ")");
    const T *row = logits.data() + n * N;
    double mx = row[0];
    for (int64_t j = 1; j < N; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double denom = 0.0;
    for (int64_t j = 0; j < N; ++j) denom += std::exp(row[j] - mx);
    double log_denom = std::log(denom);
    total += log_denom - (row[label] - mx);
    T *g = out.grad.data() + n * N;
    double inv_b = 1.0 / static_cast<double>(B);
    for (int64_t j = 0; j < N; ++j)
      g[j] = static_cast<T>(std::exp(row[j] - mx) / denom * inv_b);
    g[label] -= static_cast<T>(inv_b);
  }
  out.loss = total / static_cast<double>(B);
  if (!std::isfinite(out.loss))
    Throw(Errc::kNonFinite, "cross-entropy loss is not finite");
  return out;
}

// ---------------------------------------------------------------------------
// Adam.
// ---------------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig cfg;
  int64_t t = 0;
  // Aligned with the trainable parameter list they were created for.
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;

  static AdamState Init(const std::vector<const Tensor<T> *> &params,
                        const AdamConfig &cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor<T> *p : params) {
      s.m.emplace_back(p->shape());
      s.v.emplace_back(p->shape());
    }
    return s;
  }
};

// One bias-corrected Adam update over an aligned parameter/gradient list.
template <typename T>
void AdamStep(std::vector<Tensor<T> *> params,
              const std::vector<const Tensor<T> *> &grads, AdamState<T> *state) {
  Require(params.size() == grads.size() && params.size() == state->m.size(),
          Errc::kShapeMismatch, "adam: parameter/gradient count mismatch");
  state->t += 1;
  double b1 = state->cfg.beta1, b2 = state->cfg.beta2;
  double bc1 = 1.0 - std::pow(b1, static_cast<double>(state->t));
  double bc2 = 1.0 - std::pow(b2, static_cast<double>(state->t));
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor<T> &par = *params[p];
    const Tensor<T> &g = *grads[p];
    Require(par.SameShape(g) && par.SameShape(state->m[p]),
            Errc::kShapeMismatch, "adam: shape mismatch at parameter " +
                std::to_string(p));
    T *m = state->m[p].data();
    T *v = state->v[p].data();
    T *w = par.data();
    const T *gd = g.data();
    for (int64_t i = 0; i < par.numel(); ++i) {
      double gi = gd[i];
      double mi = b1 * m[i] + (1.0 - b1) * gi;
      double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      double m_hat = mi / bc1;
      double v_hat = vi / bc2;
      w[i] = static_cast<T>(w[i] - state->cfg.lr * m_hat /
                                       (std::sqrt(v_hat) + state->cfg.eps));
    }
    CheckFinite(par, "adam_step");
  }
}

// ---------------------------------------------------------------------------
// He-uniform initialization (fan-in).
// ---------------------------------------------------------------------------

template <typename T>
void HeUniformInit(Tensor<T> *w, int64_t fan_in, Rng *rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (int64_t i = 0; i < w->numel(); ++i)
    (*w)[i] = static_cast<T>(rng->Uniform(-limit, limit));
}

}  // namespace nn

// Standalone op surface; output finiteness is checked here.  The bias
// pointer is a non-deduced context so callers may pass nullptr.

template <typename T>
Tensor<T> Conv2d(const Tensor<T> &x, const Tensor<T> &w,
                 const Tensor<std::type_identity_t<T>> *b, int64_t stride = 1,
                 int64_t pad = 0) {
  Tensor<T> y = nn::Conv2dForward(x, w, b, stride, pad);
  CheckFinite(y, "conv2d");
  return y;
}

template <typename T>
Tensor<T> Relu(const Tensor<T> &x) { return nn::ReluForward(x); }

template <typename T>
Tensor<T> MaxPool2d(const Tensor<T> &x, int64_t k, int64_t stride) {
  return nn::MaxPool2dForward(x, k, k, stride, stride, nullptr);
}

template <typename T>
Tensor<T> Linear(const Tensor<T> &x, const Tensor<T> &w,
                 const Tensor<std::type_identity_t<T>> *b) {
  Tensor<T> y = nn::LinearForward(x, w, b);
  CheckFinite(y, "linear");
  return y;
}

}  // namespace hvlad

#endif  // HVLAD_NN_HPP_
