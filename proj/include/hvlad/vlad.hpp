// hvlad/vlad.hpp

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

#ifndef HVLAD_VLAD_HPP_
#define HVLAD_VLAD_HPP_

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "hvlad/common.hpp"
#include "hvlad/nn.hpp"
#include "hvlad/tensor.hpp"

namespace hvlad {
namespace vlad {

inline constexpr double kNormEps = 1e-12;

// Learned soft assignment (the usual trainable aggregation), or unit
// assignment where every descriptor contributes its residual to every
// cluster with weight one.  The unit mode exists as a reference behaviour
// for tests and is not used by the encoder variants.
enum class AssignMode { kSoft, kUnit };

struct VladOptions {
  AssignMode assign = AssignMode::kSoft;
  bool intra_norm = true;  // per-cluster L2 before the global L2
};

// Trainable aggregation parameters.
template <typename T>
struct VladParams {
  Tensor<T> centroids;  // [K, D]
  Tensor<T> assign_w;   // [K, D]
  Tensor<T> assign_b;   // [K]

  int64_t clusters() const { return centroids.dim(0); }
  int64_t descriptor_dim() const { return centroids.dim(1); }
};

template <typename T>
void CheckVladShapes(const Tensor<T> &x, const VladParams<T> &p) {
  Require(x.ndim() == 2, Errc::kShapeMismatch, "descriptors must be [N, D]");
  Require(p.centroids.ndim() == 2 && p.assign_w.ndim() == 2 &&
              p.assign_b.ndim() == 1,
          Errc::kShapeMismatch, "vlad parameter ranks");
  Require(p.centroids.SameShape(p.assign_w), Errc::kShapeMismatch,
          "centroids and assignment weights must have equal shapes");
  Require(p.assign_b.numel() == p.centroids.dim(0), Errc::kShapeMismatch,
          "assignment bias length must equal cluster count");
  Require(x.dim(1) == p.centroids.dim(1), Errc::kShapeMismatch,
          "descriptor dim " + x.ShapeString() + " vs centroids " +
              p.centroids.ShapeString());
  Require(p.centroids.dim(0) >= 2, Errc::kShapeMismatch,
          "at least two clusters required");
}

// Row-wise softmax of affine assignment scores: A[i,k] ∝ exp(w_k·x_i + b_k).
template <typename T>
Tensor<T> SoftAssign(const Tensor<T> &x, const Tensor<T> &assign_w,
                     const Tensor<T> &assign_b) {
  Require(x.ndim() == 2 && assign_w.ndim() == 2, Errc::kShapeMismatch,
          "soft_assign expects 2-d inputs");
  Require(x.dim(1) == assign_w.dim(1), Errc::kShapeMismatch,
          "soft_assign dim mismatch");
  Require(assign_b.numel() == assign_w.dim(0), Errc::kShapeMismatch,
          "soft_assign bias mismatch");
  int64_t N = x.dim(0), K = assign_w.dim(0), D = x.dim(1);

  Tensor<T> scores({N, K});
  nn::GemmNT(N, K, D, x.data(), assign_w.data(), scores.data());
  Tensor<T> a({N, K});
  for (int64_t i = 0; i < N; ++i) {
    double mx = scores(i, 0) + assign_b[0];
    for (int64_t k = 1; k < K; ++k)
      mx = std::max(mx, static_cast<double>(scores(i, k) + assign_b[k]));
    double denom = 0.0;
    for (int64_t k = 0; k < K; ++k)
      denom += std::exp(scores(i, k) + assign_b[k] - mx);
    for (int64_t k = 0; k < K; ++k)
      a(i, k) = static_cast<T>(std::exp(scores(i, k) + assign_b[k] - mx) / denom);
  }
  CheckFinite(a, "soft_assign");
  return a;
}

template <typename T>
struct VladCache {
  Tensor<T> assign;      // [N, K]
  Tensor<T> residual;    // [K, D], pre-normalization V
  std::vector<T> row_norm;   // per-cluster ||V_k|| (before eps)
  Tensor<T> intra;       // [K, D], after intra-normalization (== V if disabled)
  T global_norm = T(0);  // ||flatten(intra)|| (before eps)
};

// V[k,j] = sum_i A[i,k] (x[i,j] - c[k,j]); per-cluster L2 (optional), then a
// global L2 over the flattened vector.
template <typename T>
Tensor<T> VladForward(const Tensor<T> &x, const VladParams<T> &p,
                      const VladOptions &opt,
                      VladCache<std::type_identity_t<T>> *cache) {
  CheckVladShapes(x, p);
  int64_t N = x.dim(0), D = x.dim(1), K = p.centroids.dim(0);

  Tensor<T> a;
  if (opt.assign == AssignMode::kSoft) {
    a = SoftAssign(x, p.assign_w, p.assign_b);
  } else {
    a = Tensor<T>::Full({N, K}, T(1));
  }

  // V = A^T X - colsum(A) ∘ C
  Tensor<T> v({K, D});
  nn::GemmTN(K, D, N, a.data(), x.data(), v.data());
  for (int64_t k = 0; k < K; ++k) {
    double ak = 0.0;
    for (int64_t i = 0; i < N; ++i) ak += a(i, k);
    for (int64_t j = 0; j < D; ++j)
      v(k, j) -= static_cast<T>(ak) * p.centroids(k, j);
  }

  Tensor<T> intra = v;
  std::vector<T> row_norm(static_cast<size_t>(K), T(0));
  if (opt.intra_norm) {
    for (int64_t k = 0; k < K; ++k) {
      double ss = 0.0;
      for (int64_t j = 0; j < D; ++j) ss += static_cast<double>(v(k, j)) * v(k, j);
      T norm = static_cast<T>(std::sqrt(ss));
      row_norm[static_cast<size_t>(k)] = norm;
      T inv = T(1) / (norm + static_cast<T>(kNormEps));
      for (int64_t j = 0; j < D; ++j) intra(k, j) = v(k, j) * inv;
    }
  }

  double ss = 0.0;
  for (int64_t i = 0; i < intra.numel(); ++i)
    ss += static_cast<double>(intra[i]) * intra[i];
  T gnorm = static_cast<T>(std::sqrt(ss));
  T inv = T(1) / (gnorm + static_cast<T>(kNormEps));
  Tensor<T> out({K * D});
  for (int64_t i = 0; i < intra.numel(); ++i) out[i] = intra[i] * inv;

  if (cache != nullptr) {
    cache->assign = std::move(a);
    cache->residual = std::move(v);
    cache->row_norm = std::move(row_norm);
    cache->intra = std::move(intra);
    cache->global_norm = gnorm;
  }
  CheckFinite(out, "netvlad_aggregate");
  return out;
}

namespace detail {

// Backward of y = v / (||v|| + eps):  dv = dy/s - (v·dy) v / (s^2 n),
// with s = n + eps.  At n == 0 the second term vanishes.
template <typename T>
void L2NormBackward(const T *v, const T *dy, int64_t n_elems, T norm, T *dv) {
  double s = static_cast<double>(norm) + kNormEps;
  double dot = 0.0;
  for (int64_t i = 0; i < n_elems; ++i)
    dot += static_cast<double>(v[i]) * dy[i];
  double coef = (norm > T(0)) ? dot / (s * s * static_cast<double>(norm)) : 0.0;
  for (int64_t i = 0; i < n_elems; ++i)
    dv[i] += static_cast<T>(dy[i] / s - coef * v[i]);
}

}  // namespace detail

// Gradients w.r.t. descriptors and all three parameter tensors.  Pass
// nullptr to skip an output; gradients are accumulated.
template <typename T>
void VladBackward(const Tensor<T> &x, const VladParams<T> &p,
                  const VladOptions &opt, const VladCache<T> &cache,
                  const Tensor<T> &dout, Tensor<T> *dx, Tensor<T> *dc,
                  Tensor<T> *dw, Tensor<T> *db) {
  int64_t N = x.dim(0), D = x.dim(1), K = p.centroids.dim(0);

  // Global normalization.
  Tensor<T> dintra({K, D});
  detail::L2NormBackward(cache.intra.data(), dout.data(), K * D,
                         cache.global_norm, dintra.data());

  // Intra (per-cluster) normalization.
  Tensor<T> dv({K, D});
  if (opt.intra_norm) {
    for (int64_t k = 0; k < K; ++k)
      detail::L2NormBackward(cache.residual.data() + k * D,
                             dintra.data() + k * D, D,
                             cache.row_norm[static_cast<size_t>(k)],
                             dv.data() + k * D);
  } else {
    dv = dintra;
  }

  // V[k,j] = sum_i A[i,k] x[i,j] - (sum_i A[i,k]) c[k,j]
  const Tensor<T> &a = cache.assign;
  if (dx != nullptr) nn::GemmNN(N, D, K, a.data(), dv.data(), dx->data());
  if (dc != nullptr) {
    for (int64_t k = 0; k < K; ++k) {
      double ak = 0.0;
      for (int64_t i = 0; i < N; ++i) ak += a(i, k);
      for (int64_t j = 0; j < D; ++j)
        (*dc)(k, j) -= static_cast<T>(ak) * dv(k, j);
    }
  }

  if (opt.assign == AssignMode::kUnit) return;  // assignment is constant

  // dA[i,k] = sum_j dV[k,j] (x[i,j] - c[k,j])
  Tensor<T> da({N, K});
  for (int64_t i = 0; i < N; ++i)
    for (int64_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (int64_t j = 0; j < D; ++j)
        acc += static_cast<double>(dv(k, j)) * (x(i, j) - p.centroids(k, j));
      da(i, k) = static_cast<T>(acc);
    }

  // Softmax rows: dS[i,k] = A[i,k] (dA[i,k] - sum_k' A[i,k'] dA[i,k'])
  Tensor<T> ds({N, K});
  for (int64_t i = 0; i < N; ++i) {
    double dot = 0.0;
    for (int64_t k = 0; k < K; ++k)
      dot += static_cast<double>(a(i, k)) * da(i, k);
    for (int64_t k = 0; k < K; ++k)
      ds(i, k) = a(i, k) * static_cast<T>(da(i, k) - dot);
  }

  // S = X W^T + b
  if (dx != nullptr) nn::GemmNN(N, D, K, ds.data(), p.assign_w.data(), dx->data());
  if (dw != nullptr) nn::GemmTN(K, D, N, ds.data(), x.data(), dw->data());
  if (db != nullptr)
    for (int64_t i = 0; i < N; ++i)
      for (int64_t k = 0; k < K; ++k) (*db)[k] += ds(i, k);
}

// Brute-force reference: nearest-centroid hard assignment (ties to the
// lowest k), explicit residual loops, then the same two-stage normalization.
template <typename T>
Tensor<T> VladHardOracle(const Tensor<T> &x, const Tensor<T> &centroids,
                         bool intra_norm = true) {
  Require(x.ndim() == 2 && centroids.ndim() == 2 && x.dim(1) == centroids.dim(1),
          Errc::kShapeMismatch, "vlad_hard_oracle shape mismatch");
  int64_t N = x.dim(0), D = x.dim(1), K = centroids.dim(0);

  Tensor<T> v({K, D});
  for (int64_t i = 0; i < N; ++i) {
    int64_t best = 0;
    double best_d = 0.0;
    for (int64_t k = 0; k < K; ++k) {
      double d = 0.0;
      for (int64_t j = 0; j < D; ++j) {
        double r = static_cast<double>(x(i, j)) - centroids(k, j);
        d += r * r;
      }
      if (k == 0 || d < best_d) {
        best_d = d;
        best = k;
      }
    }
    for (int64_t j = 0; j < D; ++j) v(best, j) += x(i, j) - centroids(best, j);
  }

  if (intra_norm) {
    for (int64_t k = 0; k < K; ++k) {
      double ss = 0.0;
      for (int64_t j = 0; j < D; ++j) ss += static_cast<double>(v(k, j)) * v(k, j);
      T inv = static_cast<T>(1.0 / (std::sqrt(ss) + kNormEps));
      for (int64_t j = 0; j < D; ++j) v(k, j) *= inv;
    }
  }
  double ss = 0.0;
  for (int64_t i = 0; i < v.numel(); ++i)
    ss += static_cast<double>(v[i]) * v[i];
  T inv = static_cast<T>(1.0 / (std::sqrt(ss) + kNormEps));
  Tensor<T> out({K * D});
  for (int64_t i = 0; i < v.numel(); ++i) out[i] = v[i] * inv;
  return out;
}

// Lloyd k-means over descriptor rows, fixed iteration budget, deterministic
// given the stream.  Initial centroids are distinct sampled rows; a cluster
// that empties is reseeded with the point farthest from its centroid.
template <typename T>
Tensor<T> KMeans(const Tensor<T> &x, int64_t k, int iters, Rng *rng) {
  Require(x.ndim() == 2, Errc::kShapeMismatch, "kmeans expects [N, D]");
  int64_t N = x.dim(0), D = x.dim(1);
  Require(N >= k && k >= 1, Errc::kInvalidInput,
          "kmeans needs at least k descriptors");

  std::vector<int64_t> order(static_cast<size_t>(N));
  for (int64_t i = 0; i < N; ++i) order[static_cast<size_t>(i)] = i;
  rng->Shuffle(&order);

  Tensor<T> c({k, D});
  for (int64_t j = 0; j < k; ++j)
    for (int64_t d = 0; d < D; ++d)
      c(j, d) = x(order[static_cast<size_t>(j)], d);

  std::vector<int64_t> assign(static_cast<size_t>(N), 0);
  for (int it = 0; it < iters; ++it) {
    for (int64_t i = 0; i < N; ++i) {
      int64_t best = 0;
      double best_d = 0.0;
      for (int64_t kk = 0; kk < k; ++kk) {
        double d = 0.0;
        for (int64_t j = 0; j < D; ++j) {
          double r = static_cast<double>(x(i, j)) - c(kk, j);
          d += r * r;
        }
        if (kk == 0 || d < best_d) {
          best_d = d;
          best = kk;
        }
      }
      assign[static_cast<size_t>(i)] = best;
    }
    Tensor<double> sums({k, D});
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (int64_t i = 0; i < N; ++i) {
      int64_t kk = assign[static_cast<size_t>(i)];
      ++counts[static_cast<size_t>(kk)];
      for (int64_t j = 0; j < D; ++j) sums(kk, j) += x(i, j);
    }
    for (int64_t kk = 0; kk < k; ++kk) {
      if (counts[static_cast<size_t>(kk)] == 0) {
        // Reseed from the point farthest from its assigned centroid.
        int64_t far = 0;
        double far_d = -1.0;
        for (int64_t i = 0; i < N; ++i) {
          int64_t a = assign[static_cast<size_t>(i)];
          double d = 0.0;
          for (int64_t j = 0; j < D; ++j) {
            double r = static_cast<double>(x(i, j)) - c(a, j);
            d += r * r;
          }
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        for (int64_t j = 0; j < D; ++j) c(kk, j) = x(far, j);
        continue;
      }
      double inv = 1.0 / static_cast<double>(counts[static_cast<size_t>(kk)]);
      for (int64_t j = 0; j < D; ++j)
        c(kk, j) = static_cast<T>(sums(kk, j) * inv);
    }
  }
  return c;
}

// Sets assignment weights/bias so soft assignment approaches the
// nearest-centroid rule as alpha grows: w_k = 2*alpha*c_k,
// b_k = -alpha*||c_k||^2.
template <typename T>
void InitAssignFromCentroids(VladParams<T> *p, double alpha) {
  int64_t K = p->centroids.dim(0), D = p->centroids.dim(1);
  p->assign_w = Tensor<T>({K, D});
  p->assign_b = Tensor<T>({K});
  for (int64_t k = 0; k < K; ++k) {
    double ss = 0.0;
    for (int64_t j = 0; j < D; ++j) {
      double cj = p->centroids(k, j);
      p->assign_w(k, j) = static_cast<T>(2.0 * alpha * cj);
      ss += cj * cj;
    }
    p->assign_b[k] = static_cast<T>(-alpha * ss);
  }
}

}  // namespace vlad

// Spec-level entry point: aggregate one descriptor set to a unit vector.
template <typename T>
Tensor<T> NetVladAggregate(const Tensor<T> &x,
                           const vlad::VladParams<T> &params,
                           const vlad::VladOptions &opt = {}) {
  return vlad::VladForward(x, params, opt, nullptr);
}

}  // namespace hvlad

#endif  // HVLAD_VLAD_HPP_
