// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// The loss family: L1 mask-inference loss, vanilla/frame/clip mixture
// losses, frame- and clip-level classification losses, and the class
// balancing weights. All losses are plain sums over their elements; the
// trainer divides by batch size only.

#ifndef WSEP_LOSSES_HPP_
#define WSEP_LOSSES_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "wsep/ops.hpp"

namespace wsep {

enum class LabelMode { kStrong, kFrame, kClip };
enum class MixVariant { kVanilla, kConstrained };
enum class PoolMode { kMax, kAverage };

struct LossConfig {
  LabelMode label_mode = LabelMode::kFrame;
  double alpha = 100.0;
  bool use_class_weights = false;
  MixVariant mixture_loss_variant = MixVariant::kConstrained;
};

inline const char* to_string(LabelMode m) {
  switch (m) {
    case LabelMode::kStrong: return "strong";
    case LabelMode::kFrame: return "frame";
    case LabelMode::kClip: return "clip";
  }
  return "?";
}

// Class activity priors over a training split.
struct ClassPriors {
  std::vector<double> gamma;
};

constexpr double kProbClamp = 1e-7;

// Binary cross-entropy with the output clamped away from {0,1}.
inline double bce(double l, double p) {
  p = std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
  return -l * std::log(p) - (1.0 - l) * std::log(1.0 - p);
}

// W[i,tau] per the balancing rule: 1/gamma_i on active frames,
// 1/(1-gamma_i) on inactive ones. frame_labels is [n x T] in {0,1}.
template <typename T>
Tensor<T> compute_loss_weights(const ClassPriors& priors,
                               const Tensor<T>& frame_labels) {
  const int n = frame_labels.dim(0), t = frame_labels.dim(1);
  WSEP_CHECK(static_cast<int>(priors.gamma.size()) == n,
             "priors/labels class count mismatch");
  for (double gmm : priors.gamma)
    WSEP_CHECK(gmm > 0.0 && gmm < 1.0,
               "degenerate prior: gamma must lie strictly in (0,1)");
  Tensor<T> w({n, t});
  for (int i = 0; i < n; ++i) {
    T wa = static_cast<T>(1.0 / priors.gamma[i]);
    T wi = static_cast<T>(1.0 / (1.0 - priors.gamma[i]));
    for (int tau = 0; tau < t; ++tau)
      w.at(i, tau) = frame_labels.at(i, tau) > T(0.5) ? wa : wi;
  }
  return w;
}

namespace ops {

// Sum of (optionally weighted) binary cross-entropies between a constant
// label tensor and a probability node of the same shape.
template <typename T>
Node<T>* bce_sum(Graph<T>& g, Node<T>* probs, const Tensor<T>& labels,
                 const Tensor<T>& weights = {}) {
  WSEP_CHECK(probs->val.same_shape(labels), "bce_sum label shape mismatch");
  const bool weighted = weights.numel() > 0;
  if (weighted)
    WSEP_CHECK(weights.same_shape(labels), "bce_sum weight shape mismatch");
  const T lo = T(kProbClamp), hi = T(1) - T(kProbClamp);
  T total = 0;
  const std::size_t n = probs->val.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    T p = std::min(hi, std::max(lo, probs->val.data[i]));
    T l = labels.data[i];
    T w = weighted ? weights.data[i] : T(1);
    total += w * (-l * std::log(p) - (T(1) - l) * std::log(T(1) - p));
  }
  auto labels_c = std::make_shared<Tensor<T>>(labels);
  auto weights_c = std::make_shared<Tensor<T>>(weights);
  Node<T>* r = g.make(Tensor<T>({1}, {total}), {probs}, nullptr);
  r->backfn = [=]() {
    if (!probs->needs_grad) return;
    T gr = r->grad.data[0];
    for (std::size_t i = 0; i < n; ++i) {
      T p = probs->val.data[i];
      if (p <= lo || p >= hi) continue;  // clamped flat region
      T l = labels_c->data[i];
      T w = weighted ? weights_c->data[i] : T(1);
      probs->grad.data[i] += gr * w * (p - l) / (p * (T(1) - p));
    }
  };
  return r;
}

// Estimated source magnitudes: est = mask (*) tile(X, n).
// masks [n*F x T], X [F x T] constant (the mixture is not differentiated).
template <typename T>
Node<T>* mask_apply(Graph<T>& g, Node<T>* masks, const Tensor<T>& xmag,
                    int n) {
  const int f = xmag.dim(0), t = xmag.dim(1);
  WSEP_CHECK(masks->val.dim(0) == n * f && masks->val.dim(1) == t,
             "mask_apply shape mismatch: masks " << masks->val.shape_str()
                                                 << " vs X " << xmag.shape_str()
                                                 << " n=" << n);
  auto x_c = std::make_shared<Tensor<T>>(xmag);
  Tensor<T> out(masks->val.shape);
  const std::size_t ft = static_cast<std::size_t>(f) * t;
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < ft; ++j)
      out.data[i * ft + j] = masks->val.data[i * ft + j] * x_c->data[j];
  Node<T>* r = g.make(std::move(out), {masks}, nullptr);
  r->backfn = [=]() {
    if (!masks->needs_grad) return;
    for (int i = 0; i < n; ++i)
      for (std::size_t j = 0; j < ft; ++j)
        masks->grad.data[i * ft + j] += r->grad.data[i * ft + j] * x_c->data[j];
  };
  return r;
}

// L1 magnitude-spectrum approximation: sum_{i,w,tau} W_{i,tau}|est - ref|.
// weights is [n x T] or empty.
template <typename T>
Node<T>* loss_mi(Graph<T>& g, Node<T>* est, const Tensor<T>& refs,
                 const Tensor<T>& weights, int n) {
  WSEP_CHECK(est->val.same_shape(refs), "loss_mi shape mismatch");
  const int t = est->val.dim(1);
  const int f = est->val.dim(0) / n;
  const bool weighted = weights.numel() > 0;
  if (weighted)
    WSEP_CHECK(weights.dim(0) == n && weights.dim(1) == t,
               "loss_mi weight shape mismatch");
  auto refs_c = std::make_shared<Tensor<T>>(refs);
  auto w_c = std::make_shared<Tensor<T>>(weights);
  T total = 0;
  for (int i = 0; i < n; ++i) {
    for (int ff = 0; ff < f; ++ff) {
      const int row = i * f + ff;
      for (int tau = 0; tau < t; ++tau) {
        T d = est->val.at(row, tau) - refs_c->at(row, tau);
        T w = weighted ? w_c->at(i, tau) : T(1);
        total += w * (d < 0 ? -d : d);
      }
    }
  }
  Node<T>* r = g.make(Tensor<T>({1}, {total}), {est}, nullptr);
  r->backfn = [=]() {
    if (!est->needs_grad) return;
    T gr = r->grad.data[0];
    for (int i = 0; i < n; ++i) {
      for (int ff = 0; ff < f; ++ff) {
        const int row = i * f + ff;
        for (int tau = 0; tau < t; ++tau) {
          T d = est->val.at(row, tau) - refs_c->at(row, tau);
          if (d == T(0)) continue;
          T w = weighted ? w_c->at(i, tau) : T(1);
          est->grad.at(row, tau) += gr * w * (d > 0 ? T(1) : T(-1));
        }
      }
    }
  };
  return r;
}

// Mixture loss. est [n*F x T], X [F x T].
//  - vanilla:      sum |X - sum_i est_i| over all frames
//  - frame mode:   active set per frame from frame_active [n x T];
//                  frames with an empty active set are skipped entirely
//  - clip mode:    active set from clip_active [n], all frames kept
// Pass frame_active with numel()>0 for frame mode, clip_active otherwise.
template <typename T>
Node<T>* loss_mix(Graph<T>& g, Node<T>* est, const Tensor<T>& xmag, int n,
                  MixVariant variant, const Tensor<T>& frame_active,
                  const Tensor<T>& clip_active) {
  const int f = xmag.dim(0), t = xmag.dim(1);
  WSEP_CHECK(est->val.dim(0) == n * f && est->val.dim(1) == t,
             "loss_mix shape mismatch");
  const bool frame_mode = frame_active.numel() > 0;
  if (variant == MixVariant::kConstrained) {
    if (frame_mode)
      WSEP_CHECK(frame_active.dim(0) == n && frame_active.dim(1) == t,
                 "loss_mix frame label shape mismatch");
    else
      WSEP_CHECK(clip_active.numel() == n,
                 "loss_mix requires frame or clip labels for the "
                 "constrained variant");
  }
  auto x_c = std::make_shared<Tensor<T>>(xmag);
  auto fa = std::make_shared<Tensor<T>>(frame_active);
  auto ca = std::make_shared<Tensor<T>>(clip_active);

  auto active = [=](int i, int tau) -> bool {
    if (variant == MixVariant::kVanilla) return true;
    return frame_mode ? fa->at(i, tau) > T(0.5) : ca->data[i] > T(0.5);
  };
  auto frame_has_active = [=](int tau) -> bool {
    if (variant == MixVariant::kVanilla) return true;
    for (int i = 0; i < n; ++i)
      if (frame_mode ? fa->at(i, tau) > T(0.5) : ca->data[i] > T(0.5))
        return true;
    return false;
  };

  T total = 0;
  // Residual per (w, tau) for the first term, stored for backward.
  auto resid = std::make_shared<Tensor<T>>(std::vector<int>{f, t});
  auto skip = std::make_shared<std::vector<char>>(t, 0);
  for (int tau = 0; tau < t; ++tau) {
    if (variant == MixVariant::kConstrained && frame_mode &&
        !frame_has_active(tau)) {
      (*skip)[tau] = 1;  // all-silent frame, excluded entirely
      continue;
    }
    for (int ff = 0; ff < f; ++ff) {
      T rsum = x_c->at(ff, tau);
      for (int i = 0; i < n; ++i)
        if (active(i, tau)) rsum -= est->val.at(i * f + ff, tau);
      resid->at(ff, tau) = rsum;
      total += rsum < 0 ? -rsum : rsum;
    }
    if (variant == MixVariant::kConstrained) {
      for (int i = 0; i < n; ++i) {
        if (active(i, tau)) continue;
        for (int ff = 0; ff < f; ++ff) {
          T v = est->val.at(i * f + ff, tau);
          total += v < 0 ? -v : v;
        }
      }
    }
  }

  Node<T>* r = g.make(Tensor<T>({1}, {total}), {est}, nullptr);
  r->backfn = [=]() {
    if (!est->needs_grad) return;
    T gr = r->grad.data[0];
    for (int tau = 0; tau < t; ++tau) {
      if ((*skip)[tau]) continue;
      for (int i = 0; i < n; ++i) {
        const bool act = active(i, tau);
        if (variant == MixVariant::kVanilla || act) {
          for (int ff = 0; ff < f; ++ff) {
            T rv = resid->at(ff, tau);
            if (rv == T(0)) continue;
            est->grad.at(i * f + ff, tau) -= gr * (rv > 0 ? T(1) : T(-1));
          }
        } else {
          for (int ff = 0; ff < f; ++ff) {
            T v = est->val.at(i * f + ff, tau);
            if (v == T(0)) continue;
            est->grad.at(i * f + ff, tau) += gr * (v > 0 ? T(1) : T(-1));
          }
        }
      }
    }
  };
  return r;
}

}  // namespace ops

}  // namespace wsep

#endif  // WSEP_LOSSES_HPP_
