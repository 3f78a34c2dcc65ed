// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Loss composition: classification + mixture losses per label mode, with
// optional class-balancing weights, assembled into one scalar objective.

#ifndef WSEP_OBJECTIVES_HPP_
#define WSEP_OBJECTIVES_HPP_

#include <vector>

#include "wsep/losses.hpp"
#include "wsep/networks.hpp"

namespace wsep::obj {

// Total frame-level classification loss: the mixture term plus, per
// estimated source i, the term with labels zeroed for every class j != i.
// labels/weights are [n x T'] at the classifier's time resolution.
template <typename T>
Node<T>* frame_class_loss(Graph<T>& g, Node<T>* probs_mix,
                          const std::vector<Node<T>*>& probs_est,
                          const Tensor<T>& labels, const Tensor<T>& weights) {
  const int n = labels.dim(0);
  WSEP_CHECK(static_cast<int>(probs_est.size()) == n,
             "frame_class_loss: need one probability tensor per source");
  Node<T>* total = ops::bce_sum(g, probs_mix, labels, weights);
  for (int i = 0; i < n; ++i) {
    Tensor<T> li(labels.shape);
    for (int tau = 0; tau < labels.dim(1); ++tau)
      li.at(i, tau) = labels.at(i, tau);
    total = ops::add(g, total, ops::bce_sum(g, probs_est[i], li, weights));
  }
  return total;
}

// Clip-level analogue; probabilities are [n x 1] pooled outputs.
template <typename T>
Node<T>* clip_class_loss(Graph<T>& g, Node<T>* clip_probs_mix,
                         const std::vector<Node<T>*>& clip_probs_est,
                         const std::vector<int>& clip_labels) {
  const int n = static_cast<int>(clip_labels.size());
  WSEP_CHECK(static_cast<int>(clip_probs_est.size()) == n,
             "clip_class_loss: need one probability vector per source");
  Tensor<T> l({n, 1});
  for (int i = 0; i < n; ++i) l.data[i] = static_cast<T>(clip_labels[i]);
  Node<T>* total = ops::bce_sum(g, clip_probs_mix, l, Tensor<T>{});
  for (int i = 0; i < n; ++i) {
    Tensor<T> li({n, 1});
    li.data[i] = static_cast<T>(clip_labels[i]);
    total = ops::add(g, total, ops::bce_sum(g, clip_probs_est[i], li,
                                            Tensor<T>{}));
  }
  return total;
}

// Everything total_loss needs besides the mask node.
template <typename T>
struct LossInputs {
  Tensor<T> xmag;          // mixture magnitude [F x T]
  Tensor<T> strong_refs;   // [n*F x T]; strong mode only
  Tensor<T> frame_labels;  // [n x T] at native frame resolution
  std::vector<int> clip_labels;
};

template <typename T>
struct LossBundle {
  Node<T>* total = nullptr;
  Node<T>* cls = nullptr;  // classification component (frame/clip modes)
  Node<T>* mix = nullptr;  // mixture component (frame/clip modes)
};

namespace detail {

// In-graph classifier feature path for a magnitude node [F x T].
template <typename T>
Node<T>* feature_node(Graph<T>& g, Node<T>* mag,
                      const net::ClassifierSpec& spec, Node<T>* mel_w) {
  Node<T>* h = mag;
  if (spec.input_kind == net::FeatureKind::kMelMagnitude) {
    WSEP_CHECK(mel_w != nullptr, "mel classifier input needs a filterbank");
    h = ops::matmul(g, mel_w, h);
  }
  if (spec.log_input) h = ops::log_floored(g, h, T(1e-8));
  return h;
}

}  // namespace detail

// Assemble the training objective for one clip. `masks` is the separator
// output [n*F x T]. For frame/clip modes the classifier is applied to the
// mixture and to every estimated source inside the graph, so gradients
// reach the separator through the classification terms.
template <typename T>
LossBundle<T> total_loss(Graph<T>& g, Node<T>* masks,
                         const LossInputs<T>& in, const LossConfig& cfg,
                         const ClassPriors* priors,
                         const net::ClassifierSpec* cls_spec,
                         ParamMap<T>* cls_params, bool cls_trainable,
                         const MelFilterbank* fb) {
  WSEP_CHECK(std::isfinite(cfg.alpha) && cfg.alpha >= 0.0,
             "loss config: alpha must be finite and >= 0");
  const int f = in.xmag.dim(0), t = in.xmag.dim(1);
  WSEP_CHECK(masks->val.dim(1) == t && masks->val.dim(0) % f == 0,
             "total_loss: mask/mixture shape mismatch");
  const int n = masks->val.dim(0) / f;

  if (cfg.use_class_weights) {
    WSEP_CHECK(cfg.label_mode != LabelMode::kClip,
               "weighted clip losses are not implemented");
    WSEP_CHECK(priors != nullptr,
               "class weights require class priors");
  }

  Node<T>* est = ops::mask_apply(g, masks, in.xmag, n);
  LossBundle<T> out;

  if (cfg.label_mode == LabelMode::kStrong) {
    WSEP_CHECK(in.strong_refs.numel() > 0 &&
                   in.strong_refs.same_shape(masks->val),
               "strong mode requires reference magnitudes [n*F x T]");
    Tensor<T> w;
    if (cfg.use_class_weights) {
      WSEP_CHECK(in.frame_labels.numel() > 0,
                 "weighted strong loss requires frame labels");
      w = compute_loss_weights(*priors, in.frame_labels);
    }
    out.total = ops::loss_mi(g, est, in.strong_refs, w, n);
    return out;
  }

  WSEP_CHECK(cls_spec != nullptr && cls_params != nullptr,
             "frame/clip modes require a classifier");
  WSEP_CHECK(static_cast<int>(in.clip_labels.size()) == n,
             "clip labels must cover every class");

  Node<T>* mel_w = nullptr;
  if (cls_spec->input_kind == net::FeatureKind::kMelMagnitude) {
    WSEP_CHECK(fb != nullptr && fb->n_mels == cls_spec->n_mels,
               "classifier mel input requires a matching filterbank");
    mel_w = g.leaf(fb->weights.template cast<T>());
  }

  // Classifier on the mixture (constant input) and on every estimate.
  Node<T>* xnode = g.leaf(in.xmag);
  Node<T>* px = net::classifier_forward(
      g, detail::feature_node(g, xnode, *cls_spec, mel_w), *cls_spec,
      *cls_params, cls_trainable);
  std::vector<Node<T>*> pest(n);
  for (int i = 0; i < n; ++i) {
    Node<T>* si = ops::slice_rows(g, est, i * f, (i + 1) * f);
    pest[i] = net::classifier_forward(
        g, detail::feature_node(g, si, *cls_spec, mel_w), *cls_spec,
        *cls_params, cls_trainable);
  }

  if (cfg.label_mode == LabelMode::kFrame) {
    WSEP_CHECK(in.frame_labels.dim(0) == n && in.frame_labels.dim(1) == t,
               "frame mode requires frame labels [n x T]");
    const int factor = cls_spec->time_downsample_factor();
    Tensor<T> labels =
        net::downsample_labels(in.frame_labels.template cast<double>(), factor)
            .template cast<T>();
    WSEP_CHECK(labels.dim(1) == px->val.dim(1),
               "classifier output length does not match downsampled labels");
    Tensor<T> w;
    if (cfg.use_class_weights) w = compute_loss_weights(*priors, labels);
    out.cls = frame_class_loss(g, px, pest, labels, w);
    out.mix = ops::loss_mix(g, est, in.xmag, n, cfg.mixture_loss_variant,
                            in.frame_labels, Tensor<T>{});
  } else {  // clip
    std::vector<Node<T>*> pooled(n);
    Node<T>* px_clip = net::clip_pool(g, px, cls_spec->clip_pool);
    for (int i = 0; i < n; ++i)
      pooled[i] = net::clip_pool(g, pest[i], cls_spec->clip_pool);
    out.cls = clip_class_loss(g, px_clip, pooled, in.clip_labels);
    Tensor<T> ca({n});
    for (int i = 0; i < n; ++i) ca.data[i] = static_cast<T>(in.clip_labels[i]);
    out.mix = ops::loss_mix(g, est, in.xmag, n, cfg.mixture_loss_variant,
                            Tensor<T>{}, ca);
  }

  out.total =
      ops::add(g, out.cls, ops::scale(g, out.mix, static_cast<T>(cfg.alpha)));
  return out;
}

}  // namespace wsep::obj

#endif  // WSEP_OBJECTIVES_HPP_
