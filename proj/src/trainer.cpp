// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace wsep::train {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Loss components of one clip pass.
struct StepStats {
  double total = 0, cls = 0, mix = 0;

  StepStats& operator+=(const StepStats& o) {
    total += o.total;
    cls += o.cls;
    mix += o.mix;
    return *this;
  }
};

// Adds every registered parameter gradient on the tape into `grads`,
// scaled. Repeated registrations of one name accumulate, which is exactly
// the chain rule for shared parameters.
void accumulate_grads(const Graph<float>& g, float scale,
                      ParamMap<float>& grads) {
  for (const auto& [name, node] : g.params()) {
    if (!node->needs_grad || node->grad.numel() == 0) continue;
    auto& acc = grads[name];
    if (!acc.same_shape(node->grad)) acc = Tensor<float>(node->grad.shape);
    const std::size_t n = acc.data.size();
    for (std::size_t i = 0; i < n; ++i)
      acc.data[i] += scale * node->grad.data[i];
  }
}

// One pass over a clip. `pass` computes the loss and, when grads is
// non-null, backpropagates scaled gradients into it.
using ClipPass = std::function<StepStats(const ClipData& clip, float gscale,
                                         ParamMap<float>* grads)>;

double mean_valid_loss(const Dataset& valid, bool with_refs,
                       const ClipPass& pass) {
  double sum = 0;
  for (const auto& rec : valid.manifest.records)
    sum += pass(load_clip(valid, rec, with_refs), 0.0f, nullptr).total;
  return sum / static_cast<double>(valid.manifest.records.size());
}

// The shared epoch loop: shuffled mini-batches, Adam updates, per-step and
// per-epoch JSON log lines, strict-improvement early stopping, and
// restoration of the best-validation snapshot into `model`.
TrainRun run_training(const Dataset& train, const Dataset& valid,
                      const TrainConfig& cfg, bool with_refs,
                      const ClipPass& pass, ParamMap<float>& model,
                      std::ostream* log) {
  cfg.validate();
  WSEP_CHECK(!train.manifest.records.empty(), "training split is empty");
  WSEP_CHECK(!valid.manifest.records.empty(), "validation split is empty");

  Adam opt(cfg);
  TrainRun run;
  StopState stop;
  ParamMap<float> best = model;

  std::vector<int> order(train.manifest.records.size());
  std::iota(order.begin(), order.end(), 0);
  int global_step = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto epoch_t0 = Clock::now();
    Rng shuffle_rng = Rng::substream(cfg.seed, 0x5e0000u + epoch);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const auto step_t0 = Clock::now();
      const std::size_t stop_at =
          std::min(order.size(), start + cfg.batch_size);
      const float gscale = 1.0f / static_cast<float>(stop_at - start);
      ParamMap<float> grads;
      StepStats stats;
      for (std::size_t k = start; k < stop_at; ++k) {
        const auto& rec = train.manifest.records[order[k]];
        StepStats s = pass(load_clip(train, rec, with_refs), gscale, &grads);
        stats += s;
        epoch_loss += s.total;
      }
      opt.step(model, grads);
      const double bsz = static_cast<double>(stop_at - start);
      if (log) {
        json line{{"type", "step"},        {"epoch", epoch},
                  {"step", global_step},   {"loss_total", stats.total / bsz},
                  {"loss_class", stats.cls / bsz},
                  {"loss_mix", stats.mix / bsz},
                  {"lr", cfg.lr},          {"wall_ms", ms_since(step_t0)}};
        *log << line.dump() << "\n";
      }
      ++global_step;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss =
        epoch_loss / static_cast<double>(train.manifest.records.size());
    rec.valid_loss = mean_valid_loss(valid, with_refs, pass);
    rec.wall_ms = ms_since(epoch_t0);
    run.history.push_back(rec);
    run.stop_epoch = epoch;

    stop.observe(rec.valid_loss, epoch, cfg.patience);
    if (stop.best_epoch == epoch) best = model;
    if (log) {
      json line{{"type", "epoch"},
                {"epoch", epoch},
                {"train_loss", rec.train_loss},
                {"valid_loss", rec.valid_loss},
                {"best_epoch", stop.best_epoch},
                {"wall_ms", rec.wall_ms}};
      *log << line.dump() << "\n";
      log->flush();
    }
    if (stop.should_stop) break;
  }

  run.best_epoch = stop.best_epoch;
  run.best_valid = stop.best_valid;
  model = std::move(best);
  return run;
}

}  // namespace

void Adam::step(ParamMap<float>& params, const ParamMap<float>& grads) {
  double sq = 0;
  for (const auto& [name, g] : grads)
    for (float v : g.data) sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq);
  const float scale =
      (cfg_.grad_clip > 0 && norm > cfg_.grad_clip)
          ? static_cast<float>(cfg_.grad_clip / norm)
          : 1.0f;

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const float b1 = static_cast<float>(cfg_.beta1);
  const float b2 = static_cast<float>(cfg_.beta2);

  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    WSEP_CHECK(it != params.end(), "optimizer: unknown parameter " << name);
    Tensor<float>& p = it->second;
    WSEP_CHECK(p.same_shape(g), "optimizer: gradient shape mismatch for "
                                    << name);
    Tensor<float>& m = m_[name];
    Tensor<float>& v = v_[name];
    if (!m.same_shape(g)) m = Tensor<float>(g.shape);
    if (!v.same_shape(g)) v = Tensor<float>(g.shape);
    const std::size_t n = p.data.size();
    for (std::size_t i = 0; i < n; ++i) {
      const float gi = g.data[i] * scale;
      m.data[i] = b1 * m.data[i] + (1.0f - b1) * gi;
      v.data[i] = b2 * v.data[i] + (1.0f - b2) * gi * gi;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= static_cast<float>(cfg_.lr * mhat /
                                      (std::sqrt(vhat) + cfg_.adam_eps));
    }
  }
}

ClipData load_clip(const Dataset& ds, const scene::ClipRecord& rec,
                   bool with_refs) {
  const int n = ds.manifest.n();
  const std::string base = ds.dir.empty() ? std::string() : ds.dir + "/";

  AudioClip mix = read_wav(base + rec.mixture_path);
  WSEP_CHECK(mix.sample_rate == ds.manifest.sample_rate,
             "clip sample rate does not match the manifest");
  Spectrogram mag = magnitude(stft(mix, ds.manifest.stft));
  WSEP_CHECK(mag.frames == rec.frames,
             "frame count mismatch for clip " << rec.clip_id);

  ClipData d;
  d.xmag = mag.values.cast<float>();
  Tensor<double> lm = mag.values;
  for (auto& v : lm.data) v = std::log(v + 1e-8);
  d.logmag = lm.cast<float>();
  d.frame_labels =
      scene::rle_decode(rec.frame_rle, n, rec.frames).cast<float>();
  d.clip_labels = rec.clip_labels;

  if (with_refs) {
    if (static_cast<int>(rec.reference_paths.size()) != n)
      throw MissingArtifactError("clip " + rec.clip_id +
                                 " has no stored references");
    d.strong_refs = Tensor<float>({n * mag.freq_bins, mag.frames});
    for (int i = 0; i < n; ++i) {
      AudioClip ref = read_wav(base + rec.reference_paths[i]);
      Spectrogram rmag = magnitude(stft(ref, ds.manifest.stft));
      WSEP_CHECK(rmag.frames == mag.frames && rmag.freq_bins == mag.freq_bins,
                 "reference/mixture analysis mismatch for " << rec.clip_id);
      for (int f = 0; f < mag.freq_bins; ++f)
        for (int t = 0; t < mag.frames; ++t)
          d.strong_refs.at(i * mag.freq_bins + f, t) =
              static_cast<float>(rmag.values.at(f, t));
    }
  }
  return d;
}

ClassifierResult train_classifier(const Dataset& train, const Dataset& valid,
                                  const net::ClassifierSpec& spec,
                                  const TrainConfig& cfg,
                                  const LossConfig& loss_cfg,
                                  const MelFilterbank* fb, std::ostream* log) {
  spec.validate();
  WSEP_CHECK(loss_cfg.label_mode != LabelMode::kStrong,
             "classifier pre-training needs frame or clip labels");
  WSEP_CHECK(spec.n_classes == train.manifest.n(),
             "classifier spec class count does not match the dataset");

  ClassPriors priors;
  if (loss_cfg.use_class_weights) {
    WSEP_CHECK(loss_cfg.label_mode == LabelMode::kFrame,
               "weighted clip losses are not implemented");
    priors = scene::compute_class_priors(train.manifest);
  }

  Tensor<float> mel_w;
  if (spec.input_kind == net::FeatureKind::kMelMagnitude) {
    WSEP_CHECK(fb != nullptr && fb->n_mels == spec.n_mels,
               "classifier mel input requires a matching filterbank");
    mel_w = fb->weights.cast<float>();
  }

  Rng init_rng = Rng::substream(cfg.seed, 1);
  ParamMap<float> model = net::init_classifier<float>(spec, init_rng);

  auto pass = [&](const ClipData& d, float gscale,
                  ParamMap<float>* grads) -> StepStats {
    const bool with_grad = grads != nullptr;
    Graph<float> g;
    Node<float>* x = g.leaf(d.xmag);
    if (mel_w.numel() > 0) x = ops::matmul(g, g.leaf(mel_w), x);
    if (spec.log_input) x = ops::log_floored(g, x, 1e-8f);
    Node<float>* probs = net::classifier_forward(g, x, spec, model, with_grad);

    Node<float>* loss = nullptr;
    if (loss_cfg.label_mode == LabelMode::kFrame) {
      Tensor<float> labels =
          net::downsample_labels(d.frame_labels.cast<double>(),
                                 spec.time_downsample_factor())
              .cast<float>();
      Tensor<float> w;
      if (loss_cfg.use_class_weights) w = compute_loss_weights(priors, labels);
      loss = ops::bce_sum(g, probs, labels, w);
    } else {
      Node<float>* pooled = net::clip_pool(g, probs, spec.clip_pool);
      Tensor<float> l({spec.n_classes, 1});
      for (int i = 0; i < spec.n_classes; ++i)
        l.data[i] = static_cast<float>(d.clip_labels[i]);
      loss = ops::bce_sum(g, pooled, l);
    }

    StepStats s;
    s.total = s.cls = loss->val.data[0];
    if (with_grad) {
      g.backward(loss);
      accumulate_grads(g, gscale, *grads);
    }
    return s;
  };

  ClassifierResult out;
  out.run = run_training(train, valid, cfg, /*with_refs=*/false, pass, model,
                         log);
  out.params = std::move(model);
  return out;
}

SeparatorResult train_separator(const Dataset& train, const Dataset& valid,
                                const net::SeparatorSpec& sep_spec,
                                const net::ClassifierSpec* cls_spec,
                                const ParamMap<float>& classifier_params,
                                const TrainConfig& cfg,
                                const LossConfig& loss_cfg,
                                const ClassPriors* priors,
                                const MelFilterbank* fb, std::ostream* log) {
  sep_spec.validate();
  WSEP_CHECK(sep_spec.n_classes == train.manifest.n(),
             "separator spec class count does not match the dataset");

  const bool strong = loss_cfg.label_mode == LabelMode::kStrong;
  if (strong) {
    WSEP_CHECK(cls_spec == nullptr && classifier_params.empty(),
               "strong supervision does not use a classifier");
  } else {
    WSEP_CHECK(cls_spec != nullptr, "frame/clip modes require a classifier");
    cls_spec->validate();
    WSEP_CHECK(cls_spec->n_classes == sep_spec.n_classes,
               "classifier/separator class count mismatch");
    if (cfg.strategy == Strategy::kJoint)
      WSEP_CHECK(classifier_params.empty(),
                 "joint training initializes its own classifier");
    else
      WSEP_CHECK(!classifier_params.empty(),
                 to_string(cfg.strategy)
                     << " requires a pre-trained classifier");
  }
  const bool cls_trainable =
      !strong && cfg.strategy != Strategy::kFixedClassifier;

  Rng sep_rng = Rng::substream(cfg.seed, 0);
  ParamMap<float> model = net::init_separator<float>(sep_spec, sep_rng);
  if (!strong) {
    ParamMap<float> cls = classifier_params;
    if (cfg.strategy == Strategy::kJoint) {
      Rng cls_rng = Rng::substream(cfg.seed, 1);
      cls = net::init_classifier<float>(*cls_spec, cls_rng);
    }
    for (auto& [name, t] : cls) model[name] = std::move(t);
  }

  auto pass = [&](const ClipData& d, float gscale,
                  ParamMap<float>* grads) -> StepStats {
    const bool with_grad = grads != nullptr;
    Graph<float> g;
    Node<float>* x = g.leaf(d.logmag);
    Node<float>* masks =
        net::separator_forward(g, x, sep_spec, model, with_grad);
    obj::LossInputs<float> in;
    in.xmag = d.xmag;
    in.strong_refs = d.strong_refs;
    in.frame_labels = d.frame_labels;
    in.clip_labels = d.clip_labels;
    obj::LossBundle<float> b = obj::total_loss<float>(
        g, masks, in, loss_cfg, priors, cls_spec, strong ? nullptr : &model,
        with_grad && cls_trainable, fb);
    StepStats s;
    s.total = b.total->val.data[0];
    if (b.cls) s.cls = b.cls->val.data[0];
    if (b.mix) s.mix = b.mix->val.data[0];
    if (with_grad) {
      g.backward(b.total);
      accumulate_grads(g, gscale, *grads);
    }
    return s;
  };

  SeparatorResult out;
  out.run = run_training(train, valid, cfg, /*with_refs=*/strong, pass, model,
                         log);
  for (auto& [name, t] : model) {
    if (name.rfind("cls.", 0) == 0)
      out.classifier_params[name] = std::move(t);
    else
      out.params[name] = std::move(t);
  }
  return out;
}

}  // namespace wsep::train
