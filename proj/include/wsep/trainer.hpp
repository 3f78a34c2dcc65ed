// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Optimization loop: Adam, gradient clipping, early stopping, the three
// training strategies, and classifier pre-training on mixtures.

#ifndef WSEP_TRAINER_HPP_
#define WSEP_TRAINER_HPP_

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "wsep/manifest.hpp"
#include "wsep/networks.hpp"
#include "wsep/objectives.hpp"

namespace wsep::train {

enum class Strategy { kJoint, kFinetuneClassifier, kFixedClassifier };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kJoint: return "joint";
    case Strategy::kFinetuneClassifier: return "finetune_classifier";
    case Strategy::kFixedClassifier: return "fixed_classifier";
  }
  return "?";
}

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 10;
  int max_epochs = 50;
  int patience = 5;
  double grad_clip = 5.0;  // global norm
  Strategy strategy = Strategy::kFixedClassifier;
  std::uint64_t seed = 0;

  void validate() const {
    WSEP_CHECK(lr > 0 && batch_size >= 1 && max_epochs >= 1,
               "train config: bad optimizer settings");
    WSEP_CHECK(patience >= 1, "train config: patience must be >= 1");
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double valid_loss = 0;
  double wall_ms = 0;
};

struct TrainRun {
  std::vector<EpochRecord> history;
  int best_epoch = -1;  // 0-based
  double best_valid = std::numeric_limits<double>::infinity();
  int stop_epoch = -1;  // last epoch actually run (0-based)
};

// A manifest plus the directory its relative paths resolve against.
struct Dataset {
  scene::Manifest manifest;
  std::string dir;
};

// Per-clip training payload.
struct ClipData {
  Tensor<float> xmag;          // [F x T]
  Tensor<float> logmag;        // [F x T]
  Tensor<float> frame_labels;  // [n x T]
  std::vector<int> clip_labels;
  Tensor<float> strong_refs;   // [n*F x T] when loaded with references
};

ClipData load_clip(const Dataset& ds, const scene::ClipRecord& rec,
                   bool with_refs);

// Early-stopping decision: given the validation history so far, should
// training stop, and which epoch was best? Strict improvement only.
struct StopState {
  int best_epoch = -1;
  double best_valid = std::numeric_limits<double>::infinity();
  int since_best = 0;
  bool should_stop = false;

  void observe(double valid_loss, int epoch, int patience) {
    if (valid_loss < best_valid) {
      best_valid = valid_loss;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    should_stop = since_best >= patience;
  }
};

// Adam with global-norm gradient clipping over a named parameter set.
class Adam {
 public:
  explicit Adam(const TrainConfig& cfg) : cfg_(cfg) {}

  // grads: same keys as params. Applies one update in place.
  void step(ParamMap<float>& params, const ParamMap<float>& grads);

 private:
  TrainConfig cfg_;
  ParamMap<float> m_, v_;
  std::int64_t t_ = 0;
};

struct ClassifierResult {
  ParamMap<float> params;
  TrainRun run;
};

// Pre-train the classifier on mixtures only, minimizing the mixture
// classification term at the configured label granularity.
ClassifierResult train_classifier(const Dataset& train, const Dataset& valid,
                                  const net::ClassifierSpec& spec,
                                  const TrainConfig& cfg,
                                  const LossConfig& loss_cfg,
                                  const MelFilterbank* fb, std::ostream* log);

struct SeparatorResult {
  ParamMap<float> params;
  ParamMap<float> classifier_params;  // possibly updated (joint/finetune)
  TrainRun run;
};

// Train the separator per label mode and strategy. classifier_params must
// be empty for strong mode and for joint (initialized from scratch), and
// must hold a pre-trained classifier for finetune/fixed.
SeparatorResult train_separator(const Dataset& train, const Dataset& valid,
                                const net::SeparatorSpec& sep_spec,
                                const net::ClassifierSpec* cls_spec,
                                const ParamMap<float>& classifier_params,
                                const TrainConfig& cfg,
                                const LossConfig& loss_cfg,
                                const ClassPriors* priors,
                                const MelFilterbank* fb, std::ostream* log);

}  // namespace wsep::train

#endif  // WSEP_TRAINER_HPP_
