// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: one JSON file with dataset / stft / separator /
// classifier / loss / train / eval sections, dotted-path overrides, and
// cross-field validation. Paths resolve relative to the config file.

#ifndef WSEP_CONFIG_HPP_
#define WSEP_CONFIG_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "wsep/evaluate.hpp"
#include "wsep/scene.hpp"
#include "wsep/trainer.hpp"

namespace wsep {

NLOHMANN_JSON_SERIALIZE_ENUM(LabelMode, {{LabelMode::kStrong, "strong"},
                                         {LabelMode::kFrame, "frame"},
                                         {LabelMode::kClip, "clip"}})
NLOHMANN_JSON_SERIALIZE_ENUM(MixVariant,
                             {{MixVariant::kVanilla, "vanilla"},
                              {MixVariant::kConstrained, "constrained"}})

void to_json(nlohmann::json& j, const StftConfig& c);
void from_json(const nlohmann::json& j, StftConfig& c);

namespace train {
NLOHMANN_JSON_SERIALIZE_ENUM(Strategy,
                             {{Strategy::kJoint, "joint"},
                              {Strategy::kFinetuneClassifier,
                               "finetune_classifier"},
                              {Strategy::kFixedClassifier,
                               "fixed_classifier"}})
}  // namespace train

namespace cfg {

struct ExperimentConfig {
  struct DatasetSection {
    std::string root = "data";  // resolved against the config directory
    int train_clips = 600;
    int valid_clips = 100;
    int test_clips = 100;
    scene::SceneSpec scene;  // rng_seed is the train-split seed
    std::uint64_t pool_seed = 7;
    int variants_per_class = 8;
    bool store_references = true;
  } dataset;

  StftConfig stft;
  net::SeparatorSpec separator;    // n_classes/freq_bins are derived
  net::ClassifierSpec classifier;  // likewise
  LossConfig loss;
  train::TrainConfig train;
  double eval_threshold = 0.5;
  int sample_rate = 16000;

  // True when the JSON named a strategy explicitly; strong supervision
  // rejects that, since there is no classifier to train.
  bool strategy_specified = false;

  void validate() const;  // throws ConfigError
};

// Dotted-path assignment "section.key=value" into raw JSON. The value is
// parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Builds and validates a config from JSON. base_dir anchors relative
// paths; derived fields (class count, frequency bins) are filled in.
ExperimentConfig parse_config(const nlohmann::json& j,
                              const std::string& base_dir);

// Reads the file, applies overrides in order, then parses.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace cfg
}  // namespace wsep

#endif  // WSEP_CONFIG_HPP_
