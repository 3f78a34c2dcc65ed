// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace wsep {

using nlohmann::json;

void to_json(json& j, const StftConfig& c) {
  j = json{{"window_ms", c.window_ms}, {"hop_ms", c.hop_ms}};
}

void from_json(const json& j, StftConfig& c) {
  c.window_ms = j.value("window_ms", c.window_ms);
  c.hop_ms = j.value("hop_ms", c.hop_ms);
}

namespace cfg {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// Re-raises spec/loss validation failures as configuration errors.
template <typename F>
void check_section(const char* name, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(std::string(name) + ": " + e.what());
  }
}

// NLOHMANN_JSON_SERIALIZE_ENUM maps unknown strings to the first entry;
// round-tripping catches misspelled enum values instead.
template <typename E>
void strict_enum(const json& j, const char* key, E& out) {
  if (!j.contains(key)) return;
  E e = j.at(key).get<E>();
  if (json(e) != j.at(key))
    fail(std::string("unknown value for ") + key + ": " + j.at(key).dump());
  out = e;
}

void parse_dataset(const json& j, ExperimentConfig::DatasetSection& d) {
  d.root = j.value("root", d.root);
  d.train_clips = j.value("train_clips", d.train_clips);
  d.valid_clips = j.value("valid_clips", d.valid_clips);
  d.test_clips = j.value("test_clips", d.test_clips);
  d.scene.lambda = j.value("lambda", d.scene.lambda);
  d.scene.clip_duration_s = j.value("clip_duration_s", d.scene.clip_duration_s);
  d.scene.event_min_s = j.value("event_min_s", d.scene.event_min_s);
  d.scene.event_max_s = j.value("event_max_s", d.scene.event_max_s);
  d.scene.level_lo_lufs = j.value("level_lo_lufs", d.scene.level_lo_lufs);
  d.scene.level_hi_lufs = j.value("level_hi_lufs", d.scene.level_hi_lufs);
  d.scene.rng_seed = j.value("seed", d.scene.rng_seed);
  d.pool_seed = j.value("pool_seed", d.pool_seed);
  d.variants_per_class = j.value("variants_per_class", d.variants_per_class);
  d.store_references = j.value("store_references", d.store_references);
}

void parse_train(const json& j, train::TrainConfig& t) {
  t.lr = j.value("lr", t.lr);
  t.beta1 = j.value("beta1", t.beta1);
  t.beta2 = j.value("beta2", t.beta2);
  t.adam_eps = j.value("adam_eps", t.adam_eps);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.max_epochs = j.value("max_epochs", t.max_epochs);
  t.patience = j.value("patience", t.patience);
  t.grad_clip = j.value("grad_clip", t.grad_clip);
  strict_enum(j, "strategy", t.strategy);
  t.seed = j.value("seed", t.seed);
}

void parse_loss(const json& j, LossConfig& l) {
  strict_enum(j, "label_mode", l.label_mode);
  l.alpha = j.value("alpha", l.alpha);
  l.use_class_weights = j.value("use_class_weights", l.use_class_weights);
  strict_enum(j, "mixture_loss_variant", l.mixture_loss_variant);
}

}  // namespace

void ExperimentConfig::validate() const {
  check_section("dataset", [&] { dataset.scene.validate(); });
  if (dataset.train_clips < 0 || dataset.valid_clips < 0 ||
      dataset.test_clips < 0)
    fail("dataset: clip counts must be >= 0");
  if (dataset.variants_per_class < 1)
    fail("dataset: variants_per_class must be >= 1");

  if (stft.window_ms <= 0 || stft.hop_ms <= 0 || stft.hop_ms > stft.window_ms)
    fail("stft: need 0 < hop_ms <= window_ms");

  check_section("separator", [&] { separator.validate(); });
  check_section("classifier", [&] { classifier.validate(); });
  check_section("train", [&] { train.validate(); });

  if (!std::isfinite(loss.alpha) || loss.alpha < 0)
    fail("loss: alpha must be finite and >= 0");
  if (loss.use_class_weights && loss.label_mode == LabelMode::kClip)
    fail("loss: class weights are not available with clip labels");
  if (loss.label_mode == LabelMode::kStrong && strategy_specified)
    fail("train: strong supervision has no classifier, so a classifier "
         "strategy cannot be set");
  if (loss.label_mode == LabelMode::kStrong && !dataset.store_references)
    fail("loss: strong supervision requires stored references");

  if (!(eval_threshold > 0.0 && eval_threshold < 1.0))
    fail("eval: threshold must lie in (0, 1)");
  if (sample_rate != 16000) fail("sample_rate: only 16000 is supported");
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail("override must look like section.key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare strings need no quoting
  }

  json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail("override has an empty path segment: " + assignment);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    if (!cur->is_object() && !cur->is_null())
      fail("override path crosses a non-object value: " + assignment);
    start = dot + 1;
  }
}

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) fail("config root must be a JSON object");
  static const std::set<std::string> known{
      "dataset", "stft", "separator", "classifier",
      "loss",    "train", "eval",     "sample_rate"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) fail("unknown config section: " + key);

  ExperimentConfig c;
  try {
    if (j.contains("dataset")) parse_dataset(j.at("dataset"), c.dataset);
    if (j.contains("stft")) j.at("stft").get_to(c.stft);
    if (j.contains("separator")) {
      j.at("separator").get_to(c.separator);
      strict_enum(j.at("separator"), "input_norm", c.separator.input_norm);
    }
    if (j.contains("classifier")) {
      j.at("classifier").get_to(c.classifier);
      strict_enum(j.at("classifier"), "kind", c.classifier.kind);
      strict_enum(j.at("classifier"), "input_kind", c.classifier.input_kind);
      strict_enum(j.at("classifier"), "clip_pool", c.classifier.clip_pool);
    }
    if (j.contains("loss")) parse_loss(j.at("loss"), c.loss);
    if (j.contains("train")) {
      parse_train(j.at("train"), c.train);
      c.strategy_specified = j.at("train").contains("strategy");
    }
    if (j.contains("eval"))
      c.eval_threshold = j.at("eval").value("threshold", c.eval_threshold);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
  } catch (const json::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }

  // Derived fields: the toy pool fixes the class count, the analysis
  // settings fix the input width.
  const int n_classes = scene::toy_pool(c.dataset.pool_seed, 1).n();
  c.separator.n_classes = n_classes;
  c.classifier.n_classes = n_classes;
  const int bins = c.stft.fft_size(c.sample_rate) / 2 + 1;
  c.separator.freq_bins = bins;
  c.classifier.freq_bins = bins;

  if (!c.dataset.root.empty() &&
      !std::filesystem::path(c.dataset.root).is_absolute() &&
      !base_dir.empty())
    c.dataset.root = (std::filesystem::path(base_dir) / c.dataset.root)
                         .lexically_normal()
                         .string();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f.good()) fail("cannot read config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    fail("config is not valid JSON: " + std::string(e.what()));
  }
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(
      j, std::filesystem::path(path).parent_path().string());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"root", c.dataset.root},
                  {"train_clips", c.dataset.train_clips},
                  {"valid_clips", c.dataset.valid_clips},
                  {"test_clips", c.dataset.test_clips},
                  {"lambda", c.dataset.scene.lambda},
                  {"clip_duration_s", c.dataset.scene.clip_duration_s},
                  {"event_min_s", c.dataset.scene.event_min_s},
                  {"event_max_s", c.dataset.scene.event_max_s},
                  {"level_lo_lufs", c.dataset.scene.level_lo_lufs},
                  {"level_hi_lufs", c.dataset.scene.level_hi_lufs},
                  {"seed", c.dataset.scene.rng_seed},
                  {"pool_seed", c.dataset.pool_seed},
                  {"variants_per_class", c.dataset.variants_per_class},
                  {"store_references", c.dataset.store_references}};
  j["stft"] = c.stft;
  j["separator"] = c.separator;
  j["classifier"] = c.classifier;
  j["loss"] = {{"label_mode", c.loss.label_mode},
               {"alpha", c.loss.alpha},
               {"use_class_weights", c.loss.use_class_weights},
               {"mixture_loss_variant", c.loss.mixture_loss_variant}};
  j["train"] = {{"lr", c.train.lr},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"adam_eps", c.train.adam_eps},
                {"batch_size", c.train.batch_size},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience},
                {"grad_clip", c.train.grad_clip},
                {"strategy", c.train.strategy},
                {"seed", c.train.seed}};
  j["eval"] = {{"threshold", c.eval_threshold}};
  j["sample_rate"] = c.sample_rate;
  return j;
}

}  // namespace cfg
}  // namespace wsep
