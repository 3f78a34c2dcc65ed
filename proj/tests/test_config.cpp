// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wsep/config.hpp"

using namespace wsep;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("defaults parse and validate") {
  auto c = cfg::parse_config(json::object(), "");
  CHECK(c.dataset.train_clips == 600);
  CHECK(c.stft.window_ms == 32.0);
  CHECK(c.stft.hop_ms == 8.0);
  CHECK(c.separator.n_classes == 3);       // fixed by the toy pool
  CHECK(c.classifier.n_classes == 3);
  CHECK(c.separator.freq_bins == 257);     // derived from the analysis
  CHECK(c.loss.alpha == 100.0);
  CHECK(c.train.lr == 1e-4);
  CHECK(c.train.batch_size == 10);
  CHECK(c.train.max_epochs == 50);
  CHECK(c.train.patience == 5);
  CHECK(c.train.grad_clip == 5.0);
  CHECK(c.eval_threshold == 0.5);
  CHECK_FALSE(c.strategy_specified);
}

TEST_CASE("derived bins follow the stft settings") {
  json j{{"stft", {{"window_ms", 64.0}, {"hop_ms", 16.0}}}};
  auto c = cfg::parse_config(j, "");
  CHECK(c.separator.freq_bins == 64 * 16 / 2 + 1);  // 1024-sample window
  CHECK(c.classifier.freq_bins == c.separator.freq_bins);
}

TEST_CASE("section parsing and unknown keys") {
  json j{{"loss", {{"label_mode", "clip"}, {"alpha", 10.0}}},
         {"train", {{"strategy", "joint"}, {"batch_size", 4}}},
         {"classifier", {{"kind", "rnn"}, {"rnn_hidden", 32}}}};
  auto c = cfg::parse_config(j, "");
  CHECK(c.loss.label_mode == LabelMode::kClip);
  CHECK(c.loss.alpha == 10.0);
  CHECK(c.train.strategy == train::Strategy::kJoint);
  CHECK(c.strategy_specified);
  CHECK(c.classifier.kind == net::ClassifierKind::kRnn);
  CHECK(c.classifier.rnn_hidden == 32);

  CHECK_THROWS_AS(cfg::parse_config(json{{"looss", json::object()}}, ""),
                  ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(json::array(), ""), ConfigError);
}

TEST_CASE("misspelled enum values are rejected, not defaulted") {
  CHECK_THROWS_AS(
      cfg::parse_config(json{{"loss", {{"label_mode", "stronk"}}}}, ""),
      ConfigError);
  CHECK_THROWS_AS(
      cfg::parse_config(json{{"train", {{"strategy", "frozen"}}}}, ""),
      ConfigError);
  CHECK_THROWS_AS(
      cfg::parse_config(json{{"classifier", {{"kind", "cnn"}}}}, ""),
      ConfigError);
}

TEST_CASE("cross-field validation") {
  // Clip labels cannot be combined with class weights.
  json j1{{"loss", {{"label_mode", "clip"}, {"use_class_weights", true}}}};
  CHECK_THROWS_AS(cfg::parse_config(j1, ""), ConfigError);
  // Frame labels can.
  json j2{{"loss", {{"label_mode", "frame"}, {"use_class_weights", true}}}};
  CHECK_NOTHROW(cfg::parse_config(j2, ""));

  // Strong supervision forbids naming a classifier strategy...
  json j3{{"loss", {{"label_mode", "strong"}}},
          {"train", {{"strategy", "fixed_classifier"}}}};
  CHECK_THROWS_AS(cfg::parse_config(j3, ""), ConfigError);
  // ...but is fine without one, as long as references are stored.
  json j4{{"loss", {{"label_mode", "strong"}}}};
  CHECK_NOTHROW(cfg::parse_config(j4, ""));
  json j5{{"loss", {{"label_mode", "strong"}}},
          {"dataset", {{"store_references", false}}}};
  CHECK_THROWS_AS(cfg::parse_config(j5, ""), ConfigError);

  // Assorted range checks.
  CHECK_THROWS_AS(
      cfg::parse_config(json{{"loss", {{"alpha", -1.0}}}}, ""), ConfigError);
  CHECK_THROWS_AS(
      cfg::parse_config(json{{"eval", {{"threshold", 1.5}}}}, ""),
      ConfigError);
  CHECK_THROWS_AS(
      cfg::parse_config(json{{"train", {{"patience", 0}}}}, ""), ConfigError);
  CHECK_THROWS_AS(
      cfg::parse_config(
          json{{"stft", {{"window_ms", 8.0}, {"hop_ms", 16.0}}}}, ""),
      ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(json{{"sample_rate", 44100}}, ""),
                  ConfigError);
}

TEST_CASE("overrides: dotted paths, JSON values, bare strings") {
  json j = json::object();
  cfg::apply_override(j, "loss.alpha=12.5");
  cfg::apply_override(j, "loss.label_mode=clip");
  cfg::apply_override(j, "train.batch_size=2");
  cfg::apply_override(j, "dataset.store_references=false");
  CHECK(j["loss"]["alpha"] == 12.5);
  CHECK(j["loss"]["label_mode"] == "clip");  // bare string, no quotes
  CHECK(j["train"]["batch_size"] == 2);
  CHECK(j["dataset"]["store_references"] == false);

  auto c = cfg::parse_config(j, "");
  CHECK(c.loss.alpha == 12.5);
  CHECK(c.loss.label_mode == LabelMode::kClip);
  CHECK(c.train.batch_size == 2);

  // Later overrides win.
  cfg::apply_override(j, "loss.alpha=1");
  CHECK(j["loss"]["alpha"] == 1);

  CHECK_THROWS_AS(cfg::apply_override(j, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(cfg::apply_override(j, "=5"), ConfigError);
  CHECK_THROWS_AS(cfg::apply_override(j, "loss..alpha=5"), ConfigError);
  // Cannot descend through a scalar.
  cfg::apply_override(j, "train.lr=0.001");
  CHECK_THROWS_AS(cfg::apply_override(j, "train.lr.x=1"), ConfigError);
}

TEST_CASE("load_config resolves paths relative to the file") {
  auto root = fs::temp_directory_path() / "wsep_config_test";
  fs::remove_all(root);
  fs::create_directories(root / "exp");

  {
    std::ofstream f(root / "exp" / "e1.json");
    f << R"({"dataset": {"root": "data", "train_clips": 4},
             "loss": {"alpha": 7.0}})";
  }
  auto c = cfg::load_config((root / "exp" / "e1.json").string());
  CHECK(c.dataset.train_clips == 4);
  CHECK(c.loss.alpha == 7.0);
  CHECK(fs::path(c.dataset.root) == root / "exp" / "data");

  // Absolute roots pass through untouched.
  {
    std::ofstream f(root / "exp" / "e2.json");
    f << R"({"dataset": {"root": "/tmp/abs_data"}})";
  }
  auto c2 = cfg::load_config((root / "exp" / "e2.json").string());
  CHECK(c2.dataset.root == "/tmp/abs_data");

  // Overrides are applied before validation.
  auto c3 = cfg::load_config((root / "exp" / "e1.json").string(),
                             {"loss.alpha=3", "train.max_epochs=2"});
  CHECK(c3.loss.alpha == 3.0);
  CHECK(c3.train.max_epochs == 2);
  CHECK_THROWS_AS(cfg::load_config((root / "exp" / "e1.json").string(),
                                   {"loss.alpha=-4"}),
                  ConfigError);

  // Missing or malformed files are configuration errors.
  CHECK_THROWS_AS(cfg::load_config((root / "nope.json").string()),
                  ConfigError);
  {
    std::ofstream f(root / "exp" / "bad.json");
    f << "{ not json";
  }
  CHECK_THROWS_AS(cfg::load_config((root / "exp" / "bad.json").string()),
                  ConfigError);

  // Round trip through to_json is stable.
  auto j = cfg::to_json(c3);
  auto c4 = cfg::parse_config(j, "");
  CHECK(cfg::to_json(c4) == j);
  fs::remove_all(root);
}
