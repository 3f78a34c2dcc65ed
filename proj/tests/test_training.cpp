// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "wsep/manifest.hpp"
#include "wsep/trainer.hpp"

using namespace wsep;
namespace fs = std::filesystem;

namespace {

bool same_params(const ParamMap<float>& a, const ParamMap<float>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [name, t] : a) {
    auto it = b.find(name);
    if (it == b.end() || !it->second.same_shape(t)) return false;
    if (std::memcmp(t.ptr(), it->second.ptr(),
                    t.data.size() * sizeof(float)) != 0)
      return false;
  }
  return true;
}

// Small datasets shared by the training tests: 1-second clips so the
// recurrent passes stay cheap.
struct Fixture {
  train::Dataset tr, va;
  fs::path root;

  Fixture() {
    root = fs::temp_directory_path() / "wsep_training_test";
    fs::remove_all(root);
    auto pool = scene::toy_pool(7);
    scene::SceneSpec spec;
    spec.lambda = 2.0;
    spec.clip_duration_s = 1.0;
    spec.event_min_s = 0.3;
    spec.event_max_s = 0.8;
    scene::BuildOptions opts;
    opts.stft = StftConfig{32.0, 16.0};
    spec.rng_seed = 11;
    tr.manifest =
        scene::build_dataset(spec, pool, 6, (root / "tr").string(), opts);
    tr.dir = (root / "tr").string();
    spec.rng_seed = 12;
    va.manifest =
        scene::build_dataset(spec, pool, 2, (root / "va").string(), opts);
    va.dir = (root / "va").string();
  }
  ~Fixture() { fs::remove_all(root); }
};

net::SeparatorSpec tiny_separator() {
  net::SeparatorSpec s;
  s.recurrent_layers = 1;
  s.hidden = 16;
  s.n_classes = 3;
  s.freq_bins = 257;
  return s;
}

net::ClassifierSpec tiny_classifier() {
  net::ClassifierSpec s;
  s.kind = net::ClassifierKind::kRnn;
  s.n_classes = 3;
  s.freq_bins = 257;
  s.rnn_layers = 1;
  s.rnn_hidden = 8;
  return s;
}

train::TrainConfig quick_config(int epochs) {
  train::TrainConfig c;
  c.lr = 1e-3;
  c.batch_size = 3;
  c.max_epochs = epochs;
  c.patience = epochs;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("early stopping: strict improvement with patience") {
  // Losses 5,4,4,4,4,4,4 with patience 5: best at epoch 1, ties are not
  // improvements, stop fires after five stale epochs (epoch 6).
  train::StopState s;
  const double losses[] = {5, 4, 4, 4, 4, 4, 4};
  int stopped_at = -1;
  for (int e = 0; e < 7; ++e) {
    s.observe(losses[e], e, 5);
    if (s.should_stop && stopped_at < 0) stopped_at = e;
  }
  CHECK(s.best_epoch == 1);
  CHECK(s.best_valid == 4.0);
  CHECK(stopped_at == 6);

  // A strict improvement resets the counter.
  train::StopState s2;
  const double l2[] = {5, 4, 4.5, 4.4, 3.9, 4.1, 4.1};
  for (int e = 0; e < 7; ++e) {
    s2.observe(l2[e], e, 3);
    CHECK_FALSE(s2.should_stop);
  }
  CHECK(s2.best_epoch == 4);
}

TEST_CASE("adam: first step and clipping match closed forms") {
  train::TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.grad_clip = 5.0;

  // Unclipped: bias corrections cancel on step 1, so the update is
  // lr * g / (|g| + eps).
  {
    train::Adam opt(cfg);
    ParamMap<float> p{{"w", Tensor<float>({1}, {2.0f})}};
    ParamMap<float> g{{"w", Tensor<float>({1}, {3.0f})}};
    opt.step(p, g);
    CHECK(p["w"].data[0] ==
          doctest::Approx(2.0 - 0.1 * 3.0 / (3.0 + 1e-8)).epsilon(1e-6));
  }

  // Global norm 10 across two tensors is halved to the clip value; the
  // direction (and hence the sign pattern) is preserved.
  {
    train::Adam opt(cfg);
    ParamMap<float> p{{"a", Tensor<float>({1}, {0.0f})},
                      {"b", Tensor<float>({1}, {0.0f})}};
    ParamMap<float> g{{"a", Tensor<float>({1}, {6.0f})},
                      {"b", Tensor<float>({1}, {-8.0f})}};
    opt.step(p, g);
    // After clipping both gradients keep |g| > 0, so each parameter moves
    // by lr in the opposite sign of its gradient (adaptive step ~ lr).
    CHECK(p["a"].data[0] == doctest::Approx(-0.1).epsilon(1e-5));
    CHECK(p["b"].data[0] == doctest::Approx(0.1).epsilon(1e-5));
  }

  // No clipping when the norm is under the threshold.
  {
    train::Adam opt(cfg);
    cfg.grad_clip = 100.0;
    train::Adam opt2(cfg);
    ParamMap<float> p1{{"a", Tensor<float>({1}, {1.0f})}};
    ParamMap<float> p2{{"a", Tensor<float>({1}, {1.0f})}};
    ParamMap<float> g{{"a", Tensor<float>({1}, {2.0f})}};
    opt.step(p1, g);
    opt2.step(p2, g);
    CHECK(p1["a"].data[0] == doctest::Approx(p2["a"].data[0]));
  }
}

TEST_CASE("adam: converges on a quadratic") {
  train::TrainConfig cfg;
  cfg.lr = 0.05;
  train::Adam opt(cfg);
  ParamMap<float> p{{"w", Tensor<float>({1}, {-4.0f})}};
  for (int i = 0; i < 2000; ++i) {
    ParamMap<float> g{{"w", Tensor<float>({1}, {2.0f * (p["w"].data[0] - 3.0f)})}};
    opt.step(p, g);
  }
  CHECK(p["w"].data[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("load_clip shapes and missing references") {
  Fixture fx;
  const auto& rec = fx.tr.manifest.records[0];
  const int n = fx.tr.manifest.n();

  auto d = train::load_clip(fx.tr, rec, /*with_refs=*/true);
  CHECK(d.xmag.dim(0) == 257);
  CHECK(d.xmag.dim(1) == rec.frames);
  CHECK(d.logmag.same_shape(d.xmag));
  CHECK(d.frame_labels.dim(0) == n);
  CHECK(d.frame_labels.dim(1) == rec.frames);
  CHECK(d.strong_refs.dim(0) == n * 257);
  for (std::size_t i = 0; i < d.xmag.data.size(); ++i)
    CHECK(d.logmag.data[i] ==
          doctest::Approx(std::log(d.xmag.data[i] + 1e-8)).epsilon(1e-4));

  // A dataset built without stored references cannot serve strong targets.
  scene::SceneSpec spec;
  spec.lambda = 2.0;
  spec.clip_duration_s = 1.0;
  spec.event_min_s = 0.3;
  spec.event_max_s = 0.8;
  spec.rng_seed = 13;
  scene::BuildOptions opts;
  opts.stft = StftConfig{32.0, 16.0};
  opts.store_references = false;
  train::Dataset bare;
  bare.dir = (fx.root / "bare").string();
  bare.manifest =
      scene::build_dataset(spec, scene::toy_pool(7), 1, bare.dir, opts);
  CHECK_NOTHROW(train::load_clip(bare, bare.manifest.records[0], false));
  CHECK_THROWS_AS(train::load_clip(bare, bare.manifest.records[0], true),
                  MissingArtifactError);
}

TEST_CASE("train_separator: validation of strategy/classifier pairings") {
  Fixture fx;
  auto sep = tiny_separator();
  auto cls = tiny_classifier();
  auto cfg = quick_config(1);
  LossConfig lc;

  Rng r(3);
  auto cls_params = net::init_classifier<float>(cls, r);

  // Strong mode must not receive a classifier.
  lc.label_mode = LabelMode::kStrong;
  CHECK_THROWS_AS(train::train_separator(fx.tr, fx.va, sep, &cls, cls_params,
                                         cfg, lc, nullptr, nullptr, nullptr),
                  Error);

  // Fine-tuning or freezing needs pre-trained weights.
  lc.label_mode = LabelMode::kFrame;
  cfg.strategy = train::Strategy::kFinetuneClassifier;
  CHECK_THROWS_AS(train::train_separator(fx.tr, fx.va, sep, &cls, {}, cfg, lc,
                                         nullptr, nullptr, nullptr),
                  Error);

  // Joint initializes its own classifier and rejects a supplied one.
  cfg.strategy = train::Strategy::kJoint;
  CHECK_THROWS_AS(train::train_separator(fx.tr, fx.va, sep, &cls, cls_params,
                                         cfg, lc, nullptr, nullptr, nullptr),
                  Error);

  // Frame/clip modes require a classifier spec at all.
  cfg.strategy = train::Strategy::kFixedClassifier;
  CHECK_THROWS_AS(train::train_separator(fx.tr, fx.va, sep, nullptr, {}, cfg,
                                         lc, nullptr, nullptr, nullptr),
                  Error);

  // Classifier pre-training rejects strong labels.
  lc.label_mode = LabelMode::kStrong;
  CHECK_THROWS_AS(train::train_classifier(fx.tr, fx.va, cls, cfg, lc, nullptr,
                                          nullptr),
                  Error);
}

TEST_CASE("training is deterministic in the seed") {
  Fixture fx;
  auto sep = tiny_separator();
  auto cfg = quick_config(2);
  LossConfig lc;
  lc.label_mode = LabelMode::kStrong;

  std::ostringstream log1, log2;
  auto r1 = train::train_separator(fx.tr, fx.va, sep, nullptr, {}, cfg, lc,
                                   nullptr, nullptr, &log1);
  auto r2 = train::train_separator(fx.tr, fx.va, sep, nullptr, {}, cfg, lc,
                                   nullptr, nullptr, &log2);
  CHECK(same_params(r1.params, r2.params));
  REQUIRE(r1.run.history.size() == r2.run.history.size());
  for (std::size_t i = 0; i < r1.run.history.size(); ++i) {
    CHECK(r1.run.history[i].train_loss == r2.run.history[i].train_loss);
    CHECK(r1.run.history[i].valid_loss == r2.run.history[i].valid_loss);
  }
  CHECK(r1.run.best_epoch == r2.run.best_epoch);

  // The log is JSON lines with the promised fields.
  int epoch_lines = 0, step_lines = 0;
  std::string line;
  std::istringstream in(log1.str());
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.at("type") == "epoch") {
      ++epoch_lines;
      CHECK(j.contains("train_loss"));
      CHECK(j.contains("valid_loss"));
    } else {
      ++step_lines;
      for (const char* k :
           {"epoch", "step", "loss_total", "loss_class", "loss_mix", "lr",
            "wall_ms"})
        CHECK(j.contains(k));
    }
  }
  CHECK(epoch_lines == static_cast<int>(r1.run.history.size()));
  CHECK(step_lines == 2 * 2);  // 6 clips / batch 3 = 2 steps per epoch

  // Best-epoch bookkeeping: best_valid is the running minimum and the
  // best epoch is its first attainment.
  double mn = 1e300;
  int arg = -1;
  for (const auto& h : r1.run.history)
    if (h.valid_loss < mn) {
      mn = h.valid_loss;
      arg = h.epoch;
    }
  CHECK(r1.run.best_valid == mn);
  CHECK(r1.run.best_epoch == arg);
}

TEST_CASE("fixed classifier stays bit-identical through training") {
  Fixture fx;
  auto sep = tiny_separator();
  auto cls = tiny_classifier();
  auto cfg = quick_config(2);
  cfg.strategy = train::Strategy::kFixedClassifier;
  LossConfig lc;
  lc.label_mode = LabelMode::kFrame;

  Rng r(21);
  auto cls_params = net::init_classifier<float>(cls, r);
  auto res = train::train_separator(fx.tr, fx.va, sep, &cls, cls_params, cfg,
                                    lc, nullptr, nullptr, nullptr);
  CHECK(same_params(res.classifier_params, cls_params));
  CHECK(res.params.count("sep.out.w") == 1);
  CHECK(res.params.count("cls.out.w") == 0);

  // Fine-tuning, by contrast, must move the classifier.
  cfg.strategy = train::Strategy::kFinetuneClassifier;
  auto res2 = train::train_separator(fx.tr, fx.va, sep, &cls, cls_params, cfg,
                                     lc, nullptr, nullptr, nullptr);
  CHECK_FALSE(same_params(res2.classifier_params, cls_params));
}

TEST_CASE("losses fall when overfitting a tiny split") {
  Fixture fx;
  auto sep = tiny_separator();
  auto cls = tiny_classifier();
  LossConfig lc;

  auto drop = [&](LabelMode mode, train::Strategy strat) {
    auto cfg = quick_config(8);
    cfg.lr = 3e-3;
    cfg.strategy = strat;
    lc.label_mode = mode;
    ParamMap<float> cls_params;
    const net::ClassifierSpec* cs = nullptr;
    if (mode != LabelMode::kStrong) {
      cs = &cls;
      if (strat != train::Strategy::kJoint) {
        Rng r(33);
        cls_params = net::init_classifier<float>(cls, r);
      }
    }
    auto res = train::train_separator(fx.tr, fx.va, sep, cs, cls_params, cfg,
                                      lc, nullptr, nullptr, nullptr);
    const auto& h = res.run.history;
    REQUIRE(!h.empty());
    return (h.front().train_loss - h.back().train_loss) /
           std::abs(h.front().train_loss);
  };

  CHECK(drop(LabelMode::kStrong, train::Strategy::kFixedClassifier) > 0.2);
  CHECK(drop(LabelMode::kFrame, train::Strategy::kFixedClassifier) > 0.05);
  CHECK(drop(LabelMode::kClip, train::Strategy::kJoint) > 0.05);
}

TEST_CASE("classifier pre-training learns the mixture labels") {
  Fixture fx;
  auto cls = tiny_classifier();
  auto cfg = quick_config(8);
  LossConfig lc;
  lc.label_mode = LabelMode::kFrame;

  auto res = train::train_classifier(fx.tr, fx.va, cls, cfg, lc, nullptr,
                                     nullptr);
  const auto& h = res.run.history;
  REQUIRE(!h.empty());
  CHECK(h.back().train_loss < h.front().train_loss);
  CHECK(res.params.count("cls.out.w") == 1);

  // Clip-level variant also trains.
  lc.label_mode = LabelMode::kClip;
  auto res2 = train::train_classifier(fx.tr, fx.va, cls, cfg, lc, nullptr,
                                      nullptr);
  CHECK(res2.run.history.back().train_loss <
        res2.run.history.front().train_loss);
}

TEST_CASE("train config validation") {
  train::TrainConfig c;
  c.patience = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  CHECK_NOTHROW(c.validate());
}
