// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wsep/evaluate.hpp"
#include "wsep/manifest.hpp"

using namespace wsep;
namespace fs = std::filesystem;

namespace {

// Deterministic pseudo-noise, zero-mean-ish.
std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Component of `a` orthogonal to `b`, rescaled to ||b||.
std::vector<double> orthogonalize(std::vector<double> a,
                                  const std::vector<double>& b) {
  double ab = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    bb += b[i] * b[i];
  }
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= ab / bb * b[i];
  double aa = 0;
  for (double v : a) aa += v * v;
  const double s = std::sqrt(bb / aa);
  for (auto& v : a) v *= s;
  return a;
}

}  // namespace

TEST_CASE("si_sdr: closed-form properties") {
  auto s = noise(4096, 1);
  auto o = orthogonalize(noise(4096, 2), s);  // ||o|| == ||s||, o _|_ s

  // Perfect reconstruction hits the cap, at any scale.
  CHECK(eval::si_sdr(s, s) == eval::kSiSdrCapDb);
  auto s2 = s;
  for (auto& v : s2) v *= 0.125;
  CHECK(eval::si_sdr(s2, s) == eval::kSiSdrCapDb);

  // Equal-energy orthogonal noise: exactly 0 dB.
  std::vector<double> est(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) est[i] = s[i] + o[i];
  CHECK(eval::si_sdr(est, s) == doctest::Approx(0.0).epsilon(1e-9));

  // Doubling the noise energy: 10*log10(1/2) = -3.0103 dB.
  for (std::size_t i = 0; i < s.size(); ++i)
    est[i] = s[i] + std::sqrt(2.0) * o[i];
  CHECK(eval::si_sdr(est, s) ==
        doctest::Approx(10.0 * std::log10(0.5)).epsilon(1e-9));

  // Scale invariance of the estimate.
  auto est2 = est;
  for (auto& v : est2) v *= 0.3;
  CHECK(eval::si_sdr(est2, s) == doctest::Approx(eval::si_sdr(est, s)).epsilon(1e-12));

  // A nearly orthogonal estimate scores very poorly; an exactly
  // orthogonal one degenerates to the floor sentinel.
  CHECK(eval::si_sdr(o, s) < -100.0);
  CHECK(eval::si_sdr({0.0, 1.0}, {1.0, 0.0}) == -eval::kSiSdrCapDb);

  // Contract violations.
  CHECK_THROWS_AS(eval::si_sdr(s, std::vector<double>(s.size(), 0.0)), Error);
  CHECK_THROWS_AS(eval::si_sdr(s, noise(7, 3)), Error);
}

TEST_CASE("is_silent thresholds at -80 dBFS rms") {
  CHECK(eval::is_silent(std::vector<double>(100, 0.0)));
  CHECK(eval::is_silent({}));
  // RMS of a constant signal is its absolute value.
  CHECK(eval::is_silent(std::vector<double>(100, 0.9e-4)));
  CHECK_FALSE(eval::is_silent(std::vector<double>(100, 1.1e-4)));
  CHECK_FALSE(eval::is_silent(noise(100, 4)));
}

TEST_CASE("median: sort-based oracle") {
  CHECK(eval::median({3.0}) == 3.0);
  CHECK(eval::median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(eval::median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(eval::median({-1.0, -7.0, 2.0, 2.0}) == 0.5);
  CHECK_THROWS_AS(eval::median({}), Error);
}

TEST_CASE("f-measure: hand-counted case and conventions") {
  // P = 1/2, R = 1/4, F = 1/3.
  eval::PrCounts c{1, 1, 3};
  CHECK(c.precision() == doctest::Approx(0.5));
  CHECK(c.recall() == doctest::Approx(0.25));
  CHECK(c.f1() == doctest::Approx(1.0 / 3.0));

  // Vacuous denominators count as perfect; F collapses to 0 only when
  // both components are 0.
  CHECK(eval::PrCounts{0, 0, 0}.precision() == 1.0);
  CHECK(eval::PrCounts{0, 0, 0}.recall() == 1.0);
  CHECK(eval::PrCounts{0, 0, 0}.f1() == 1.0);
  CHECK(eval::PrCounts{0, 0, 5}.precision() == 1.0);
  CHECK(eval::PrCounts{0, 0, 5}.recall() == 0.0);
  CHECK(eval::PrCounts{0, 0, 5}.f1() == 0.0);
  CHECK(eval::PrCounts{0, 4, 0}.precision() == 0.0);
  CHECK(eval::PrCounts{0, 4, 0}.f1() == 0.0);
}

TEST_CASE("count_binary tallies per row at threshold 0.5") {
  Tensor<double> probs({2, 4}, {0.9, 0.4, 0.6, 0.1,
                                0.5, 0.5, 0.2, 0.8});
  Tensor<double> labels({2, 4}, {1, 1, 0, 0,
                                 0, 1, 0, 1});
  auto c = eval::count_binary(probs, labels);
  CHECK(c[0].tp == 1);  // 0.9 vs 1
  CHECK(c[0].fp == 1);  // 0.6 vs 0
  CHECK(c[0].fn == 1);  // 0.4 vs 1
  // Threshold is inclusive: 0.5 counts as a detection.
  CHECK(c[1].tp == 2);
  CHECK(c[1].fp == 1);
  CHECK(c[1].fn == 0);
  CHECK_THROWS_AS(eval::count_binary(probs, Tensor<double>({2, 3})), Error);
}

TEST_CASE("score_clip: exclusions and oracle improvement") {
  const int sr = 16000;
  AudioClip a, b;
  a.samples = noise(8000, 10);
  b.samples = orthogonalize(noise(8000, 11), a.samples);
  AudioClip mix;
  mix.samples.resize(8000);
  for (int i = 0; i < 8000; ++i) mix.samples[i] = a.samples[i] + b.samples[i];
  AudioClip silent;
  silent.samples.assign(8000, 0.0);
  (void)sr;

  // Perfect estimates: outputs at the cap, deltas positive.
  auto sc = eval::score_clip("c0", mix, {a, b, silent}, {a, b, silent});
  CHECK(sc.scored);
  CHECK(sc.sources[0].scored);
  CHECK(sc.sources[1].scored);
  CHECK_FALSE(sc.sources[2].scored);  // silent reference excluded
  CHECK(sc.sources[0].output_db == eval::kSiSdrCapDb);
  CHECK(sc.sources[0].delta_db() > 0);
  // Equal-energy orthogonal interference: input SI-SDR is 0 dB.
  CHECK(sc.sources[0].input_db == doctest::Approx(0.0).epsilon(1e-9));

  // Fewer than two active sources: the clip is skipped entirely.
  auto sc2 = eval::score_clip("c1", a, {a, silent, silent},
                              {a, silent, silent});
  CHECK_FALSE(sc2.scored);
  for (const auto& s : sc2.sources) CHECK_FALSE(s.scored);
}

TEST_CASE("apply_masks: unit masks return the mixture per source") {
  StftConfig cfg{32.0, 8.0};
  AudioClip mix;
  mix.samples = noise(16000, 5);
  auto cs = stft(mix, cfg);
  const int f = cs.freq_bins, t = cs.frames, n = 2;

  Tensor<float> masks({n * f, t});
  masks.fill(1.0f);
  auto est = eval::apply_masks(masks, cs, cfg, n);
  REQUIRE(est.size() == 2);
  for (const auto& e : est) {
    REQUIRE(e.samples.size() == mix.samples.size());
    double err = 0;
    for (std::size_t i = 0; i < e.samples.size(); ++i)
      err = std::max(err, std::abs(e.samples[i] - mix.samples[i]));
    CHECK(err < 1e-6);
  }
  CHECK_THROWS_AS(eval::apply_masks(Tensor<float>({f, t}), cs, cfg, 2),
                  Error);
}

TEST_CASE("summarize: means and medians against hand-built scores") {
  eval::SeparationReport r;
  r.classes = {"x", "y"};
  auto clip = [&](bool scored, double i0, double o0, bool s1, double i1,
                  double o1) {
    eval::ClipScore c;
    c.clip_id = "c";
    c.scored = scored;
    c.sources.resize(2);
    c.sources[0] = {scored, i0, o0};
    c.sources[1] = {scored && s1, i1, o1};
    return c;
  };
  r.clips.push_back(clip(true, 0.0, 4.0, true, -2.0, 1.0));   // d: 4, 3
  r.clips.push_back(clip(true, 2.0, 4.0, false, 0.0, 0.0));   // d: 2
  r.clips.push_back(clip(false, 9.0, 9.0, true, 9.0, 9.0));   // ignored
  r.excluded_clips = 1;
  eval::summarize(r);

  CHECK(r.per_class[0].count == 2);
  CHECK(r.per_class[0].mean_input == doctest::Approx(1.0));
  CHECK(r.per_class[0].mean_delta == doctest::Approx(3.0));
  CHECK(r.per_class[0].median_delta == doctest::Approx(3.0));
  CHECK(r.per_class[1].count == 1);
  CHECK(r.per_class[1].mean_delta == doctest::Approx(3.0));
  CHECK(r.overall.count == 3);
  CHECK(r.overall.mean_delta == doctest::Approx(3.0));
  CHECK(r.overall.median_delta == doctest::Approx(3.0));

  std::ostringstream os;
  eval::write_separation_table(os, r);
  CHECK(os.str().find("overall") != std::string::npos);
  CHECK(os.str().find("excluded clips: 1") != std::string::npos);
}

TEST_CASE("dataset evaluation with oracle and trivial masks") {
  auto root = fs::temp_directory_path() / "wsep_eval_test";
  fs::remove_all(root);
  auto pool = scene::toy_pool(7);
  scene::SceneSpec spec;
  spec.lambda = 3.0;
  spec.clip_duration_s = 1.0;
  spec.event_min_s = 0.3;
  spec.event_max_s = 0.8;
  spec.rng_seed = 42;
  scene::BuildOptions opts;
  opts.stft = StftConfig{32.0, 16.0};
  train::Dataset ds;
  ds.dir = (root / "d").string();
  ds.manifest = scene::build_dataset(spec, pool, 8, ds.dir, opts);
  const int n = ds.manifest.n();

  // Oracle magnitude-ratio masks beat the mixture on every scored source.
  int scored_pairs = 0;
  for (const auto& rec : ds.manifest.records) {
    AudioClip mix = read_wav(ds.dir + "/" + rec.mixture_path);
    auto cs = stft(mix, ds.manifest.stft);
    const int f = cs.freq_bins, t = cs.frames;
    std::vector<AudioClip> refs(n);
    std::vector<Spectrogram> rmag(n);
    for (int i = 0; i < n; ++i) {
      refs[i] = read_wav(ds.dir + "/" + rec.reference_paths[i]);
      rmag[i] = magnitude(stft(refs[i], ds.manifest.stft));
    }
    Tensor<float> masks({n * f, t});
    for (int ff = 0; ff < f; ++ff)
      for (int tau = 0; tau < t; ++tau) {
        double denom = 1e-12;
        for (int i = 0; i < n; ++i) denom += rmag[i].values.at(ff, tau);
        for (int i = 0; i < n; ++i)
          masks.at(i * f + ff, tau) =
              static_cast<float>(rmag[i].values.at(ff, tau) / denom);
      }
    auto est = eval::apply_masks(masks, cs, ds.manifest.stft, n);
    auto sc = eval::score_clip(rec.clip_id, mix, est, refs);
    if (!sc.scored) continue;
    for (const auto& s : sc.sources)
      if (s.scored) {
        ++scored_pairs;
        CHECK(s.delta_db() > 0);
      }
  }
  CHECK(scored_pairs > 0);

  // A random separator is still a valid pipeline end to end.
  net::SeparatorSpec sep;
  sep.recurrent_layers = 1;
  sep.hidden = 8;
  sep.n_classes = n;
  Rng rng(3);
  auto params = net::init_separator<float>(sep, rng);
  auto report = eval::evaluate_separator(ds, sep, params);
  CHECK(report.clips.size() == ds.manifest.records.size());
  CHECK(report.excluded_clips + report.overall.count > 0);

  // Scatter files: one per class, header plus one line per scored pair.
  fs::create_directories(root / "scatter");
  eval::write_scatter_files((root / "scatter" / "cls_").string(), report);
  int rows = 0;
  for (int i = 0; i < n; ++i) {
    std::ifstream f((root / "scatter" /
                     ("cls_" + ds.manifest.classes[i] + ".tsv")));
    REQUIRE(f.good());
    std::string line;
    std::getline(f, line);
    CHECK(line == "input_db\tdelta_db");
    while (std::getline(f, line))
      if (!line.empty()) ++rows;
  }
  CHECK(rows == report.overall.count);

  // Classifier evaluation: a random net produces full counts; a rigged
  // parameter set cannot be fabricated easily, so check count totals.
  net::ClassifierSpec cls;
  cls.kind = net::ClassifierKind::kRnn;
  cls.n_classes = n;
  cls.rnn_layers = 1;
  cls.rnn_hidden = 8;
  auto cp = net::init_classifier<float>(cls, rng);
  auto crep = eval::evaluate_classifier(ds, cls, cp, nullptr);
  std::int64_t total = 0;
  for (const auto& c : crep.frame_per_class) total += c.tp + c.fp + c.fn;
  // Every (class, frame) cell is one of tp/fp/fn/tn; the first three
  // cannot exceed the grid size.
  std::int64_t cells = 0;
  for (const auto& rec : ds.manifest.records) cells += n * rec.frames;
  CHECK(total <= cells);
  CHECK(crep.clip_overall.tp + crep.clip_overall.fp + crep.clip_overall.fn <=
        static_cast<std::int64_t>(n * ds.manifest.records.size()));

  std::ostringstream os;
  eval::write_classifier_table(os, crep);
  CHECK(os.str().find("overall") != std::string::npos);

  fs::remove_all(root);
}
