// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: synth / train / eval / sweep / plot.
// Exit codes: 0 success, 2 configuration error, 3 missing prerequisite,
// 4 runtime failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsep/config.hpp"
#include "wsep/evaluate.hpp"
#include "wsep/manifest.hpp"
#include "wsep/mel.hpp"
#include "wsep/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsep;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

cfg::ExperimentConfig load_cfg(const CommonArgs& a) {
  cfg::ExperimentConfig c = cfg::load_config(a.config_path, a.sets);
  if (a.seed_set) {
    c.train.seed = a.seed;
    c.dataset.scene.rng_seed = a.seed;
  }
  return c;
}

std::string split_dir(const cfg::ExperimentConfig& c, const char* name) {
  return (fs::path(c.dataset.root) / name).string();
}

train::Dataset load_split(const cfg::ExperimentConfig& c, const char* name) {
  train::Dataset d;
  d.dir = split_dir(c, name);
  d.manifest = scene::read_manifest(d.dir + "/manifest.jsonl");
  return d;
}

// Builds the mel filterbank when the classifier wants mel input.
// Returned pointer aliases `store`.
const MelFilterbank* maybe_mel(const cfg::ExperimentConfig& c,
                               MelFilterbank& store) {
  if (c.loss.label_mode == LabelMode::kStrong) return nullptr;
  if (c.classifier.input_kind != net::FeatureKind::kMelMagnitude)
    return nullptr;
  store = mel_filterbank(c.classifier.n_mels, c.stft, c.sample_rate);
  return &store;
}

// ---------------------------------------------------------------------------

void do_synth(const cfg::ExperimentConfig& c) {
  auto pool = scene::toy_pool(c.dataset.pool_seed, c.dataset.variants_per_class);
  scene::BuildOptions opts;
  opts.stft = c.stft;
  opts.store_references = c.dataset.store_references;

  struct Split {
    const char* name;
    int count;
    std::uint64_t seed_offset;
  };
  const Split splits[] = {{"train", c.dataset.train_clips, 0},
                          {"valid", c.dataset.valid_clips, 1},
                          {"test", c.dataset.test_clips, 2}};
  for (const auto& s : splits) {
    scene::SceneSpec spec = c.dataset.scene;
    spec.rng_seed = c.dataset.scene.rng_seed + s.seed_offset;
    auto m = scene::build_dataset(spec, pool, s.count, split_dir(c, s.name),
                                  opts);
    std::cout << s.name << ": " << m.records.size() << " clips -> "
              << split_dir(c, s.name) << "\n";
  }
}

void do_train(const cfg::ExperimentConfig& c, const std::string& out) {
  fs::create_directories(out);
  {
    std::ofstream f(out + "/config.json");
    f << cfg::to_json(c).dump(2) << "\n";
  }
  auto tr = load_split(c, "train");
  auto va = load_split(c, "valid");

  MelFilterbank mel_store;
  const MelFilterbank* fb = maybe_mel(c, mel_store);

  const bool strong = c.loss.label_mode == LabelMode::kStrong;
  ParamMap<float> cls_params;
  const net::ClassifierSpec* cs = strong ? nullptr : &c.classifier;
  if (!strong && c.train.strategy != train::Strategy::kJoint) {
    std::cout << "pre-training classifier (" << to_string(c.loss.label_mode)
              << " labels)...\n";
    std::ofstream clog(out + "/classifier_log.jsonl");
    auto r = train::train_classifier(tr, va, c.classifier, c.train, c.loss,
                                     fb, &clog);
    cls_params = std::move(r.params);
    net::save_checkpoint(out + "/classifier.ckpt", cls_params,
                         json{{"kind", "classifier"},
                              {"spec", c.classifier},
                              {"best_epoch", r.run.best_epoch},
                              {"best_valid", r.run.best_valid}});
    std::cout << "classifier: best epoch " << r.run.best_epoch
              << ", valid loss " << r.run.best_valid << "\n";
  }

  ClassPriors priors;
  const ClassPriors* pp = nullptr;
  if (c.loss.use_class_weights) {
    priors = scene::compute_class_priors(tr.manifest);
    pp = &priors;
  }

  std::cout << "training separator (" << to_string(c.loss.label_mode);
  if (!strong) std::cout << ", " << to_string(c.train.strategy);
  std::cout << ")...\n";
  std::ofstream slog(out + "/train_log.jsonl");
  auto res = train::train_separator(tr, va, c.separator, cs, cls_params,
                                    c.train, c.loss, pp, fb, &slog);
  net::save_checkpoint(out + "/separator.ckpt", res.params,
                       json{{"kind", "separator"},
                            {"spec", c.separator},
                            {"label_mode", c.loss.label_mode},
                            {"best_epoch", res.run.best_epoch},
                            {"best_valid", res.run.best_valid}});
  if (!res.classifier_params.empty())
    net::save_checkpoint(out + "/classifier.ckpt", res.classifier_params,
                         json{{"kind", "classifier"},
                              {"spec", c.classifier},
                              {"best_epoch", res.run.best_epoch}});
  std::cout << "separator: best epoch " << res.run.best_epoch
            << ", valid loss " << res.run.best_valid << " ("
            << res.run.stop_epoch + 1 << " epochs run)\n";
}

json summary_json(const eval::SeparationReport& r) {
  json per = json::array();
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    const auto& c = r.per_class[i];
    per.push_back({{"class", r.classes[i]},
                   {"count", c.count},
                   {"mean_input_db", c.mean_input},
                   {"mean_output_db", c.mean_output},
                   {"mean_delta_db", c.mean_delta},
                   {"median_delta_db", c.median_delta}});
  }
  return json{{"per_class", per},
              {"overall",
               {{"count", r.overall.count},
                {"mean_input_db", r.overall.mean_input},
                {"mean_output_db", r.overall.mean_output},
                {"mean_delta_db", r.overall.mean_delta},
                {"median_delta_db", r.overall.median_delta}}},
              {"excluded_clips", r.excluded_clips}};
}

eval::SeparationReport do_eval(const cfg::ExperimentConfig& c,
                               const std::string& out, bool verbose) {
  auto te = load_split(c, "test");
  auto params = net::load_checkpoint(out + "/separator.ckpt");
  auto rep = eval::evaluate_separator(te, c.separator, params);

  std::ostringstream table;
  eval::write_separation_table(table, rep);
  if (verbose) std::cout << table.str();
  {
    std::ofstream f(out + "/eval_separation.txt");
    f << table.str();
  }
  eval::write_scatter_files(out + "/scatter_", rep);

  json report = summary_json(rep);
  if (fs::exists(out + "/classifier.ckpt")) {
    MelFilterbank mel_store;
    const MelFilterbank* fb = nullptr;
    if (c.classifier.input_kind == net::FeatureKind::kMelMagnitude) {
      mel_store = mel_filterbank(c.classifier.n_mels, c.stft, c.sample_rate);
      fb = &mel_store;
    }
    auto cp = net::load_checkpoint(out + "/classifier.ckpt");
    auto crep = eval::evaluate_classifier(te, c.classifier, cp, fb);
    std::ostringstream ct;
    eval::write_classifier_table(ct, crep);
    if (verbose) std::cout << ct.str();
    std::ofstream f(out + "/eval_classifier.txt");
    f << ct.str();
    json jc = json::array();
    for (std::size_t i = 0; i < crep.classes.size(); ++i)
      jc.push_back({{"class", crep.classes[i]},
                    {"frame_f1", crep.frame_per_class[i].f1()},
                    {"clip_f1", crep.clip_per_class[i].f1()}});
    report["classifier"] = {{"per_class", jc},
                            {"frame_f1", crep.frame_overall.f1()},
                            {"clip_f1", crep.clip_overall.f1()}};
  }
  {
    std::ofstream f(out + "/eval_report.json");
    f << report.dump(2) << "\n";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Scatter plot: one panel per class, input SI-SDR vs improvement.

struct Pt {
  double x, y;
};

void write_scatter_svg(const std::string& path,
                       const std::vector<std::string>& classes,
                       const std::vector<std::vector<Pt>>& pts) {
  const int pw = 280, ph = 240, ml = 46, mb = 34, mt = 26, mr = 12;
  const int iw = pw - ml - mr, ih = ph - mt - mb;
  const int n = static_cast<int>(classes.size());

  std::ofstream f(path, std::ios::trunc);
  WSEP_CHECK(f.good(), "cannot write plot: " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << n * pw
    << "' height='" << ph << "' font-family='sans-serif' font-size='10'>\n";
  for (int c = 0; c < n; ++c) {
    double xlo = -10, xhi = 10, ylo = -1, yhi = 1;
    if (!pts[c].empty()) {
      xlo = xhi = pts[c][0].x;
      ylo = yhi = pts[c][0].y;
      for (const auto& p : pts[c]) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
      }
      const double px = 0.05 * (xhi - xlo) + 0.5, py = 0.05 * (yhi - ylo) + 0.5;
      xlo -= px; xhi += px; ylo -= py; yhi += py;
    }
    const double x0 = c * pw + ml, y0 = mt;
    auto sx = [&](double v) { return x0 + (v - xlo) / (xhi - xlo) * iw; };
    auto sy = [&](double v) { return y0 + ih - (v - ylo) / (yhi - ylo) * ih; };

    f << "<g>\n<rect x='" << x0 << "' y='" << y0 << "' width='" << iw
      << "' height='" << ih << "' fill='none' stroke='#444'/>\n";
    f << "<text x='" << x0 + iw / 2.0 << "' y='" << y0 - 8
      << "' text-anchor='middle' font-size='12'>" << classes[c]
      << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = xlo + k * (xhi - xlo) / 4;
      const double yv = ylo + k * (yhi - ylo) / 4;
      f << "<line x1='" << sx(xv) << "' y1='" << y0 + ih << "' x2='" << sx(xv)
        << "' y2='" << y0 + ih + 4 << "' stroke='#444'/>\n";
      f << "<text x='" << sx(xv) << "' y='" << y0 + ih + 14
        << "' text-anchor='middle'>" << std::round(xv * 10) / 10
        << "</text>\n";
      f << "<line x1='" << x0 - 4 << "' y1='" << sy(yv) << "' x2='" << x0
        << "' y2='" << sy(yv) << "' stroke='#444'/>\n";
      f << "<text x='" << x0 - 6 << "' y='" << sy(yv) + 3
        << "' text-anchor='end'>" << std::round(yv * 10) / 10 << "</text>\n";
    }
    if (ylo < 0 && yhi > 0)
      f << "<line x1='" << x0 << "' y1='" << sy(0) << "' x2='" << x0 + iw
        << "' y2='" << sy(0) << "' stroke='#bbb' stroke-dasharray='3,3'/>\n";
    f << "<text x='" << x0 + iw / 2.0 << "' y='" << ph - 6
      << "' text-anchor='middle'>input SI-SDR (dB)</text>\n";
    f << "<text x='" << x0 - 36 << "' y='" << y0 + ih / 2.0
      << "' text-anchor='middle' transform='rotate(-90 " << x0 - 36 << " "
      << y0 + ih / 2.0 << ")'>SI-SDR improvement (dB)</text>\n";
    for (const auto& p : pts[c])
      f << "<circle cx='" << sx(p.x) << "' cy='" << sy(p.y)
        << "' r='2.2' fill='#1f77b4' fill-opacity='0.7'/>\n";
    f << "</g>\n";
  }
  f << "</svg>\n";
  WSEP_CHECK(f.good(), "plot write failed: " + path);
}

void do_plot(const cfg::ExperimentConfig& c, const std::string& out) {
  const auto pool = scene::toy_pool(c.dataset.pool_seed, 1);
  std::vector<std::vector<Pt>> pts(pool.n());
  for (int i = 0; i < pool.n(); ++i) {
    const std::string path = out + "/scatter_" + pool.classes[i] + ".tsv";
    std::ifstream f(path);
    if (!f.good())
      throw MissingArtifactError("no scatter data (run eval first): " + path);
    std::string line;
    std::getline(f, line);  // header
    double x, y;
    while (f >> x >> y) pts[i].push_back({x, y});
  }
  write_scatter_svg(out + "/scatter.svg", pool.classes, pts);
  std::cout << "wrote " << out << "/scatter.svg\n";
}

// ---------------------------------------------------------------------------
// Sweep: synth/train/eval per value of one axis, with a comparison table.

const std::map<std::string, std::string> kAxisPaths = {
    {"alpha", "loss.alpha"},
    {"n_mels", "classifier.n_mels"},
    {"window_ms", "stft.window_ms"},
    {"lambda", "dataset.lambda"},
    {"strategy", "train.strategy"},
    {"label_mode", "loss.label_mode"}};

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-')
      c = '_';
  return s;
}

void do_sweep(const CommonArgs& a, const std::string& axis,
              const std::vector<std::string>& values) {
  auto it = kAxisPaths.find(axis);
  const std::string path =
      it != kAxisPaths.end()
          ? it->second
          : (axis.find('.') != std::string::npos
                 ? axis
                 : throw ConfigError("unknown sweep axis: " + axis));
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  struct Row {
    std::string value;
    eval::ClassSummary overall;
    int excluded;
  };
  std::vector<Row> rows;
  for (const auto& v : values) {
    CommonArgs run = a;
    run.sets.push_back(path + "=" + v);
    const std::string tag = sanitize(axis + "_" + v);
    const std::string run_out = (fs::path(a.out) / tag).string();
    run.sets.push_back("dataset.root=" + run_out + "/data");
    cfg::ExperimentConfig c = load_cfg(run);

    std::cout << "=== " << path << " = " << v << " ===\n";
    do_synth(c);
    do_train(c, run_out);
    auto rep = do_eval(c, run_out, /*verbose=*/false);
    rows.push_back({v, rep.overall, rep.excluded_clips});
  }

  std::ostringstream t;
  t << axis << "\tn\tmean_input_db\tmean_delta_db\tmedian_delta_db\n";
  for (const auto& r : rows)
    t << r.value << "\t" << r.overall.count << "\t" << r.overall.mean_input
      << "\t" << r.overall.mean_delta << "\t" << r.overall.median_delta
      << "\n";
  std::cout << t.str();
  std::ofstream f(fs::path(a.out) / "sweep.tsv");
  f << t.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly supervised source separation toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string axis;
  std::vector<std::string> values;

  auto add_common = [&](CLI::App* s, bool need_out) {
    s->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    if (need_out)
      s->add_option("--out", args.out, "output directory")->required();
    s->add_option("--set", args.sets,
                  "config override, section.key=value (repeatable)");
    s->add_option("--seed", args.seed, "override dataset and training seeds")
        ->each([&](const std::string&) { args.seed_set = true; });
    return s;
  };

  auto* synth = add_common(
      app.add_subcommand("synth", "render the dataset splits"), false);
  auto* train_cmd = add_common(
      app.add_subcommand("train", "train classifier and separator"), true);
  auto* eval_cmd = add_common(
      app.add_subcommand("eval", "score the separator on the test split"),
      true);
  auto* sweep = add_common(
      app.add_subcommand("sweep", "synth/train/eval across one axis"), true);
  sweep->add_option("--axis", axis,
                    "alpha|n_mels|window_ms|lambda|strategy|label_mode or a "
                    "dotted config path")
      ->required();
  sweep->add_option("--values", values, "axis values (repeatable)")
      ->required();
  auto* plot = add_common(
      app.add_subcommand("plot", "render eval scatter data as SVG"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(synth)) {
      do_synth(load_cfg(args));
    } else if (app.got_subcommand(train_cmd)) {
      do_train(load_cfg(args), args.out);
    } else if (app.got_subcommand(eval_cmd)) {
      do_eval(load_cfg(args), args.out, true);
    } else if (app.got_subcommand(sweep)) {
      do_sweep(args, axis, values);
    } else if (app.got_subcommand(plot)) {
      do_plot(load_cfg(args), args.out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MissingArtifactError& e) {
    std::cerr << "missing prerequisite: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
